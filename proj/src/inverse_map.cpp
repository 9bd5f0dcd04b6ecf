#include "ciga/inverse_map.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

namespace ciga {

namespace {

Vector clamp_unit(Vector xi) {
  for (int m = 0; m < xi.size(); ++m) xi(m) = std::clamp(xi(m), 0.0, 1.0);
  return xi;
}

struct SampleSet {
  Matrix xi;  // n x d
  Matrix x;   // n x d
  int grid;   // samples per direction
};

SampleSet sample_patch(const NurbsPatch& patch, int grid) {
  const int d = patch.dim();
  const int n = d == 1 ? grid : grid * grid;
  SampleSet s;
  s.grid = grid;
  s.xi.resize(n, d);
  s.x.resize(n, patch.phys_dim());
  int row = 0;
  for (int j = 0; j < (d == 2 ? grid : 1); ++j) {
    for (int i = 0; i < grid; ++i, ++row) {
      s.xi(row, 0) = static_cast<double>(i) / (grid - 1);
      if (d == 2) s.xi(row, 1) = static_cast<double>(j) / (grid - 1);
      s.x.row(row) = patch.map_forward(s.xi.row(row).transpose()).transpose();
    }
  }
  return s;
}

/// Nearest-sample lookup refined by a local least-squares affine fit over
/// the surrounding grid cell; exact for affine patches.
class LookupWarmStart : public WarmStart {
 public:
  LookupWarmStart(SampleSet samples, int dim) : s_(std::move(samples)), d_(dim) {}

  Vector predict(const Vector& x) const override {
    int best = 0;
    double best_d2 = 1e300;
    for (int r = 0; r < s_.x.rows(); ++r) {
      const double d2 = (s_.x.row(r).transpose() - x).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = r;
      }
    }
    const int g = s_.grid;
    const int i = best % g, j = d_ == 2 ? best / g : 0;
    const int i0 = std::min(i, g - 2);
    const int j0 = d_ == 2 ? std::min(j, g - 2) : 0;

    // Corners of the enclosing cell; fit xi ~ A x + b by least squares.
    const int nc = d_ == 1 ? 2 : 4;
    Matrix A(nc, d_ + 1);
    Matrix rhs(nc, d_);
    for (int c = 0; c < nc; ++c) {
      const int ci = i0 + (c & 1);
      const int cj = j0 + (c >> 1);
      const int row = ci + (d_ == 2 ? g * cj : 0);
      A.row(c).head(d_) = s_.x.row(row);
      A(c, d_) = 1.0;
      rhs.row(c) = s_.xi.row(row);
    }
    Matrix coef = A.colPivHouseholderQr().solve(rhs);
    Vector xi = coef.topRows(d_).transpose() * x + coef.row(d_).transpose();
    return clamp_unit(std::move(xi));
  }

 private:
  SampleSet s_;
  int d_;
};

/// One-hidden-layer sigmoid network x -> xi trained by full-batch Adam on
/// the mean-squared residual of the sample pairs. Deterministic seed.
class SigmoidWarmStart : public WarmStart {
 public:
  SigmoidWarmStart(const SampleSet& s, int dim) : d_(dim) {
    const int H = 24;
    const int n = static_cast<int>(s.x.rows());
    // Normalize inputs to [-1,1] for conditioning.
    x_lo_ = s.x.colwise().minCoeff();
    x_hi_ = s.x.colwise().maxCoeff();
    Matrix X(n, d_);
    for (int r = 0; r < n; ++r) X.row(r) = normalize(s.x.row(r).transpose()).transpose();

    std::mt19937 rng(12345);
    std::normal_distribution<double> nd(0.0, 0.5);
    W1_.resize(H, d_);
    b1_ = Vector::Zero(H);
    W2_.resize(d_, H);
    b2_ = Vector::Zero(d_);
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < d_; ++c) W1_(r, c) = nd(rng);
    for (int r = 0; r < d_; ++r)
      for (int c = 0; c < H; ++c) W2_(r, c) = nd(rng);

    // Adam state.
    auto zeros_like = [](const Matrix& m) { return Matrix::Zero(m.rows(), m.cols()).eval(); };
    Matrix mW1 = zeros_like(W1_), vW1 = zeros_like(W1_);
    Matrix mW2 = zeros_like(W2_), vW2 = zeros_like(W2_);
    Vector mb1 = Vector::Zero(H), vb1 = Vector::Zero(H);
    Vector mb2 = Vector::Zero(d_), vb2 = Vector::Zero(d_);
    const double lr = 0.02, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    for (int epoch = 1; epoch <= 3000; ++epoch) {
      Matrix Z1 = (X * W1_.transpose()).rowwise() + b1_.transpose();  // n x H
      Matrix A1 = Z1.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
      Matrix out = (A1 * W2_.transpose()).rowwise() + b2_.transpose();  // n x d
      Matrix err = out - s.xi;                                          // n x d
      Matrix dW2 = (2.0 / n) * err.transpose() * A1;
      Vector db2 = (2.0 / n) * err.colwise().sum().transpose();
      Matrix dA1 = err * W2_;  // n x H
      Matrix dZ1 = dA1.array() * (A1.array() * (1.0 - A1.array()));
      Matrix dW1 = (2.0 / n) * dZ1.transpose() * X;
      Vector db1 = (2.0 / n) * dZ1.colwise().sum().transpose();

      auto adam = [&](auto& p, auto& m, auto& v, const auto& g) {
        m = beta1 * m + (1 - beta1) * g;
        v = beta2 * v + (1 - beta2) * g.array().square().matrix();
        const double bc1 = 1 - std::pow(beta1, epoch);
        const double bc2 = 1 - std::pow(beta2, epoch);
        p.array() -= lr * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + eps);
      };
      adam(W1_, mW1, vW1, dW1);
      adam(b1_, mb1, vb1, db1);
      adam(W2_, mW2, vW2, dW2);
      adam(b2_, mb2, vb2, db2);
    }
  }

  Vector predict(const Vector& x) const override {
    Vector z1 = W1_ * normalize(x) + b1_;
    Vector a1 = z1.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    return clamp_unit(W2_ * a1 + b2_);
  }

 private:
  Vector normalize(const Vector& x) const {
    Vector out(d_);
    for (int m = 0; m < d_; ++m) {
      const double span = std::max(x_hi_(m) - x_lo_(m), 1e-30);
      out(m) = 2.0 * (x(m) - x_lo_(m)) / span - 1.0;
    }
    return out;
  }

  int d_;
  Vector x_lo_, x_hi_;
  Matrix W1_, W2_;
  Vector b1_, b2_;
};

}  // namespace

std::unique_ptr<WarmStart> train_warm_start(const NurbsPatch& patch,
                                            const InverseMapConfig& config) {
  if (config.warm_start == WarmStartKind::None) return nullptr;
  if (config.sample_grid < 2)
    throw ConstructionError("train_warm_start: sample_grid must be >= 2");
  SampleSet samples = sample_patch(patch, config.sample_grid);
  if (config.warm_start == WarmStartKind::Sigmoid)
    return std::make_unique<SigmoidWarmStart>(samples, patch.dim());
  return std::make_unique<LookupWarmStart>(std::move(samples), patch.dim());
}

Vector invert_point(const NurbsPatch& patch, const Vector& x,
                    const InverseMapConfig& config, const Vector* xi0,
                    const WarmStart* warm) {
  const int d = patch.dim();
  if (x.size() != patch.phys_dim())
    throw DomainError("invert_point: wrong physical dimension");

  Vector xi;
  if (xi0)
    xi = clamp_unit(*xi0);
  else if (warm)
    xi = warm->predict(x);
  else
    xi = Vector::Constant(d, 0.5);

  Vector r = patch.map_forward(xi) - x;
  double rn = r.norm();
  double best = rn;

  for (int it = 0; it < config.max_iterations; ++it) {
    if (rn < config.tolerance) return xi;
    const auto jac = patch.jacobian(xi);
    Vector step;
    if (jac.J.rows() == jac.J.cols()) {
      step = jac.J.fullPivLu().solve(-r);
    } else {
      step = jac.J.colPivHouseholderQr().solve(-r);
    }
    // Damped line search with box projection.
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < 20; ++h, alpha *= 0.5) {
      Vector trial = clamp_unit(xi + alpha * step);
      Vector rt = patch.map_forward(trial) - x;
      if (rt.norm() < rn) {
        xi = std::move(trial);
        r = std::move(rt);
        rn = r.norm();
        accepted = true;
        break;
      }
    }
    best = std::min(best, rn);
    if (!accepted) break;  // stagnated
  }
  if (rn < config.tolerance) return xi;

  std::ostringstream msg;
  msg << "invert_point: no convergence, best residual " << best
      << " (point may be outside the patch image)";
  throw InversionError(msg.str(), best);
}

Matrix invert_mesh(const NurbsPatch& patch, const Matrix& physical_nodes,
                   const InverseMapConfig& config) {
  const int n = static_cast<int>(physical_nodes.rows());
  Matrix out(n, patch.dim());
  if (n == 0) return out;
  std::unique_ptr<WarmStart> warm = train_warm_start(patch, config);

  std::ostringstream failures;
  int nfail = 0;
  for (int i = 0; i < n; ++i) {
    try {
      out.row(i) = invert_point(patch, physical_nodes.row(i).transpose(), config,
                                nullptr, warm.get())
                       .transpose();
    } catch (const InversionError& e) {
      if (nfail < 10) failures << " node " << i << " (residual " << e.best_residual << ")";
      ++nfail;
    }
  }
  if (nfail > 0) {
    std::ostringstream msg;
    msg << "invert_mesh: " << nfail << " node(s) failed:" << failures.str();
    throw InversionError(msg.str(), 0.0);
  }
  return out;
}

}  // namespace ciga
