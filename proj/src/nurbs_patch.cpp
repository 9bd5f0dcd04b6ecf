#include "ciga/nurbs_patch.hpp"

#include <Eigen/LU>
#include <cmath>

namespace ciga {

ControlNet::ControlNet(std::vector<int> grid_dims, Matrix points, Vector weights)
    : grid_dims_(std::move(grid_dims)),
      points_(std::move(points)),
      weights_(std::move(weights)) {
  long expected = 1;
  for (int n : grid_dims_) expected *= n;
  if (points_.rows() != expected || weights_.size() != expected)
    throw ConstructionError("control net: grid dims do not match point count");
  if ((weights_.array() <= 0.0).any())
    throw ConstructionError("control net: weights must be strictly positive");
}

NurbsPatch::NurbsPatch(int patch_id, std::vector<KnotVector> knot_vectors,
                       ControlNet net, PatchKind kind, Options options)
    : patch_id_(patch_id),
      knot_vectors_(std::move(knot_vectors)),
      net_(std::move(net)),
      kind_(kind) {
  const int d = dim();
  if (d < 1 || d > 2) throw ConstructionError("patch: dimension must be 1 or 2");
  if (net_.dim() != d)
    throw ConstructionError("patch: control net dimension mismatch");
  for (int m = 0; m < d; ++m)
    if (net_.grid_dim(m) != knot_vectors_[m].basis_count())
      throw ConstructionError("patch: grid dims must match basis counts");
  if (options.check_bijectivity) check_bijective(options.bijectivity_delta);
}

NurbsBasisSpan NurbsPatch::eval_nurbs_basis(const Vector& xi) const {
  const int d = dim();
  if (xi.size() != d) throw DomainError("eval_nurbs_basis: bad point dimension");
  for (int m = 0; m < d; ++m)
    if (xi(m) < 0.0 || xi(m) > 1.0)
      throw DomainError("eval_nurbs_basis: point outside [0,1]^d");

  std::vector<BasisSpan> uni(d);
  for (int m = 0; m < d; ++m) uni[m] = eval_basis(knot_vectors_[m], xi(m), 1);

  NurbsBasisSpan out;
  const int p0 = knot_vectors_[0].degree();
  const int count = (d == 1) ? p0 + 1 : (p0 + 1) * (knot_vectors_[1].degree() + 1);
  out.flat_indices.resize(count);
  Vector bs(count);       // tensor B-spline values
  Matrix bs_grad(count, d);

  if (d == 1) {
    for (int a = 0; a <= p0; ++a) {
      out.flat_indices[a] = uni[0].first_index + a;
      bs(a) = uni[0].values(0, a);
      bs_grad(a, 0) = uni[0].values(1, a);
    }
  } else {
    const int p1 = knot_vectors_[1].degree();
    int c = 0;
    for (int b = 0; b <= p1; ++b)
      for (int a = 0; a <= p0; ++a, ++c) {
        out.flat_indices[c] =
            net_.flat_index(uni[0].first_index + a, uni[1].first_index + b);
        bs(c) = uni[0].values(0, a) * uni[1].values(0, b);
        bs_grad(c, 0) = uni[0].values(1, a) * uni[1].values(0, b);
        bs_grad(c, 1) = uni[0].values(0, a) * uni[1].values(1, b);
      }
  }

  if (kind_ == PatchKind::BSpline) {
    out.values = bs;
    out.gradients = bs_grad;
    out.weight_fn = 1.0;
    out.weight_grad = Eigen::RowVectorXd::Zero(d);
    return out;
  }

  // Rational basis: R_k = B_k w_k / W with W = sum B_k w_k over the span.
  Vector wk(count);
  for (int c = 0; c < count; ++c) wk(c) = net_.weights()(out.flat_indices[c]);
  const double W = bs.dot(wk);
  if (W <= 0.0)
    throw ConstructionError("eval_nurbs_basis: non-positive weighting function");
  Eigen::RowVectorXd dW = (bs_grad.transpose() * wk).transpose();

  out.values = bs.cwiseProduct(wk) / W;
  out.gradients.resize(count, d);
  for (int c = 0; c < count; ++c)
    out.gradients.row(c) =
        wk(c) * (bs_grad.row(c) / W - bs(c) / (W * W) * dW);
  out.weight_fn = W;
  out.weight_grad = dW;
  return out;
}

Vector NurbsPatch::map_forward(const Vector& xi) const {
  const auto basis = eval_nurbs_basis(xi);
  Vector x = Vector::Zero(phys_dim());
  for (size_t c = 0; c < basis.flat_indices.size(); ++c)
    x += basis.values(c) * net_.points().row(basis.flat_indices[c]).transpose();
  return x;
}

NurbsPatch::JacobianResult NurbsPatch::jacobian(const Vector& xi) const {
  const auto basis = eval_nurbs_basis(xi);
  JacobianResult r;
  r.J = Matrix::Zero(phys_dim(), dim());
  for (size_t c = 0; c < basis.flat_indices.size(); ++c)
    r.J += net_.points().row(basis.flat_indices[c]).transpose() *
           basis.gradients.row(c);
  r.det = (r.J.rows() == r.J.cols()) ? r.J.determinant() : 0.0;
  return r;
}

double NurbsPatch::weight_function(const Vector& xi) const {
  if (kind_ == PatchKind::BSpline) return 1.0;
  return eval_nurbs_basis(xi).weight_fn;
}

Eigen::RowVectorXd NurbsPatch::weight_gradient(const Vector& xi) const {
  if (kind_ == PatchKind::BSpline) return Eigen::RowVectorXd::Zero(dim());
  return eval_nurbs_basis(xi).weight_grad;
}

void NurbsPatch::check_bijective(double delta) const {
  const int d = dim();
  if (phys_dim() != d) return;  // curves in the plane are not checked
  std::vector<std::vector<double>> samples(d);
  for (int m = 0; m < d; ++m) {
    const auto bp = knot_vectors_[m].breakpoints();
    const int per_span = 4 * knot_vectors_[m].degree() + 1;
    for (size_t s = 0; s + 1 < bp.size(); ++s)
      for (int q = 0; q < per_span; ++q)
        samples[m].push_back(bp[s] + (bp[s + 1] - bp[s]) * q / (per_span - 1.0));
  }
  Vector xi(d);
  if (d == 1) {
    for (double s0 : samples[0]) {
      xi(0) = s0;
      if (std::abs(jacobian(xi).det) <= delta)
        throw ConstructionError("patch: bijectivity violation (|det J| <= delta)");
    }
  } else {
    for (double s1 : samples[1])
      for (double s0 : samples[0]) {
        xi(0) = s0;
        xi(1) = s1;
        if (std::abs(jacobian(xi).det) <= delta)
          throw ConstructionError(
              "patch: bijectivity violation (|det J| <= delta)");
      }
  }
}

}  // namespace ciga
