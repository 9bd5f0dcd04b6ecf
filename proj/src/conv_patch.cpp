#include "ciga/conv_patch.hpp"

#include <cmath>
#include <limits>

namespace ciga {

// ---------------------------------------------------------------------------
// MonomialBasis
// ---------------------------------------------------------------------------

MonomialBasis::MonomialBasis(int dim, int order, bool tensor,
                             const Vector& center, const Vector& scale)
    : dim_(dim), center_(center), scale_(scale) {
  if (dim == 1) {
    for (int q = 0; q <= order; ++q) exponents_.push_back({q});
  } else if (dim == 2) {
    for (int q2 = 0; q2 <= order; ++q2)
      for (int q1 = 0; q1 <= order; ++q1)
        if (tensor || q1 + q2 <= order) exponents_.push_back({q1, q2});
  } else {
    throw ConstructionError("monomial basis: dim must be 1 or 2");
  }
  for (int m = 0; m < dim; ++m)
    if (scale_(m) <= 0.0) scale_(m) = 1.0;
}

Vector MonomialBasis::eval(const Vector& x) const {
  Vector t = (x - center_).cwiseQuotient(scale_);
  Vector out(size());
  for (int k = 0; k < size(); ++k) {
    double v = 1.0;
    for (int m = 0; m < dim_; ++m) v *= std::pow(t(m), exponents_[k][m]);
    out(k) = v;
  }
  return out;
}

Matrix MonomialBasis::grad(const Vector& x) const {
  Vector t = (x - center_).cwiseQuotient(scale_);
  Matrix out(size(), dim_);
  for (int k = 0; k < size(); ++k) {
    for (int m = 0; m < dim_; ++m) {
      const int e = exponents_[k][m];
      double v = (e == 0) ? 0.0 : e * std::pow(t(m), e - 1) / scale_(m);
      for (int o = 0; o < dim_; ++o)
        if (o != m) v *= std::pow(t(o), exponents_[k][o]);
      out(k, m) = v;
    }
  }
  return out;
}

int MonomialBasis::max_feasible_order(int dim, bool tensor, int requested_order,
                                      int n_nodes) {
  auto basis_size = [&](int p) {
    if (dim == 1) return p + 1;
    return tensor ? (p + 1) * (p + 1) : (p + 1) * (p + 2) / 2;
  };
  int p = requested_order;
  while (p > 0 && basis_size(p) > n_nodes) --p;
  return p;
}

// ---------------------------------------------------------------------------
// WeightField / WeightedBasis
// ---------------------------------------------------------------------------

WeightField WeightField::unit(int dim) {
  WeightField w;
  w.value = [](const Vector&) { return 1.0; };
  w.gradient = [dim](const Vector&) { return Eigen::RowVectorXd::Zero(dim); };
  return w;
}

WeightedBasis::WeightedBasis(std::shared_ptr<ReproducingBasis> base,
                             WeightField weight)
    : base_(std::move(base)), weight_(std::move(weight)) {}

Vector WeightedBasis::eval(const Vector& x) const {
  return base_->eval(x) / weight_.value(x);
}

Matrix WeightedBasis::grad(const Vector& x) const {
  const double w = weight_.value(x);
  const Eigen::RowVectorXd dw = weight_.gradient(x);
  const Vector b = base_->eval(x);
  return base_->grad(x) / w - b * dw / (w * w);
}

// ---------------------------------------------------------------------------
// ConvFunctionSet
// ---------------------------------------------------------------------------

double local_spacing(const Matrix& nodes) {
  const int n = static_cast<int>(nodes.rows());
  if (n < 2) return 1.0;
  double h = 0.0;
  for (int i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      nearest = std::min(nearest, (nodes.row(i) - nodes.row(j)).norm());
    }
    h = std::max(h, nearest);
  }
  return h;
}

ConvFunctionSet::ConvFunctionSet(Matrix nodes,
                                 std::shared_ptr<const ReproducingBasis> basis,
                                 RbfKind rbf, double a_eff, int center_label)
    : nodes_(std::move(nodes)), basis_(std::move(basis)), rbf_(rbf), a_eff_(a_eff) {
  const int n = count();
  const int m = basis_->size();
  if (n < m)
    throw ConstructionError("conv patch (center " + std::to_string(center_label) +
                            "): node count below basis count");
  if (n > 1 && a_eff_ < (1.0 - 1e-12) * local_spacing(nodes_))
    throw ConstructionError(
        "conv patch (center " + std::to_string(center_label) +
        "): dilation too small, RBF support misses neighboring nodes");
  Matrix G = Matrix::Zero(n + m, n + m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      G(i, j) = rbf_eval(rbf_, (nodes_.row(i) - nodes_.row(j)).norm(), a_eff_, 0);
  for (int i = 0; i < n; ++i) {
    const Vector P = basis_->eval(nodes_.row(i).transpose());
    G.block(i, n, 1, m) = P.transpose();
    G.block(n, i, m, 1) = P;
  }
  lu_.compute(G);
  if (!lu_.isInvertible())
    throw ConstructionError("conv patch (center " + std::to_string(center_label) +
                            "): singular moment matrix");
}

ConvEval ConvFunctionSet::eval(const Vector& x) const {
  const int n = count();
  const int m = basis_->size();
  const int d = dim();
  Matrix rhs(n + m, 1 + d);
  for (int j = 0; j < n; ++j) {
    const Vector diff = x - nodes_.row(j).transpose();
    const double r = diff.norm();
    rhs(j, 0) = rbf_eval(rbf_, r, a_eff_, 0);
    if (r > 1e-300) {
      const double dr = rbf_eval(rbf_, r, a_eff_, 1);
      rhs.block(j, 1, 1, d) = (dr / r) * diff.transpose();
    } else {
      rhs.block(j, 1, 1, d).setZero();
    }
  }
  rhs.block(n, 0, m, 1) = basis_->eval(x);
  rhs.block(n, 1, m, d) = basis_->grad(x);

  const Matrix sol = lu_.solve(rhs);  // G symmetric, so W^T = G^{-1} rhs
  ConvEval out;
  out.values = sol.col(0).head(n);
  out.gradients = sol.block(0, 1, n, d);
  return out;
}

ConvFunctionSet build_conv_functions(const Matrix& nodes,
                                     std::shared_ptr<const ReproducingBasis> basis,
                                     const ConvSpec& spec, double a_eff,
                                     int center_label) {
  if (a_eff <= 0.0) a_eff = spec.dilation_units() * local_spacing(nodes);
  return ConvFunctionSet(nodes, std::move(basis), spec.rbf_kind, a_eff,
                         center_label);
}

// ---------------------------------------------------------------------------
// TensorConv2d
// ---------------------------------------------------------------------------

TensorConv2d::TensorConv2d(std::shared_ptr<const ConvFunctionSet> u,
                           std::shared_ptr<const ConvFunctionSet> v,
                           WeightField weight)
    : u_(std::move(u)), v_(std::move(v)), weight_(std::move(weight)) {
  if (u_->dim() != 1 || v_->dim() != 1)
    throw ConstructionError("tensor conv: factors must be 1D function sets");
  const int nu = u_->count(), nv = v_->count();
  w_nodes_.resize(nu * nv);
  Vector xi(2);
  for (int n = 0; n < nv; ++n)
    for (int m = 0; m < nu; ++m) {
      xi << u_->nodes()(m, 0), v_->nodes()(n, 0);
      w_nodes_(m + nu * n) = weight_.value(xi);
    }
}

ConvEval TensorConv2d::eval(const Vector& xi) const {
  const int nu = u_->count(), nv = v_->count();
  Vector x0(1), x1(1);
  x0 << xi(0);
  x1 << xi(1);
  const ConvEval eu = u_->eval(x0);
  const ConvEval ev = v_->eval(x1);
  const double w = weight_.value(xi);
  const Eigen::RowVectorXd gw = weight_.gradient(xi);

  ConvEval out;
  out.values.resize(nu * nv);
  out.gradients.resize(nu * nv, 2);
  for (int n = 0; n < nv; ++n)
    for (int m = 0; m < nu; ++m) {
      const int k = m + nu * n;
      const double c = w_nodes_(k) / w;
      const double prod = eu.values(m) * ev.values(n);
      out.values(k) = c * prod;
      out.gradients(k, 0) =
          c * (eu.gradients(m, 0) * ev.values(n) - prod * gw(0) / w);
      out.gradients(k, 1) =
          c * (eu.values(m) * ev.gradients(n, 0) - prod * gw(1) / w);
    }
  return out;
}

// ---------------------------------------------------------------------------
// SharedInterfaceConv
// ---------------------------------------------------------------------------

SharedInterfaceConv::SharedInterfaceConv(Nodes nodes, const ConvSpec& spec,
                                         double a_eff, int center_label)
    : nodes_(std::move(nodes)), rbf_(spec.rbf_kind), a_eff_(a_eff) {
  const int n = count();
  if (nodes_.xi_alpha.size() != n || nodes_.xi_beta.size() != n ||
      nodes_.w_alpha.size() != n || nodes_.w_beta.size() != n)
    throw ConstructionError("interface conv: inconsistent node arrays");
  if (a_eff_ <= 0.0)
    a_eff_ = spec.dilation_units() * local_spacing(nodes_.rbf_coords);

  center_alpha_ = 0.5 * (nodes_.xi_alpha.minCoeff() + nodes_.xi_alpha.maxCoeff());
  scale_alpha_ = std::max(0.5 * (nodes_.xi_alpha.maxCoeff() - nodes_.xi_alpha.minCoeff()), 1e-12);
  center_beta_ = 0.5 * (nodes_.xi_beta.minCoeff() + nodes_.xi_beta.maxCoeff());
  scale_beta_ = std::max(0.5 * (nodes_.xi_beta.maxCoeff() - nodes_.xi_beta.minCoeff()), 1e-12);

  // Stack both sides' weighted monomials, dropping side-beta rows that
  // coincide with the matching side-alpha row at all nodes.
  auto row_at_nodes = [&](int side, int q) {
    Vector v(n);
    for (int i = 0; i < n; ++i) {
      const double t = (side == 0)
                           ? (nodes_.xi_alpha(i) - center_alpha_) / scale_alpha_
                           : (nodes_.xi_beta(i) - center_beta_) / scale_beta_;
      const double w = (side == 0) ? nodes_.w_alpha(i) : nodes_.w_beta(i);
      v(i) = std::pow(t, q) / w;
    }
    return v;
  };
  // Side-beta rows that are linearly dependent on the rows already kept
  // (identical parameterizations, or polynomial traces making e.g.
  // 1 = w/w expressible through the weighted side) are dropped to keep
  // the moment system nonsingular.
  std::vector<Vector> kept;
  auto keep_if_independent = [&](int side, int q, bool force) {
    Vector v = row_at_nodes(side, q);
    const double norm0 = v.norm();
    Vector r = v;
    for (const Vector& u : kept) r -= u.dot(r) * u;
    // Second orthogonalization pass for numerical safety.
    for (const Vector& u : kept) r -= u.dot(r) * u;
    if (!force && r.norm() <= 1e-10 * std::max(norm0, 1.0)) return;
    basis_rows_.push_back({side, q});
    if (r.norm() > 1e-300) kept.push_back(r / r.norm());
  };
  // Near-boundary order reduction: a clamped range with few nodes cannot
  // reproduce the full order p.
  const int pmax = std::min(spec.p, n - 1);
  for (int q = 0; q <= pmax; ++q) keep_if_independent(0, q, true);
  for (int q = 0; q <= pmax; ++q) keep_if_independent(1, q, false);
  // Fill up to a full-rank basis with higher-order rows: when the basis
  // count reaches the node count the radial coefficients vanish and the
  // set becomes polynomial (Lagrange) in the stacked span.
  for (int q = pmax + 1; q < n && basis_count() < n; ++q) {
    keep_if_independent(0, q, false);
    if (basis_count() < n) keep_if_independent(1, q, false);
  }
  const int m = basis_count();
  if (n < m)
    throw ConstructionError(
        "interface conv (center " + std::to_string(center_label) +
        "): stacked basis larger than node count; increase patch size s");

  Matrix G = Matrix::Zero(n + m, n + m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      G(i, j) = rbf_eval(rbf_,
                         (nodes_.rbf_coords.row(i) - nodes_.rbf_coords.row(j)).norm(),
                         a_eff_, 0);
  for (int k = 0; k < m; ++k) {
    const Vector row = row_at_nodes(basis_rows_[k].side, basis_rows_[k].power);
    G.block(0, n + k, n, 1) = row;
    G.block(n + k, 0, 1, n) = row.transpose();
  }
  lu_.compute(G);
  if (!lu_.isInvertible())
    throw ConstructionError("interface conv (center " +
                            std::to_string(center_label) +
                            "): singular stacked moment matrix");
}

Vector SharedInterfaceConv::basis_row_values(const InterfaceQuery& q,
                                             Vector* deriv) const {
  const int m = basis_count();
  Vector v(m);
  if (deriv) deriv->resize(m);
  for (int k = 0; k < m; ++k) {
    const auto& row = basis_rows_[k];
    const double xi = (row.side == 0) ? q.xi_alpha : q.xi_beta;
    const double dxi = (row.side == 0) ? q.d_xi_alpha : q.d_xi_beta;
    const double w = (row.side == 0) ? q.w_alpha : q.w_beta;
    const double dw = (row.side == 0) ? q.dw_alpha : q.dw_beta;
    const double c = (row.side == 0) ? center_alpha_ : center_beta_;
    const double sc = (row.side == 0) ? scale_alpha_ : scale_beta_;
    const double t = (xi - c) / sc;
    const double mono = std::pow(t, row.power);
    const double dmono =
        (row.power == 0) ? 0.0 : row.power * std::pow(t, row.power - 1) / sc * dxi;
    v(k) = mono / w;
    if (deriv) (*deriv)(k) = dmono / w - mono * dw / (w * w);
  }
  return v;
}

ConvEval SharedInterfaceConv::eval(const InterfaceQuery& q) const {
  const int n = count();
  const int m = basis_count();
  Matrix rhs(n + m, 2);
  for (int j = 0; j < n; ++j) {
    const Vector diff = q.rbf_coord - nodes_.rbf_coords.row(j).transpose();
    const double r = diff.norm();
    rhs(j, 0) = rbf_eval(rbf_, r, a_eff_, 0);
    if (r > 1e-300) {
      const double dr = rbf_eval(rbf_, r, a_eff_, 1);
      rhs(j, 1) = (dr / r) * diff.dot(q.d_rbf_coord);
    } else {
      rhs(j, 1) = 0.0;
    }
  }
  Vector dP;
  rhs.block(n, 0, m, 1) = basis_row_values(q, &dP);
  rhs.block(n, 1, m, 1) = dP;

  const Matrix sol = lu_.solve(rhs);
  ConvEval out;
  out.values = sol.col(0).head(n);
  out.gradients = sol.col(1).head(n);
  return out;
}

SharedInterfaceConv build_interface_conv_1d(SharedInterfaceConv::Nodes nodes,
                                            const ConvSpec& spec, double a_eff,
                                            int center_label) {
  return SharedInterfaceConv(std::move(nodes), spec, a_eff, center_label);
}

// ---------------------------------------------------------------------------
// ProductConv2d
// ---------------------------------------------------------------------------

InterfaceChart InterfaceChart::identity() {
  InterfaceChart c;
  c.to_beta = [](double t, double& xb, double& dxb) {
    xb = t;
    dxb = 1.0;
  };
  c.rbf_coord = [](double t, Vector& x, Vector& dx) {
    x = Vector::Constant(1, t);
    dx = Vector::Constant(1, 1.0);
  };
  c.trace_alpha = [](double, double& w, double& dw) {
    w = 1.0;
    dw = 0.0;
  };
  c.trace_beta = c.trace_alpha;
  return c;
}

InterfaceQuery InterfaceChart::query(double t, int own_side) const {
  InterfaceQuery q;
  if (own_side == 0) {
    q.xi_alpha = t;
    q.d_xi_alpha = 1.0;
    to_beta(t, q.xi_beta, q.d_xi_beta);
  } else {
    q.xi_beta = t;
    q.d_xi_beta = 1.0;
    to_beta(t, q.xi_alpha, q.d_xi_alpha);
  }
  rbf_coord(t, q.rbf_coord, q.d_rbf_coord);
  trace_alpha(t, q.w_alpha, q.dw_alpha);
  trace_beta(t, q.w_beta, q.dw_beta);
  return q;
}

ProductConv2d::ProductConv2d(std::shared_ptr<const ConvFunctionSet> transverse,
                             std::shared_ptr<const SharedInterfaceConv> shared,
                             InterfaceChart chart, int interface_axis,
                             WeightField weight, int own_side)
    : transverse_(std::move(transverse)),
      shared_(std::move(shared)),
      chart_(std::move(chart)),
      interface_axis_(interface_axis),
      weight_(std::move(weight)),
      own_side_(own_side) {
  if (transverse_->dim() != 1)
    throw ConstructionError("product conv: transverse set must be 1D");
  rho_at_nodes_.resize(count());
  for (int ms = 0; ms < shared_count(); ++ms) {
    const double t = own_side_ == 0 ? shared_->nodes().xi_alpha(ms)
                                    : shared_->nodes().xi_beta(ms);
    double tr, dtr;
    own_trace(t, tr, dtr);
    for (int mt = 0; mt < transverse_count(); ++mt) {
      const Vector xi = member_coord(mt, ms);
      rho_at_nodes_(mt + transverse_count() * ms) = weight_.value(xi) / tr;
    }
  }
}

void ProductConv2d::own_trace(double t, double& w, double& dw) const {
  if (own_side_ == 0)
    chart_.trace_alpha(t, w, dw);
  else
    chart_.trace_beta(t, w, dw);
}

Vector ProductConv2d::member_coord(int mt, int ms) const {
  Vector xi(2);
  xi(interface_axis_) = own_side_ == 0 ? shared_->nodes().xi_alpha(ms)
                                       : shared_->nodes().xi_beta(ms);
  xi(1 - interface_axis_) = transverse_->nodes()(mt, 0);
  return xi;
}

ConvEval ProductConv2d::eval(const Vector& xi) const {
  const double t_int = xi(interface_axis_);
  const double t_tr = xi(1 - interface_axis_);

  const ConvEval Wt = transverse_->eval(Vector::Constant(1, t_tr));
  const ConvEval Ws = shared_->eval(chart_.query(t_int, own_side_));

  double tr, dtr;
  own_trace(t_int, tr, dtr);
  const double wq = weight_.value(xi);
  const Eigen::RowVectorXd gw = weight_.gradient(xi);
  const double rho = wq / tr;
  // d rho / d (interface axis), d rho / d (transverse axis)
  const double drho_int = (gw(interface_axis_) * tr - wq * dtr) / (tr * tr);
  const double drho_tr = gw(1 - interface_axis_) / tr;
  const double inv_rho = 1.0 / rho;

  ConvEval out;
  out.values.resize(count());
  out.gradients.resize(count(), 2);
  for (int ms = 0; ms < shared_count(); ++ms)
    for (int mt = 0; mt < transverse_count(); ++mt) {
      const int k = mt + transverse_count() * ms;
      const double rn = rho_at_nodes_(k);
      const double prod = Wt.values(mt) * Ws.values(ms);
      out.values(k) = rn * inv_rho * prod;
      const double d_int = rn * (-drho_int * inv_rho * inv_rho * prod +
                                 inv_rho * Wt.values(mt) * Ws.gradients(ms, 0));
      const double d_tr = rn * (-drho_tr * inv_rho * inv_rho * prod +
                                inv_rho * Wt.gradients(mt, 0) * Ws.values(ms));
      out.gradients(k, interface_axis_) = d_int;
      out.gradients(k, 1 - interface_axis_) = d_tr;
    }
  return out;
}

}  // namespace ciga
