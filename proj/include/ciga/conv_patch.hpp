#ifndef CIGA_CONV_PATCH_HPP
#define CIGA_CONV_PATCH_HPP

#include <Eigen/LU>
#include <functional>
#include <memory>
#include <vector>

#include "ciga/rbf.hpp"
#include "ciga/types.hpp"

namespace ciga {

/// Hyper-parameters of the convolution patch construction.
struct ConvSpec {
  int s = 2;                              // patch size (element layers)
  double a = 0.0;                         // dilation in units of local spacing; 0 means s+1
  int p = 2;                              // reproducing order
  RbfKind rbf_kind = RbfKind::CubicSpline;

  double dilation_units() const { return a > 0.0 ? a : static_cast<double>(s + 1); }
};

/// Basis functions reproduced by a convolution function set.
class ReproducingBasis {
 public:
  virtual ~ReproducingBasis() = default;
  virtual int size() const = 0;
  virtual Vector eval(const Vector& x) const = 0;
  /// size() x dim gradient.
  virtual Matrix grad(const Vector& x) const = 0;
};

/// Monomials in locally shifted/scaled coordinates. Tensor-product set
/// (each exponent up to p) or complete set (total order up to p).
class MonomialBasis : public ReproducingBasis {
 public:
  MonomialBasis(int dim, int order, bool tensor, const Vector& center,
                const Vector& scale);
  int size() const override { return static_cast<int>(exponents_.size()); }
  Vector eval(const Vector& x) const override;
  Matrix grad(const Vector& x) const override;

  /// Largest order whose basis has at most n_nodes entries (local order
  /// reduction for narrowed near-boundary patches).
  static int max_feasible_order(int dim, bool tensor, int requested_order,
                                int n_nodes);

 private:
  int dim_;
  std::vector<std::vector<int>> exponents_;
  Vector center_, scale_;
};

/// Scalar weight field with gradient, e.g. the NURBS weighting function
/// restricted to a patch's parametric domain.
struct WeightField {
  std::function<double(const Vector&)> value;
  std::function<Eigen::RowVectorXd(const Vector&)> gradient;

  static WeightField unit(int dim);
};

/// Base basis divided by a positive weight field: entries b_k(x) / w(x).
class WeightedBasis : public ReproducingBasis {
 public:
  WeightedBasis(std::shared_ptr<ReproducingBasis> base, WeightField weight);
  int size() const override { return base_->size(); }
  Vector eval(const Vector& x) const override;
  Matrix grad(const Vector& x) const override;

 private:
  std::shared_ptr<ReproducingBasis> base_;
  WeightField weight_;
};

/// Values and gradients of one node-centered convolution function set.
struct ConvEval {
  Vector values;    // n
  Matrix gradients; // n x dim
};

/// Convolution patch functions W_{s,a,p,K} over a fixed node set:
/// RBF part plus reproduced basis, coefficients from the symmetric
/// moment system. Kronecker delta at the nodes and exact reproduction
/// of every basis entry hold by construction.
class ConvFunctionSet {
 public:
  /// nodes: n x dim coordinates. a_eff: absolute support radius of the RBF.
  ConvFunctionSet(Matrix nodes, std::shared_ptr<const ReproducingBasis> basis,
                  RbfKind rbf, double a_eff, int center_label = -1);

  int count() const { return static_cast<int>(nodes_.rows()); }
  int dim() const { return static_cast<int>(nodes_.cols()); }
  const Matrix& nodes() const { return nodes_; }

  ConvEval eval(const Vector& x) const;

 private:
  Matrix nodes_;
  std::shared_ptr<const ReproducingBasis> basis_;
  RbfKind rbf_;
  double a_eff_;
  Eigen::FullPivLU<Matrix> lu_;  // of the assembled moment matrix G
};

/// build_conv_functions: assemble and factor the moment system for one
/// center node. Throws ConstructionError (naming center_label) when the
/// system is singular.
ConvFunctionSet build_conv_functions(const Matrix& nodes,
                                     std::shared_ptr<const ReproducingBasis> basis,
                                     const ConvSpec& spec, double a_eff = 0.0,
                                     int center_label = -1);

/// Largest nearest-neighbour spacing of a node set; the default absolute
/// dilation is spec.dilation_units() times this.
double local_spacing(const Matrix& nodes);

/// Separable 2D convolution functions built as a product of two 1D sets,
/// scaled by the weight ratio W(node)/W(query) (unit weight: plain product).
/// Used for convolution patches that touch a domain boundary: the product
/// structure makes every member's trace vanish on grid lines through the
/// other members' coordinates, so Dirichlet data imposed on boundary dofs
/// is exact. Reproduces (xi^q1 eta^q2)/W up to each factor's order.
class TensorConv2d {
 public:
  /// u: 1D set along axis 0, v: along axis 1, both over parametric
  /// coordinates with plain monomial bases.
  TensorConv2d(std::shared_ptr<const ConvFunctionSet> u,
               std::shared_ptr<const ConvFunctionSet> v, WeightField weight);

  int count() const { return u_->count() * v_->count(); }
  /// Member (m, n) flattens to m + u->count() * n (axis 0 fastest).
  ConvEval eval(const Vector& xi) const;

 private:
  std::shared_ptr<const ConvFunctionSet> u_, v_;
  WeightField weight_;
  Vector w_nodes_;  // W at the member coordinates
};

// ---------------------------------------------------------------------------
// Shared interface construction (G0 compatibility, 1D interface direction)
// ---------------------------------------------------------------------------

/// Query point data for a shared interface function set. All functions of
/// the query are parameterized by one independent variable t (the caller's
/// interface coordinate); derivative fields are with respect to t.
struct InterfaceQuery {
  Vector rbf_coord;     // coordinates used for RBF distances
  Vector d_rbf_coord;
  double xi_alpha = 0, d_xi_alpha = 1;  // side-alpha interface parameter
  double xi_beta = 0, d_xi_beta = 1;    // side-beta interface parameter
  double w_alpha = 1, dw_alpha = 0;     // trace weights W|_Gamma per side
  double w_beta = 1, dw_beta = 0;
};

/// One shared 1D convolution function set used by both patches along an
/// interface: reproduces the stacked weighted monomial bases
/// [1, xi_a, ..., xi_a^p]/w_a and [1, xi_b, ..., xi_b^p]/w_b
/// simultaneously, with duplicated rows dropped.
class SharedInterfaceConv {
 public:
  struct Nodes {
    Matrix rbf_coords;  // n x dr
    Vector xi_alpha, xi_beta;
    Vector w_alpha, w_beta;  // trace weights at the nodes
  };

  SharedInterfaceConv(Nodes nodes, const ConvSpec& spec, double a_eff = 0.0,
                      int center_label = -1);

  int count() const { return static_cast<int>(nodes_.rbf_coords.rows()); }
  int basis_count() const { return static_cast<int>(basis_rows_.size()); }
  const Nodes& nodes() const { return nodes_; }

  /// W values and dW/dt at the query point.
  ConvEval eval(const InterfaceQuery& q) const;

 private:
  struct BasisRow {
    int side;   // 0 = alpha, 1 = beta
    int power;  // monomial exponent
  };
  Vector basis_row_values(const InterfaceQuery& q, Vector* deriv) const;

  Nodes nodes_;
  std::vector<BasisRow> basis_rows_;
  double center_alpha_ = 0, scale_alpha_ = 1;
  double center_beta_ = 0, scale_beta_ = 1;
  RbfKind rbf_;
  double a_eff_;
  Eigen::FullPivLU<Matrix> lu_;
};

SharedInterfaceConv build_interface_conv_1d(SharedInterfaceConv::Nodes nodes,
                                            const ConvSpec& spec,
                                            double a_eff = 0.0,
                                            int center_label = -1);

// ---------------------------------------------------------------------------
// Product-rule 2D construction (Theorem-style tensor composition)
// ---------------------------------------------------------------------------

/// Callback bundle describing the interface-direction geometry seen from one
/// patch: correspondence to the neighbouring parameterization, RBF
/// coordinates, and trace weights, all as functions of this patch's
/// interface-direction parameter.
struct InterfaceChart {
  /// t (own side's interface parameter) -> the other side's parameter and
  /// its derivative.
  std::function<void(double, double&, double&)> to_beta;
  /// t -> (rbf coords, d/dt)
  std::function<void(double, Vector&, Vector&)> rbf_coord;
  /// t -> (w, dw/dt) for each side
  std::function<void(double, double&, double&)> trace_alpha;
  std::function<void(double, double&, double&)> trace_beta;

  /// Chart for matched parameterizations with unit traces (B-spline case or
  /// identical interface parameterizations).
  static InterfaceChart identity();

  InterfaceQuery query(double t, int own_side = 0) const;
};

/// 2D convolution functions W_{(m,n)}(xi, eta) built as
/// rho(node)/rho(query) * W_m(transverse) * W_n(interface direction),
/// where rho = W(xi,eta) / W|_Gamma. Satisfies Kronecker delta and
/// reproduces (xi^{q1} eta^{q2}) / W for q1,q2 = 0..p.
class ProductConv2d {
 public:
  /// own_side: 0 when this patch is the interface pair's alpha side,
  /// 1 for beta; selects the trace used in the rho scaling factor.
  ProductConv2d(std::shared_ptr<const ConvFunctionSet> transverse,
                std::shared_ptr<const SharedInterfaceConv> shared,
                InterfaceChart chart, int interface_axis, WeightField weight,
                int own_side = 0);

  /// Member layout: index = m + n_transverse * n_shared-ordering; see
  /// member_count/eval. Member (mt, ms) pairs transverse node mt with
  /// shared-direction node ms.
  int transverse_count() const { return transverse_->count(); }
  int shared_count() const { return shared_->count(); }
  int count() const { return transverse_count() * shared_count(); }

  /// xi: 2D parametric point of this patch. Returns values/gradients for
  /// all (mt, ms) members, flattened as mt + transverse_count()*ms.
  ConvEval eval(const Vector& xi) const;

  /// Parametric coordinates of member (mt, ms).
  Vector member_coord(int mt, int ms) const;

 private:
  void own_trace(double t, double& w, double& dw) const;

  std::shared_ptr<const ConvFunctionSet> transverse_;
  std::shared_ptr<const SharedInterfaceConv> shared_;
  InterfaceChart chart_;
  int interface_axis_;  // which parametric axis runs along the interface
  WeightField weight_;
  int own_side_;
  Vector rho_at_nodes_;  // rho(node) per flattened member
};

}  // namespace ciga

#endif
