#ifndef CIGA_NURBS_PATCH_HPP
#define CIGA_NURBS_PATCH_HPP

#include <optional>
#include <vector>

#include "ciga/knot_vector.hpp"
#include "ciga/types.hpp"

namespace ciga {

enum class PatchKind { BSpline, Nurbs };

/// Control grid paired with one knot vector per parametric direction.
/// Points are stored row-major over the grid: index = i + n1 * j
/// (i along direction 0, j along direction 1). Weights must be positive.
class ControlNet {
 public:
  ControlNet(std::vector<int> grid_dims, Matrix points, Vector weights);

  int dim() const { return static_cast<int>(grid_dims_.size()); }
  int count() const { return static_cast<int>(points_.rows()); }
  int grid_dim(int m) const { return grid_dims_[m]; }
  int phys_dim() const { return static_cast<int>(points_.cols()); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  int flat_index(int i, int j) const { return i + grid_dims_[0] * j; }

 private:
  std::vector<int> grid_dims_;
  Matrix points_;   // count x phys_dim
  Vector weights_;  // count
};

/// Values and first derivatives of all nonzero rational (or B-spline)
/// basis functions at a parametric point, plus the weighting function.
struct NurbsBasisSpan {
  std::vector<int> flat_indices;  // control-net indices of nonzero bases
  Vector values;                  // rational basis values
  Matrix gradients;               // count x d, d/dxi_m
  double weight_fn = 1.0;         // W(xi)
  Eigen::RowVectorXd weight_grad; // dW/dxi (size d)
};

/// A single spline-parameterized subdomain: knot vectors, control net, and
/// the forward geometric mapping with its Jacobian. Immutable after
/// construction; evaluation is pure and thread-safe.
struct PatchOptions {
  double bijectivity_delta = 1e-8;
  bool check_bijectivity = true;
};

class NurbsPatch {
 public:
  using Options = PatchOptions;

  NurbsPatch(int patch_id, std::vector<KnotVector> knot_vectors, ControlNet net,
             PatchKind kind, Options options = Options());

  int patch_id() const { return patch_id_; }
  int dim() const { return static_cast<int>(knot_vectors_.size()); }
  int phys_dim() const { return net_.phys_dim(); }
  PatchKind kind() const { return kind_; }
  const KnotVector& knot_vector(int m) const { return knot_vectors_[m]; }
  const ControlNet& net() const { return net_; }

  NurbsBasisSpan eval_nurbs_basis(const Vector& xi) const;

  /// x = sum_k R_k(xi) P_k.
  Vector map_forward(const Vector& xi) const;

  /// Jacobian dx/dxi (phys_dim x d) and its determinant (square case).
  struct JacobianResult {
    Matrix J;
    double det = 0.0;
  };
  JacobianResult jacobian(const Vector& xi) const;

  /// NURBS weighting function W(xi) and its gradient; identically 1 for
  /// B-spline patches.
  double weight_function(const Vector& xi) const;
  Eigen::RowVectorXd weight_gradient(const Vector& xi) const;

 private:
  void check_bijective(double delta) const;

  int patch_id_;
  std::vector<KnotVector> knot_vectors_;
  ControlNet net_;
  PatchKind kind_;
};

}  // namespace ciga

#endif
