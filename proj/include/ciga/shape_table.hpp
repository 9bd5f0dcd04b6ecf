#ifndef CIGA_SHAPE_TABLE_HPP
#define CIGA_SHAPE_TABLE_HPP

#include <map>
#include <memory>
#include <vector>

#include "ciga/conv_patch.hpp"
#include "ciga/mesh.hpp"

namespace ciga {

enum class CompatMode { Nodal, G0, Penalty };

/// Shape-function data at one parametric point of one element.
struct ShapeEval {
  int element = 0;
  std::vector<int> global_ids;  // node ids of the elemental patch set
  Vector values;
  Matrix grad_param;  // n x d, d/dxi
  Matrix grad_phys;   // n x d, d/dx (via the exact geometric Jacobian)
  Vector x;           // physical point F(xi)
  Matrix J;           // dx/dxi
  double det = 0.0;
};

/// Composite shape functions: linear/bilinear FEM base layer convolved
/// with node-centered convolution patch functions,
///   N~_J(xi) = sum_I N_I(xi) W^{xi_I}_J(xi).
/// In G0 mode, nodes within s layers of a patch interface use the
/// product-rule construction with interface-direction function sets
/// shared between the two patches, which makes traces coincide. s = 0
/// degenerates to the plain FEM base layer.
///
/// The reproduced basis per node set is the tensor monomial set of order
/// min(p, feasible); on NURBS patches with p >= the spline degree the
/// basis is divided by the weighting function, which makes the composite
/// interpolation reproduce the rational geometry map exactly.
class ShapeTable {
 public:
  ShapeTable(const MultiPatchMesh& mesh, const InterfaceSet& interfaces,
             const ConvPatchIndex& index, ConvSpec spec, CompatMode mode);

  const MultiPatchMesh& mesh() const { return mesh_; }
  const ConvSpec& spec() const { return spec_; }
  CompatMode mode() const { return mode_; }

  /// xi is in the patch parametric domain and must lie inside the element.
  ShapeEval eval(int element, const Vector& xi) const;

  /// Locates the containing element on the patch grid, then evaluates.
  ShapeEval eval_at(int patch, const Vector& xi) const;

  int element_index(int patch, const Vector& xi) const;

 private:
  struct NodeEvaluator {
    int block_key = 0;
    int iface_axis = 0;  // product mode: axis along the interface
    const NodePatchRange* range = nullptr;
    std::unique_ptr<ConvFunctionSet> ordinary;
    std::unique_ptr<TensorConv2d> tensor;  // boundary-touching patches
    std::unique_ptr<ProductConv2d> product;
  };

  const NodeEvaluator& node_eval(int patch, int flat, int block_key) const;
  void build_patch(int patch, const InterfaceSet& interfaces,
                   const ConvPatchIndex& index);

  const MultiPatchMesh& mesh_;
  ConvSpec spec_;
  CompatMode mode_;
  std::vector<bool> weighted_basis_;  // per patch
  std::vector<std::vector<std::vector<NodeEvaluator>>> evals_;
  std::vector<std::vector<int>> element_of_cell_;  // [patch][cell flat]
  // Shared interface-direction sets, keyed by (pair, node range).
  std::map<long, std::shared_ptr<const SharedInterfaceConv>> shared_cache_;
};

/// Max over sample_count pseudo-random parametric points of
/// || sum_J N~_J(xi) x_J  -  F(xi) ||  (geometric consistency).
double geometric_consistency_check(const ShapeTable& table, int patch,
                                   int sample_count);

}  // namespace ciga

#endif
