#ifndef CIGA_ASSEMBLY_HPP
#define CIGA_ASSEMBLY_HPP

#include <Eigen/SparseCore>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ciga/shape_table.hpp"

namespace ciga {

/// Global dof numbering. Interface-shared nodes own a single dof in nodal
/// and G0 modes; in penalty mode the beta-side patch gets duplicate dofs
/// for interface nodes and the jump is controlled by the penalty term.
class DofMap {
 public:
  DofMap(const MultiPatchMesh& mesh, const InterfaceSet& interfaces,
         CompatMode mode, int components);

  int components() const { return comps_; }
  int count() const { return base_count_ * comps_; }
  int base_count() const { return base_count_; }
  /// Base id of (patch, node); differs from node only for penalty-mode
  /// beta-side interface nodes.
  int base(int patch, int node) const;
  int dof(int patch, int node, int comp) const {
    return base(patch, node) * comps_ + comp;
  }

 private:
  int comps_;
  int base_count_;
  std::map<std::pair<int, int>, int> dup_base_;  // (patch, node) -> base
};

struct Constraint {
  int dof;
  double value;
};

struct DofSystem {
  Eigen::SparseMatrix<double> K;  // symmetric, unconstrained
  Vector f;
  std::vector<Constraint> constraints;
  DofMap dofs;
};

struct SolveConfig {
  CompatMode mode = CompatMode::Nodal;
  double penalty_rho = 0.0;  // <= 0: default 1e4 / h per interface segment
  int quadrature_order = 0;  // <= 0: p + 2 points per direction
  enum class Solver { Direct, ConjugateGradient } solver = Solver::Direct;
  double cg_tolerance = 1e-12;
};

using ScalarField = std::function<double(const Vector&)>;
/// Traction callback: physical point and outward unit normal -> traction.
using TractionField = std::function<Vec2(const Vector&, const Vec2&)>;

/// -laplace(u) = b with Dirichlet data g on the tagged boundary edges
/// (empty tag list = every tagged edge).
DofSystem assemble_poisson(const ShapeTable& table, const InterfaceSet& interfaces,
                           const ScalarField& source, const ScalarField& dirichlet,
                           const SolveConfig& config,
                           const std::vector<std::string>& dirichlet_tags = {});

/// Plane-stress elasticity. dirichlet_component: tag -> (component, value
/// callback); traction applied on the listed Neumann tags.
struct ElasticityBC {
  // tag -> constrained displacement component (0 = x, 1 = y) with value.
  std::vector<std::tuple<std::string, int, ScalarField>> dirichlet;
  std::vector<std::string> neumann_tags;
  TractionField traction;
};

DofSystem assemble_elasticity(const ShapeTable& table,
                              const InterfaceSet& interfaces, double E, double nu,
                              const ElasticityBC& bc, const SolveConfig& config);

/// Applies the constraints symmetrically and solves; residual of the
/// constrained system is verified below 1e-10 (direct) or the CG tolerance.
Vector solve_system(const DofSystem& system, const SolveConfig& config);

/// Plane-stress constitutive matrix (Voigt order xx, yy, xy).
Eigen::Matrix3d plane_stress_matrix(double E, double nu);

void write_matrix_market(const Eigen::SparseMatrix<double>& K,
                         const std::string& path);

/// Gauss points per direction used for the given table ((p+2) default).
int quadrature_points(const ShapeTable& table, const SolveConfig& config);

}  // namespace ciga

#endif
