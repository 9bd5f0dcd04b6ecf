#ifndef CIGA_NORMS_HPP
#define CIGA_NORMS_HPP

#include "ciga/assembly.hpp"

namespace ciga {

struct ErrorNorms {
  double L2 = 0, L2_rel = 0;
  double H1_broken = 0, H1_rel = 0;  // sqrt(L2^2 + broken seminorm^2)
  double energy = 0, energy_rel = 0;
};

struct ExactScalar {
  ScalarField value;
  std::function<Vec2(const Vector&)> gradient;
};

/// Scalar (Poisson) error norms; energy = H1 seminorm of the error.
ErrorNorms compute_error_norms(const ShapeTable& table, const DofMap& dofs,
                               const Vector& u, const ExactScalar& exact,
                               int quad_points = 0);

/// Plane-stress energy norm: sqrt(1/2 int (sigma_h - sigma)^T D^{-1} (...)).
/// exact_sigma returns Voigt stresses (xx, yy, xy); exact_u the displacement
/// for the L2/H1 columns (pass value only if gradient unused).
struct ExactElasticity {
  std::function<Vec2(const Vector&)> displacement;
  std::function<Eigen::Vector3d(const Vector&)> stress;
};

ErrorNorms compute_error_norms_elasticity(const ShapeTable& table,
                                          const DofMap& dofs, const Vector& u,
                                          const Eigen::Matrix3d& D,
                                          const ExactElasticity& exact,
                                          int quad_points = 0);

/// Relative L2 deviation of the two patch solutions along one interface:
/// ||u_a - u_b|| / (||u_a|| + ||u_b||), norms over the shared curve.
double interface_deviation(const ShapeTable& table, const InterfacePair& pair,
                           const DofMap& dofs, const Vector& u,
                           int quad_points = 0);

/// Max pointwise |u_a - u_b| over n uniformly spaced interface samples.
double interface_jump_max(const ShapeTable& table, const InterfacePair& pair,
                          const DofMap& dofs, const Vector& u, int samples);

}  // namespace ciga

#endif
