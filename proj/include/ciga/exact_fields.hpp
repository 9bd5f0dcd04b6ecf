#ifndef CIGA_EXACT_FIELDS_HPP
#define CIGA_EXACT_FIELDS_HPP

#include "ciga/norms.hpp"

namespace ciga {

/// Analytic fields of the infinite-plate-with-hole problem under unit
/// far-field tension along x (hole radius R), plane stress, and the
/// manufactured Gaussian-hump Poisson problem.
namespace exact {

/// Voigt stresses (xx, yy, xy) of the Kirsch solution.
Eigen::Vector3d kirsch_stress(const Vector& x, double R);

/// Closed-form displacement (plane stress, modulus E, Poisson ratio nu).
Vec2 kirsch_displacement(const Vector& x, double R, double E, double nu);

/// Traction sigma . n.
Vec2 kirsch_traction(const Vector& x, const Vec2& n, double R);

/// Gaussian hump centered at (-0.5, 1): u = exp(-pi (x+0.5)^2 - pi (y-1)^2).
double hump_value(const Vector& x);
Vec2 hump_gradient(const Vector& x);
/// Source b = -laplace(u) so that laplace(u) + b = 0.
double hump_source(const Vector& x);

ExactScalar hump_scalar();
ExactElasticity kirsch_fields(double R, double E, double nu);

}  // namespace exact
}  // namespace ciga

#endif
