#ifndef CIGA_RBF_HPP
#define CIGA_RBF_HPP

#include "ciga/types.hpp"

namespace ciga {

enum class RbfKind { CubicSpline, Gaussian };

/// Compactly supported radial basis function psi(r; a).
/// order 0 returns psi, order 1 returns d psi / d r.
/// Both kinds vanish identically for r/a > 1.
double rbf_eval(RbfKind kind, double r, double a, int order);

}  // namespace ciga

#endif
