#ifndef CIGA_GAUSS_HPP
#define CIGA_GAUSS_HPP

#include "ciga/types.hpp"

namespace ciga {

/// Gauss-Legendre rule on [-1,1].
struct GaussRule {
  Vector points;
  Vector weights;
};

/// n-point rule, n >= 1. Nodes by Newton iteration on P_n.
const GaussRule& gauss_legendre(int n);

/// Rule mapped to [a,b].
GaussRule gauss_on_interval(int n, double a, double b);

}  // namespace ciga

#endif
