#include "ciga/rbf.hpp"

#include <cmath>

namespace ciga {

double rbf_eval(RbfKind kind, double r, double a, int order) {
  if (r < 0.0 || a <= 0.0) throw DomainError("rbf_eval: require r >= 0, a > 0");
  const double t = r / a;
  if (t > 1.0) return 0.0;

  switch (kind) {
    case RbfKind::CubicSpline: {
      if (order == 0) {
        if (t <= 0.5) return 2.0 / 3.0 - 4.0 * t * t + 4.0 * t * t * t;
        return 4.0 / 3.0 - 4.0 * t + 4.0 * t * t - 4.0 / 3.0 * t * t * t;
      }
      double dt;  // d psi / d t
      if (t <= 0.5)
        dt = -8.0 * t + 12.0 * t * t;
      else
        dt = -4.0 + 8.0 * t - 4.0 * t * t;
      return dt / a;
    }
    case RbfKind::Gaussian: {
      const double v = std::exp(-t * t);
      if (order == 0) return v;
      return -2.0 * t * v / a;
    }
  }
  return 0.0;
}

}  // namespace ciga
