#include "ciga/gauss.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace ciga {

static GaussRule compute_rule(int n) {
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.points(n - 1 - i) = x;
    rule.weights(n - 1 - i) = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

GaussRule gauss_on_interval(int n, double a, double b) {
  const GaussRule& base = gauss_legendre(n);
  GaussRule out;
  out.points = 0.5 * (a + b) + 0.5 * (b - a) * base.points.array();
  out.weights = 0.5 * (b - a) * base.weights;
  return out;
}

}  // namespace ciga
