#include "ciga/exact_fields.hpp"

#include <cmath>

namespace ciga::exact {

Eigen::Vector3d kirsch_stress(const Vector& x, double R) {
  const double r = std::hypot(x(0), x(1));
  const double th = std::atan2(x(1), x(0));
  const double q = R * R / (r * r);
  const double q2 = q * q;
  const double c2 = std::cos(2 * th), c4 = std::cos(4 * th);
  const double s2 = std::sin(2 * th), s4 = std::sin(4 * th);
  Eigen::Vector3d s;
  s(0) = 1.0 - q * (1.5 * c2 + c4) + 1.5 * q2 * c4;
  s(1) = -q * (0.5 * c2 - c4) - 1.5 * q2 * c4;
  s(2) = -q * (0.5 * s2 + s4) + 1.5 * q2 * s4;
  return s;
}

Vec2 kirsch_displacement(const Vector& x, double R, double E, double nu) {
  const double mu = E / (2.0 * (1.0 + nu));
  const double kap = (3.0 - nu) / (1.0 + nu);  // plane stress
  const double r = std::hypot(x(0), x(1));
  const double th = std::atan2(x(1), x(0));
  const double a = R;
  const double c = a / (8.0 * mu);
  Vec2 u;
  u(0) = c * ((r / a) * (kap + 1.0) * std::cos(th) +
              (2.0 * a / r) * ((1.0 + kap) * std::cos(th) + std::cos(3 * th)) -
              (2.0 * a * a * a / (r * r * r)) * std::cos(3 * th));
  u(1) = c * ((r / a) * (kap - 3.0) * std::sin(th) +
              (2.0 * a / r) * ((1.0 - kap) * std::sin(th) + std::sin(3 * th)) -
              (2.0 * a * a * a / (r * r * r)) * std::sin(3 * th));
  return u;
}

Vec2 kirsch_traction(const Vector& x, const Vec2& n, double R) {
  const Eigen::Vector3d s = kirsch_stress(x, R);
  return Vec2(s(0) * n(0) + s(2) * n(1), s(2) * n(0) + s(1) * n(1));
}

double hump_value(const Vector& x) {
  const double dx = x(0) + 0.5, dy = x(1) - 1.0;
  return std::exp(-M_PI * (dx * dx + dy * dy));
}

Vec2 hump_gradient(const Vector& x) {
  const double dx = x(0) + 0.5, dy = x(1) - 1.0;
  const double u = hump_value(x);
  return Vec2(-2.0 * M_PI * dx * u, -2.0 * M_PI * dy * u);
}

double hump_source(const Vector& x) {
  // b = -laplace(u) = u * (4 pi - 4 pi^2 (dx^2 + dy^2))... sign: laplace(u)
  // = u (4 pi^2 (dx^2+dy^2) - 4 pi), so b = u (4 pi - 4 pi^2 (dx^2+dy^2))
  // with the convention laplace(u) + b = 0.
  const double dx = x(0) + 0.5, dy = x(1) - 1.0;
  const double u = hump_value(x);
  return u * (4.0 * M_PI - 4.0 * M_PI * M_PI * (dx * dx + dy * dy));
}

ExactScalar hump_scalar() {
  ExactScalar s;
  s.value = [](const Vector& x) { return hump_value(x); };
  s.gradient = [](const Vector& x) { return hump_gradient(x); };
  return s;
}

ExactElasticity kirsch_fields(double R, double E, double nu) {
  ExactElasticity e;
  e.displacement = [R, E, nu](const Vector& x) {
    return kirsch_displacement(x, R, E, nu);
  };
  e.stress = [R](const Vector& x) { return kirsch_stress(x, R); };
  return e;
}

}  // namespace ciga::exact
