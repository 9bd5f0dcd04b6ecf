#ifndef CIGA_TYPES_HPP
#define CIGA_TYPES_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace ciga {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

/// Thrown when an evaluation point leaves the admissible domain.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a construction step fails (singular moment matrix,
/// bijectivity violation, non-conforming mesh, ...).
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ciga

#endif
