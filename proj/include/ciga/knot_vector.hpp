#ifndef CIGA_KNOT_VECTOR_HPP
#define CIGA_KNOT_VECTOR_HPP

#include <vector>

#include "ciga/types.hpp"

namespace ciga {

/// Open knot vector on [0,1]: endpoint multiplicity exactly p+1,
/// interior multiplicity at most p, knots non-decreasing.
class KnotVector {
 public:
  KnotVector(std::vector<double> knots, int degree);

  int degree() const { return degree_; }
  int basis_count() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  const std::vector<double>& knots() const { return knots_; }

  /// Index i of the knot span [u_i, u_{i+1}) containing xi. Repeated knots
  /// resolve to the right limit, except xi = 1 which uses the left limit so
  /// the last basis function evaluates to 1.
  int find_span(double xi) const;

  /// Breakpoints (distinct knot values), including 0 and 1.
  std::vector<double> breakpoints() const;

 private:
  std::vector<double> knots_;
  int degree_;
};

/// The p+1 possibly-nonzero basis values (row 0) and, when order >= 1,
/// first derivatives (row 1) at xi. Basis index of column c is
/// first_index + c.
struct BasisSpan {
  Eigen::Matrix<double, 2, Eigen::Dynamic> values;  // (order+1) x (p+1), row-padded
  int first_index = 0;
  int order = 0;
};

/// Cox-de Boor evaluation of the nonzero B-spline basis functions
/// (and first derivatives when order == 1) at xi in [0,1].
BasisSpan eval_basis(const KnotVector& kv, double xi, int order);

}  // namespace ciga

#endif
