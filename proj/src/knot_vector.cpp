#include "ciga/knot_vector.hpp"

#include <algorithm>
#include <cmath>

namespace ciga {

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
  const int p = degree_;
  const int len = static_cast<int>(knots_.size());
  if (p < 0) throw ConstructionError("knot vector: negative degree");
  if (len < 2 * (p + 1)) throw ConstructionError("knot vector: too few knots");
  if (knots_.front() != 0.0 || knots_.back() != 1.0)
    throw ConstructionError("knot vector: must start at 0 and end at 1");
  for (int i = 1; i < len; ++i)
    if (knots_[i] < knots_[i - 1])
      throw ConstructionError("knot vector: knots must be non-decreasing");
  for (int i = 0; i <= p; ++i)
    if (knots_[i] != 0.0 || knots_[len - 1 - i] != 1.0)
      throw ConstructionError("knot vector: endpoint multiplicity must be p+1");
  if (len > 2 * (p + 1)) {
    if (knots_[p + 1] == 0.0 || knots_[len - p - 2] == 1.0)
      throw ConstructionError("knot vector: endpoint multiplicity exceeds p+1");
    // interior multiplicity at most p
    int run = 1;
    for (int i = p + 2; i < len - p - 1; ++i) {
      run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
      if (run > p)
        throw ConstructionError("knot vector: interior multiplicity exceeds p");
    }
  }
}

int KnotVector::find_span(double xi) const {
  const int p = degree_;
  const int n = basis_count();
  if (xi >= 1.0) return n - 1;  // left limit at the right end
  // last index i with knots[i] <= xi, restricted to [p, n-1]
  auto it = std::upper_bound(knots_.begin() + p, knots_.begin() + n + 1, xi);
  int span = static_cast<int>(it - knots_.begin()) - 1;
  return std::clamp(span, p, n - 1);
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> b;
  for (double k : knots_)
    if (b.empty() || k > b.back()) b.push_back(k);
  return b;
}

BasisSpan eval_basis(const KnotVector& kv, double xi, int order) {
  if (xi < 0.0 || xi > 1.0) throw DomainError("eval_basis: xi outside [0,1]");
  const int p = kv.degree();
  const auto& U = kv.knots();
  const int span = kv.find_span(xi);

  // Standard triangular recurrence for the p+1 nonzero functions.
  Vector N = Vector::Zero(p + 1);
  Vector left(p + 1), right(p + 1);
  N(0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left(j) = xi - U[span + 1 - j];
    right(j) = U[span + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right(r + 1) + left(j - r);
      const double temp = (denom != 0.0) ? N(r) / denom : 0.0;
      N(r) = saved + right(r + 1) * temp;
      saved = left(j - r) * temp;
    }
    N(j) = saved;
  }

  BasisSpan out;
  out.first_index = span - p;
  out.order = order;
  out.values.resize(2, p + 1);
  out.values.setZero();
  out.values.row(0) = N.transpose();

  if (order >= 1) {
    // First derivative via the degree p-1 functions.
    Vector D = Vector::Zero(p + 1);
    if (p > 0) {
      Vector Nm = Vector::Zero(p);  // nonzero functions of degree p-1 at this span
      Nm(0) = 1.0;
      for (int j = 1; j <= p - 1; ++j) {
        left(j) = xi - U[span + 1 - j];
        right(j) = U[span + j] - xi;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
          const double denom = right(r + 1) + left(j - r);
          const double temp = (denom != 0.0) ? Nm(r) / denom : 0.0;
          Nm(r) = saved + right(r + 1) * temp;
          saved = left(j - r) * temp;
        }
        Nm(j) = saved;
      }
      for (int r = 0; r <= p; ++r) {
        const int i = span - p + r;
        double d = 0.0;
        double den1 = U[i + p] - U[i];
        double den2 = U[i + p + 1] - U[i + 1];
        if (r > 0 && den1 != 0.0) d += Nm(r - 1) / den1;
        if (r < p && den2 != 0.0) d -= Nm(r) / den2;
        D(r) = p * d;
      }
    }
    out.values.row(1) = D.transpose();
  }
  return out;
}

}  // namespace ciga
