#include <doctest.h>

#include <cmath>
#include <random>

#include "ciga/generators.hpp"
#include "ciga/knot_vector.hpp"
#include "ciga/nurbs_patch.hpp"
#include "ciga/patch_io.hpp"

using namespace ciga;

namespace {

// Independent Cox-de Boor evaluation of basis i at xi (textbook recursion,
// 0/0 = 0 convention), used as an oracle against the production evaluator.
double cox_de_boor(const std::vector<double>& U, int i, int p, double xi) {
  if (p == 0) {
    const bool last = xi >= U.back() && U[i + 1] >= U.back();
    return (xi >= U[i] && xi < U[i + 1]) || (last && U[i] < U[i + 1]) ? 1.0
                                                                      : 0.0;
  }
  double left = 0.0, right = 0.0;
  if (U[i + p] > U[i])
    left = (xi - U[i]) / (U[i + p] - U[i]) * cox_de_boor(U, i, p - 1, xi);
  if (U[i + p + 1] > U[i + 1])
    right = (U[i + p + 1] - xi) / (U[i + p + 1] - U[i + 1]) *
            cox_de_boor(U, i + 1, p - 1, xi);
  return left + right;
}

NurbsPatch quarter_arc_patch() {
  // Standard one-segment quarter circle, radius 2, weights (1, sqrt(2)/2, 1).
  Matrix pts(3, 2);
  pts << 2, 0, 2, 2, 0, 2;
  Vector w(3);
  w << 1.0, std::sqrt(2.0) / 2.0, 1.0;
  return NurbsPatch(0, {KnotVector({0, 0, 0, 1, 1, 1}, 2)},
                    ControlNet({3}, pts, w), PatchKind::Nurbs);
}

NurbsPatch map_f1() {
  Matrix pts(3, 1);
  pts << 0, 3, 10;
  return NurbsPatch(0, {KnotVector({0, 0, 0, 1, 1, 1}, 2)},
                    ControlNet({3}, pts, Vector::Ones(3)), PatchKind::BSpline);
}

}  // namespace

TEST_CASE("Bernstein basis values at midpoint") {
  KnotVector kv({0, 0, 0, 1, 1, 1}, 2);
  const BasisSpan s = eval_basis(kv, 0.5, 0);
  REQUIRE(s.values.cols() == 3);
  CHECK(s.values(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(s.values(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.values(0, 2) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("basis matches an independent Cox-de Boor oracle") {
  const std::vector<double> knots{0, 0, 0, 0.5, 1, 1, 1};
  KnotVector kv(knots, 2);
  for (double xi : {0.25, 0.1, 0.5, 0.75, 0.999, 0.0, 1.0}) {
    const BasisSpan s = eval_basis(kv, xi, 0);
    for (int c = 0; c < s.values.cols(); ++c) {
      const int i = s.first_index + c;
      CHECK(s.values(0, c) ==
            doctest::Approx(cox_de_boor(knots, i, 2, xi)).epsilon(1e-12));
    }
  }
}

TEST_CASE("partition of unity and derivative sum at random points") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  KnotVector kv({0, 0, 0, 0, 0.2, 0.2, 0.7, 1, 1, 1, 1}, 3);
  for (int k = 0; k < 100; ++k) {
    const double xi = unif(rng);
    const BasisSpan s = eval_basis(kv, xi, 1);
    CHECK(std::abs(s.values.row(0).sum() - 1.0) < 1e-12);
    CHECK(std::abs(s.values.row(1).sum()) < 1e-10);
  }
}

TEST_CASE("domain and construction validation") {
  KnotVector kv({0, 0, 1, 1}, 1);
  CHECK_THROWS_AS(eval_basis(kv, -0.01, 0), DomainError);
  CHECK_THROWS_AS(eval_basis(kv, 1.01, 0), DomainError);
  // Not open / not normalized.
  CHECK_THROWS_AS(KnotVector({0, 0.5, 1}, 1), ConstructionError);
  CHECK_THROWS_AS(KnotVector({0, 0, 2, 2}, 1), ConstructionError);
  CHECK_THROWS_AS(KnotVector({0, 0, 0.6, 0.4, 1, 1}, 1), ConstructionError);
}

TEST_CASE("NURBS with unit weights equals the B-spline tensor product") {
  const NurbsPatch sq = make_unit_square_patch();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Vector xi(2);
    xi << unif(rng), unif(rng);
    const NurbsBasisSpan span = sq.eval_nurbs_basis(xi);
    CHECK(std::abs(span.values.sum() - 1.0) < 1e-12);
    CHECK(span.weight_fn == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("quarter-circle arc maps onto the circle exactly") {
  const NurbsPatch arc = quarter_arc_patch();
  for (int k = 0; k <= 20; ++k) {
    Vector xi(1);
    xi << k / 20.0;
    const Vector x = arc.map_forward(xi);
    CHECK(std::abs(x.squaredNorm() - 4.0) < 1e-10);
  }
  const NurbsBasisSpan span = arc.eval_nurbs_basis(Vector::Constant(1, 0.37));
  CHECK(std::abs(span.values.sum() - 1.0) < 1e-12);
}

TEST_CASE("1D benchmark mappings interpolate endpoints and midpoints") {
  const TwoMap1d tm = generate_1d_two_map(10);
  CHECK(tm.map1.map_forward(Vector::Zero(1))(0) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(tm.map1.map_forward(Vector::Ones(1))(0) ==
        doctest::Approx(10.0).epsilon(1e-14));
  // F1(xi) = 6 xi + 4 xi^2; F2(xi) = 16 xi - 6 xi^2.
  CHECK(tm.map1.map_forward(Vector::Constant(1, 0.5))(0) ==
        doctest::Approx(4.0).epsilon(1e-14));
  CHECK(tm.map2.map_forward(Vector::Constant(1, 0.5))(0) ==
        doctest::Approx(6.5).epsilon(1e-14));
  // dF1/dxi at 0.5 = 6 + 8*0.5 = 10.
  CHECK(tm.map1.jacobian(Vector::Constant(1, 0.5)).J(0, 0) ==
        doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("Jacobian matches central finite differences") {
  const MultiPatchMesh mesh = generate_plate_with_hole(0);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  const double h = 1e-5;
  for (const NurbsPatch& patch : mesh.patches()) {
    for (int k = 0; k < 20; ++k) {
      Vector xi(2);
      xi << unif(rng), unif(rng);
      const Matrix J = patch.jacobian(xi).J;
      for (int m = 0; m < 2; ++m) {
        Vector lo = xi, hi = xi;
        lo(m) -= h;
        hi(m) += h;
        const Vector fd =
            (patch.map_forward(hi) - patch.map_forward(lo)) / (2 * h);
        CHECK((J.col(m) - fd).norm() / fd.norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("affine patch has constant Jacobian equal to the physical area") {
  Matrix pts(4, 2);
  pts << 0, 0, 3, 0, 0, 2, 3, 2;
  NurbsPatch sq(0, {KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)},
                ControlNet({2, 2}, pts, Vector::Ones(4)), PatchKind::BSpline);
  for (double t : {0.1, 0.5, 0.9}) {
    Vector xi(2);
    xi << t, 1 - t;
    CHECK(sq.jacobian(xi).det == doctest::Approx(6.0).epsilon(1e-13));
  }
}

TEST_CASE("bijectivity violation is rejected at construction") {
  // Bow-tie: crossed control points give a sign-changing Jacobian.
  Matrix pts(4, 2);
  pts << 0, 0, 1, 0, 1, 1, 0, 1;  // (i,j) order -> crossed edges
  CHECK_THROWS_AS(
      NurbsPatch(0, {KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)},
                 ControlNet({2, 2}, pts, Vector::Ones(4)), PatchKind::BSpline),
      ConstructionError);
}

TEST_CASE("patch JSON round trip") {
  const NurbsPatch arc = quarter_arc_patch();
  const NurbsPatch back = parse_patch_json(patch_to_json(arc));
  for (double t : {0.0, 0.3, 0.77, 1.0}) {
    Vector xi(1);
    xi << t;
    CHECK((arc.map_forward(xi) - back.map_forward(xi)).norm() < 1e-14);
  }
}
