#include "ciga/generators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace ciga {

namespace {

// Intersection of lines p0 + t d0 and p1 + u d1.
Vec2 line_intersect(const Vec2& p0, const Vec2& d0, const Vec2& p1,
                    const Vec2& d1) {
  Eigen::Matrix2d A;
  A.col(0) = d0;
  A.col(1) = -d1;
  Vec2 tu = A.fullPivLu().solve(p1 - p0);
  return p0 + tu(0) * d0;
}

// Blend fractions of the two-span quadratic radial coordinate: Bezier
// values {0, B1, (B1+B2)/2} on the first span and {(B1+B2)/2, B2, 1} on
// the second. The span boundary sits at blend fraction 0.4, which is a
// mesh node at every refinement level (5 * 2^L elements per direction).
constexpr double kRadB1 = 0.10;
constexpr double kRadB2 = 0.70;
constexpr double kRadMid = 0.5 * (kRadB1 + kRadB2);  // t at eta = 0.5

// One plate patch: quadratic NURBS arc (eta=0) blended to a straight
// outer edge (eta=1). theta in degrees, arc radius R, outer points
// obtained by scaling the arc control rays onto the outer boundary.
// quadratic_radial switches the radial coordinate from a single linear
// span to the nonuniform two-span quadratic parameterization.
NurbsPatch make_plate_patch(int patch_id, double theta0_deg, double theta1_deg,
                            double R, const Vec2& outer0, const Vec2& outer2,
                            bool quadratic_radial) {
  const double th0 = theta0_deg * M_PI / 180.0;
  const double th1 = theta1_deg * M_PI / 180.0;
  const Vec2 a0 = R * Vec2(std::cos(th0), std::sin(th0));
  const Vec2 a2 = R * Vec2(std::cos(th1), std::sin(th1));
  const Vec2 t0(-std::sin(th0), std::cos(th0));
  const Vec2 t1(-std::sin(th1), std::cos(th1));
  const Vec2 a1 = line_intersect(a0, t0, a2, t1);
  // Middle outer control point: the ray through a1 scaled onto the outer
  // edge (segment outer0-outer2); keeps eta = const lines well distributed.
  const Vec2 m1 = line_intersect(Vec2::Zero(), a1, outer0, outer2 - outer0);

  const Vec2 arc[3] = {a0, a1, a2};
  const Vec2 out[3] = {outer0, m1, outer2};
  const double wm = std::cos(0.5 * (th1 - th0));  // arc midpoint weight

  // Radial control rows are straight blends between the arc row and the
  // outer row; because the weights match columnwise, the blend fraction
  // t(eta) is a scalar reparameterization shared by all of the patch.
  std::vector<double> t_rows =
      quadratic_radial ? std::vector<double>{0.0, kRadB1, kRadB2, 1.0}
                       : std::vector<double>{0.0, 1.0};
  const int nrow = static_cast<int>(t_rows.size());
  Matrix pts(3 * nrow, 2);
  Vector w(3 * nrow);
  for (int j = 0; j < nrow; ++j)
    for (int i = 0; i < 3; ++i) {
      pts.row(i + 3 * j) =
          ((1.0 - t_rows[j]) * arc[i] + t_rows[j] * out[i]).transpose();
      w(i + 3 * j) = i == 1 ? wm : 1.0;
    }

  std::vector<KnotVector> kvs;
  kvs.emplace_back(std::vector<double>{0, 0, 0, 1, 1, 1}, 2);
  if (quadratic_radial)
    kvs.emplace_back(std::vector<double>{0, 0, 0, 0.5, 1, 1, 1}, 2);
  else
    kvs.emplace_back(std::vector<double>{0, 0, 1, 1}, 1);
  return NurbsPatch(patch_id, std::move(kvs),
                    ControlNet({3, nrow}, std::move(pts), std::move(w)),
                    PatchKind::Nurbs);
}

// Parametric abscissa of blend fraction t under the two-span quadratic
// radial coordinate (closed-form inversion of each Bezier segment).
double invert_radial(double t) {
  const bool first = t <= kRadMid;
  const double d0 = first ? 0.0 : kRadMid;
  const double d1 = first ? kRadB1 : kRadB2;
  const double d2 = first ? kRadMid : 1.0;
  const double A = d0 - 2.0 * d1 + d2;
  const double B = 2.0 * (d1 - d0);
  const double C = d0 - t;
  double u;
  if (std::abs(A) < 1e-14) {
    u = -C / B;
  } else {
    const double disc = std::sqrt(B * B - 4.0 * A * C);
    u = (-B + disc) / (2.0 * A);
    if (u < -1e-12 || u > 1.0 + 1e-12) u = (-B - disc) / (2.0 * A);
  }
  return (first ? 0.0 : 0.5) + 0.5 * std::clamp(u, 0.0, 1.0);
}

PatchGrid plate_grid(int n, bool quadratic_radial) {
  PatchGrid g;
  g.nelem = {n, n};
  for (int m = 0; m < 2; ++m) {
    g.abscissae[m].resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      g.abscissae[m][i] = (m == 1 && quadratic_radial) ? invert_radial(t) : t;
    }
  }
  if (quadratic_radial) {
    // Radial span boundary (eta = 0.5, blend fraction 0.4) is node 2n/5;
    // convolution patches must not cross it.
    g.span_bounds[1] = {0, 2 * n / 5, n};
  }
  return g;
}

}  // namespace

MultiPatchMesh generate_plate_with_hole(int refinement_level, bool two_patch,
                                        bool matched_interface) {
  if (refinement_level < 0)
    throw ConstructionError("generate_plate_with_hole: level must be >= 0");
  const double R = 0.5, L = 4.0;
  const int n = 5 * (1 << refinement_level);

  // Patch 1: theta 90 -> 135 (x = 0 axis to the diagonal), outer edge =
  // top; two radial IGA elements. Patch 2: theta 135 -> 180 (diagonal to
  // the y = 0 axis), outer edge = left; a single radial element unless a
  // matched interface parameterization is requested. Mesh nodes are
  // placed at uniform blend fractions, so the physical meshes of the two
  // patches coincide along the diagonal either way.
  std::vector<NurbsPatch> patches;
  patches.push_back(
      make_plate_patch(0, 90, 135, R, Vec2(0, L), Vec2(-L, L), true));
  std::vector<PatchGrid> grids{plate_grid(n, true)};
  std::vector<BoundarySideTag> tags{
      {0, 1, 0.0, "sym_x"},   // xi = 0 side (runs along eta), on x = 0
      {0, 0, 1.0, "outer"},   // eta = 1 side, top edge
      {0, 0, 0.0, "hole"},    // eta = 0 side, hole arc
  };
  if (two_patch) {
    patches.push_back(make_plate_patch(1, 135, 180, R, Vec2(-L, L), Vec2(-L, 0),
                                       matched_interface));
    grids.push_back(plate_grid(n, matched_interface));
    tags.push_back({1, 1, 1.0, "sym_y"});  // xi = 1 side, on y = 0
    tags.push_back({1, 0, 1.0, "outer"});  // eta = 1 side, left edge
    tags.push_back({1, 0, 0.0, "hole"});
  } else {
    tags.push_back({0, 1, 1.0, "diag"});  // the would-be interface side
  }
  return MultiPatchMesh::build(std::move(patches), std::move(grids), tags);
}

TwoMap1d generate_1d_two_map(int n_elements) {
  if (n_elements < 2)
    throw ConstructionError("generate_1d_two_map: need at least 2 elements");

  auto make_map = [](int id, double c1) {
    Matrix pts(3, 1);
    pts << 0.0, c1, 10.0;
    std::vector<KnotVector> kvs;
    kvs.emplace_back(std::vector<double>{0, 0, 0, 1, 1, 1}, 2);
    return NurbsPatch(id, std::move(kvs),
                      ControlNet({3}, std::move(pts), Vector::Ones(3)),
                      PatchKind::BSpline);
  };

  TwoMap1d out{make_map(0, 3.0), make_map(1, 8.0), {}, {}, {}};
  const int n = n_elements;
  out.phys_nodes.resize(n + 1);
  for (int i = 0; i <= n; ++i) out.phys_nodes(i) = 10.0 * i / n;

  Matrix phys = out.phys_nodes;
  out.param1 = invert_mesh(out.map1, phys);
  out.param2 = invert_mesh(out.map2, phys);
  return out;
}

NurbsPatch make_unit_square_patch(int patch_id) {
  Matrix pts(4, 2);
  pts << 0, 0, 1, 0, 0, 1, 1, 1;
  std::vector<KnotVector> kvs;
  kvs.emplace_back(std::vector<double>{0, 0, 1, 1}, 1);
  kvs.emplace_back(std::vector<double>{0, 0, 1, 1}, 1);
  return NurbsPatch(patch_id, std::move(kvs),
                    ControlNet({2, 2}, std::move(pts), Vector::Ones(4)),
                    PatchKind::BSpline);
}

}  // namespace ciga
