#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "ciga/generators.hpp"
#include "ciga/mesh.hpp"

using namespace ciga;

namespace {

NurbsPatch square_patch(int id, double x0, double x1, double y0, double y1) {
  Matrix pts(4, 2);
  pts << x0, y0, x1, y0, x0, y1, x1, y1;
  return NurbsPatch(id,
                    {KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)},
                    ControlNet({2, 2}, pts, Vector::Ones(4)),
                    PatchKind::BSpline);
}

PatchGrid grid2d(int n0, int n1) {
  PatchGrid g;
  g.nelem = {n0, n1};
  for (int m = 0; m < 2; ++m) {
    const int n = m == 0 ? n0 : n1;
    g.abscissae[m].resize(n + 1);
    for (int i = 0; i <= n; ++i) g.abscissae[m][i] = double(i) / n;
  }
  return g;
}

MultiPatchMesh two_squares(int n) {
  return MultiPatchMesh::build(
      {square_patch(0, 0, 1, 0, 1), square_patch(1, 1, 2, 0, 1)},
      {grid2d(n, n), grid2d(n, n)}, {{0, 1, 0.0, "left"}, {1, 1, 1.0, "right"}});
}

}  // namespace

TEST_CASE("plate-with-hole mesh: counts, hole radius, round trip") {
  const MultiPatchMesh mesh = generate_plate_with_hole(0);
  const int n = 5;
  // Two (n+1)^2 grids sharing one edge of n+1 nodes.
  CHECK(mesh.node_count() == 2 * (n + 1) * (n + 1) - (n + 1));
  CHECK(mesh.elements().size() == std::size_t(2 * n * n));

  for (const BoundaryEdge& e : mesh.boundary()) {
    if (e.tag != "hole") continue;
    for (int id : e.nodes)
      CHECK(std::abs(mesh.nodes().row(id).squaredNorm() - 0.25) < 1e-10);
  }

  for (std::size_t a = 0; a < mesh.patches().size(); ++a) {
    const PatchGrid& g = mesh.grids()[a];
    for (int j = 0; j <= g.nelem[1]; ++j)
      for (int i = 0; i <= g.nelem[0]; ++i) {
        const Vector x = mesh.patches()[a].map_forward(g.node_param(i, j));
        CHECK((x.transpose() - mesh.nodes().row(g.node_id(i, j))).norm() <
              1e-10);
      }
  }
}

TEST_CASE("interface detection on the plate and on a single patch") {
  const MultiPatchMesh mesh = generate_plate_with_hole(1);
  const InterfaceSet set = detect_interfaces(mesh);
  REQUIRE(set.pairs.size() == 1);
  const InterfacePair& pair = set.pairs[0];
  CHECK(pair.patch_a == 0);
  CHECK(pair.patch_b == 1);
  CHECK(pair.shared_nodes.size() == 11);  // level 1: 10 elements per side
  // Diagonal interface: nodes on y = -x.
  for (int id : pair.shared_nodes)
    CHECK(std::abs(mesh.nodes()(id, 0) + mesh.nodes()(id, 1)) < 1e-10);

  const MultiPatchMesh single = generate_plate_with_hole(0, false);
  CHECK(detect_interfaces(single).pairs.empty());
}

TEST_CASE("hanging/perturbed interface node is rejected") {
  // Patch 1's shared-edge midpoint control is perturbed beyond the weld
  // tolerance but within geometric-coincidence detection.
  Matrix pts(4, 2);
  pts << 1, 1e-8, 2, 0, 1, 1 + 1e-8, 2, 1;
  NurbsPatch bad(1,
                 {KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)},
                 ControlNet({2, 2}, pts, Vector::Ones(4)), PatchKind::BSpline);
  const MultiPatchMesh mesh = MultiPatchMesh::build(
      {square_patch(0, 0, 1, 0, 1), bad}, {grid2d(2, 2), grid2d(2, 2)}, {});
  CHECK_THROWS_AS(detect_interfaces(mesh), ConstructionError);
}

TEST_CASE("1D convolution index: interior and boundary truncation") {
  Matrix pts(2, 1);
  pts << 0, 10;
  NurbsPatch line(0, {KnotVector({0, 0, 1, 1}, 1)},
                  ControlNet({2}, pts, Vector::Ones(2)), PatchKind::BSpline);
  PatchGrid g;
  g.nelem = {10, 0};
  g.abscissae[0].resize(11);
  for (int i = 0; i <= 10; ++i) g.abscissae[0][i] = i / 10.0;
  const MultiPatchMesh mesh = MultiPatchMesh::build({line}, {g}, {});
  const InterfaceSet none;
  const ConvPatchIndex idx = build_conv_patch_sets(mesh, none, 2);

  const NodePatchRange& mid = idx.range(mesh, 0, 5, 0, 0);
  CHECK(mid.lo[0] == 3);
  CHECK(mid.hi[0] == 7);
  CHECK(mid.member_ids.size() == 5);
  // Boundary windows keep the full width, shifted inward.
  const NodePatchRange& end = idx.range(mesh, 0, 0, 0, 0);
  CHECK(end.lo[0] == 0);
  CHECK(end.hi[0] == 4);
  CHECK(end.member_ids.size() == 5);
}

TEST_CASE("coarse-span boundaries truncate convolution patches") {
  Matrix pts(4, 1);
  pts << 0, 2, 6, 10;
  NurbsPatch line(0, {KnotVector({0, 0, 0, 0.5, 1, 1, 1}, 2)},
                  ControlNet({4}, pts, Vector::Ones(4)), PatchKind::BSpline);
  PatchGrid g;
  g.nelem = {4, 0};
  g.abscissae[0] = {0.0, 0.25, 0.5, 0.75, 1.0};
  g.span_bounds[0] = {0, 2, 4};  // knot line at xi = 0.5 (node 2)
  const MultiPatchMesh mesh = MultiPatchMesh::build({line}, {g}, {});
  const InterfaceSet none;
  const ConvPatchIndex idx = build_conv_patch_sets(mesh, none, 2);

  // Node 1 lives in block 0 only: patch clipped to [0, 2].
  const NodePatchRange& r1 = idx.range(mesh, 0, 1, 0, 0);
  CHECK(r1.lo[0] == 0);
  CHECK(r1.hi[0] == 2);
  // Node 2 sits on the span boundary and carries one range per block.
  CHECK(idx.per_patch[0][2].by_block.size() == 2);
  const NodePatchRange& r2b1 = idx.range(mesh, 0, 2, 0, 1);
  CHECK(r2b1.lo[0] == 2);
  CHECK(r2b1.hi[0] == 4);
}

TEST_CASE("2D index: interior size, interface partition, no foreign ids") {
  const MultiPatchMesh mesh = two_squares(4);
  const InterfaceSet set = detect_interfaces(mesh);
  REQUIRE(set.pairs.size() == 1);
  const ConvPatchIndex idx = build_conv_patch_sets(mesh, set, 1);

  // Interior node of patch 0: full (2s+1)^2 patch.
  const NodePatchRange& mid = idx.range(mesh, 0, 2, 2, 0);
  CHECK(mid.member_ids.size() == 9);

  // Node (3,1) of patch 0 is one layer from the interface (i = 4 edge).
  const NodePatchRange& near = idx.range(mesh, 0, 3, 1, 0);
  CHECK(near.lo[0] == 2);
  CHECK(near.hi[0] == 4);
  const std::set<int> iface(set.pairs[0].shared_nodes.begin(),
                            set.pairs[0].shared_nodes.end());
  const PatchGrid& g0 = mesh.grids()[0];
  const auto& part = idx.partition[0][3 + 5 * 1];
  // P set: member nodes lying on the interface, here (4,0),(4,1),(4,2).
  CHECK(part.shared.size() == 3);
  for (int id : part.shared) CHECK(iface.count(id) == 1);
  for (int id : part.internal) CHECK(iface.count(id) == 0);
  CHECK(part.shared.size() + part.internal.size() == near.member_ids.size());

  // Every member id belongs to the owning patch's grid.
  const std::set<int> own(g0.node_ids.begin(), g0.node_ids.end());
  for (const auto& per_node : idx.per_patch[0])
    for (const auto& [key, range] : per_node.by_block)
      for (int id : range.member_ids) CHECK(own.count(id) == 1);
}

TEST_CASE("mesh JSON export") {
  const MultiPatchMesh mesh = two_squares(2);
  const nlohmann::json j = nlohmann::json::parse(mesh.to_json());
  CHECK(j["nodes"].size() == std::size_t(mesh.node_count()));
  CHECK(j["elements"].size() == 8);
  CHECK(j["patch_of_element"].size() == 8);
  CHECK(j["boundary"].size() == 4);  // two tagged sides, 2 cells each
  for (const auto& b : j["boundary"]) {
    CHECK(b["edge"].size() == 2);
    CHECK((b["tag"] == "left" || b["tag"] == "right"));
  }
}

TEST_CASE("1D two-map nodes match the quadratic-formula oracle") {
  const TwoMap1d tm = generate_1d_two_map(2);
  REQUIRE(tm.phys_nodes.size() == 3);
  CHECK(tm.phys_nodes(1) == doctest::Approx(5.0).epsilon(1e-14));
  // F1(xi) = 4 xi^2 + 6 xi = 5  ->  xi = (-6 + sqrt(116)) / 8.
  CHECK(tm.param1(1) ==
        doctest::Approx((-6.0 + std::sqrt(116.0)) / 8.0).epsilon(1e-10));
  CHECK(tm.param1(0) == doctest::Approx(0.0));
  CHECK(tm.param1(2) == doctest::Approx(1.0));
  CHECK(tm.param2(0) == doctest::Approx(0.0));
  CHECK(tm.param2(2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(generate_1d_two_map(1), ConstructionError);
}
