#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "ciga/assembly.hpp"
#include "ciga/exact_fields.hpp"
#include "ciga/generators.hpp"
#include "ciga/norms.hpp"

using namespace ciga;

namespace {

struct Problem {
  MultiPatchMesh mesh;
  InterfaceSet ifaces;
  ConvPatchIndex index;

  Problem(MultiPatchMesh m, int s)
      : mesh(std::move(m)),
        ifaces(detect_interfaces(mesh)),
        index(build_conv_patch_sets(mesh, ifaces, s)) {}

  ShapeTable table(int p, int s, CompatMode mode) const {
    ConvSpec spec;
    spec.p = p;
    spec.s = s;
    return ShapeTable(mesh, ifaces, index, spec, mode);
  }
};

NurbsPatch square_patch(int id, double x0, double x1, double y0, double y1) {
  Matrix pts(4, 2);
  pts << x0, y0, x1, y0, x0, y1, x1, y1;
  return NurbsPatch(id,
                    {KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)},
                    ControlNet({2, 2}, pts, Vector::Ones(4)),
                    PatchKind::BSpline);
}

PatchGrid grid2d(int n) {
  PatchGrid g;
  g.nelem = {n, n};
  for (int m = 0; m < 2; ++m) {
    g.abscissae[m].resize(n + 1);
    for (int i = 0; i <= n; ++i) g.abscissae[m][i] = double(i) / n;
  }
  return g;
}

// Two unit squares side by side with every outer side tagged.
MultiPatchMesh two_squares_tagged(int n) {
  std::vector<BoundarySideTag> tags;
  tags.push_back({0, 1, 0.0, "wall"});  // x = 0
  tags.push_back({1, 1, 1.0, "wall"});  // x = 2
  for (int p = 0; p < 2; ++p) {
    tags.push_back({p, 0, 0.0, "wall"});  // y = 0
    tags.push_back({p, 0, 1.0, "wall"});  // y = 1
  }
  return MultiPatchMesh::build(
      {square_patch(0, 0, 1, 0, 1), square_patch(1, 1, 2, 0, 1)},
      {grid2d(n), grid2d(n)}, tags);
}

double solution_max_error(const Problem& prob, const ShapeTable& table,
                          const DofSystem& system, const Vector& u,
                          const ScalarField& exact) {
  double worst = 0.0;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  for (std::size_t p = 0; p < prob.mesh.patches().size(); ++p)
    for (int t = 0; t < 30; ++t) {
      Vector xi(2);
      xi << unif(rng), unif(rng);
      const ShapeEval sh = table.eval_at(static_cast<int>(p), xi);
      double uh = 0.0;
      for (std::size_t j = 0; j < sh.global_ids.size(); ++j)
        uh += u(system.dofs.dof(static_cast<int>(p), sh.global_ids[j], 0)) *
              sh.values(static_cast<int>(j));
      worst = std::max(worst, std::abs(uh - exact(sh.x)));
    }
  return worst;
}

}  // namespace

TEST_CASE("Poisson patch test: linear field exact in all modes") {
  const ScalarField lin = [](const Vector& x) { return x(0) - 2.0 * x(1); };
  const ScalarField zero = [](const Vector&) { return 0.0; };

  // B-spline squares: the merged-dof modes recover the linear field to
  // machine precision for every order.
  {
    const Problem prob(two_squares_tagged(3), 2);
    for (int p : {1, 2, 3})
      for (CompatMode mode : {CompatMode::Nodal, CompatMode::G0}) {
        const ShapeTable table = prob.table(p, 2, mode);
        SolveConfig cfg;
        cfg.mode = mode;
        const DofSystem sys =
            assemble_poisson(table, prob.ifaces, zero, lin, cfg);
        const Vector u = solve_system(sys, cfg);
        CHECK(solution_max_error(prob, table, sys, u, lin) < 1e-9);
      }
  }
  // The pure penalty coupling has no flux terms, so it carries a
  // consistency error that decays like 1/rho instead of vanishing.
  {
    const Problem prob(two_squares_tagged(3), 2);
    auto err_at = [&](double rho) {
      const ShapeTable table = prob.table(2, 2, CompatMode::Penalty);
      SolveConfig cfg;
      cfg.mode = CompatMode::Penalty;
      cfg.penalty_rho = rho;
      const DofSystem sys =
          assemble_poisson(table, prob.ifaces, zero, lin, cfg);
      const Vector u = solve_system(sys, cfg);
      return solution_max_error(prob, table, sys, u, lin);
    };
    const double e1 = err_at(3e4);
    const double e2 = err_at(3e6);
    CHECK(e1 < 1e-4);
    CHECK(e2 < 0.02 * e1);
  }
  // Single square patch (no interface, so every mode coincides): exact
  // for any p, order capped by the patch width.
  {
    NurbsPatch sq = square_patch(0, 0, 1, 0, 1);
    std::vector<BoundarySideTag> tags{
        {0, 1, 0.0, "w"}, {0, 1, 1.0, "w"}, {0, 0, 0.0, "w"}, {0, 0, 1.0, "w"}};
    const Problem prob(MultiPatchMesh::build({sq}, {grid2d(4)}, tags), 2);
    for (int p : {1, 2, 3})
      for (CompatMode mode :
           {CompatMode::Nodal, CompatMode::G0, CompatMode::Penalty}) {
        const ShapeTable table = prob.table(p, 2, mode);
        SolveConfig cfg;
        cfg.mode = mode;
        const DofSystem sys =
            assemble_poisson(table, prob.ifaces, zero, lin, cfg);
        const Vector u = solve_system(sys, cfg);
        CHECK(solution_max_error(prob, table, sys, u, lin) < 1e-10);
      }
  }
}

TEST_CASE("NURBS plate: patch test per mode") {
  // The rational weighting makes the default Gauss rule slightly inexact;
  // refining the rule drives the merged-dof modes to machine precision.
  // The penalty mode plateaus at its interface consistency error instead.
  const ScalarField lin = [](const Vector& x) { return x(0) + x(1); };
  const ScalarField zero = [](const Vector&) { return 0.0; };
  const Problem prob(generate_plate_with_hole(0), 2);
  auto err_at = [&](CompatMode mode, int q) {
    const ShapeTable table = prob.table(2, 2, mode);
    SolveConfig cfg;
    cfg.mode = mode;
    cfg.quadrature_order = q;
    const DofSystem sys = assemble_poisson(table, prob.ifaces, zero, lin, cfg);
    const Vector u = solve_system(sys, cfg);
    return solution_max_error(prob, table, sys, u, lin);
  };
  CHECK(err_at(CompatMode::G0, 4) < 1e-7);
  CHECK(err_at(CompatMode::G0, 12) < 1e-12);
  CHECK(err_at(CompatMode::Nodal, 12) < 1e-12);
  const double pen4 = err_at(CompatMode::Penalty, 4);
  const double pen12 = err_at(CompatMode::Penalty, 12);
  CHECK(pen12 > 1e-5);             // inconsistency, not quadrature
  CHECK(pen12 < 1.5 * pen4);       // and it does not blow up
}

TEST_CASE("constant Dirichlet data gives the constant solution") {
  const Problem prob(two_squares_tagged(2), 1);
  const ShapeTable table = prob.table(1, 1, CompatMode::Nodal);
  SolveConfig cfg;
  const DofSystem sys = assemble_poisson(
      table, prob.ifaces, [](const Vector&) { return 0.0; },
      [](const Vector&) { return 3.5; }, cfg);
  const Vector u = solve_system(sys, cfg);
  CHECK((u.array() - 3.5).abs().maxCoeff() < 1e-10);
}

TEST_CASE("stiffness matrix is symmetric before constraints") {
  const Problem prob(generate_plate_with_hole(0), 2);
  for (CompatMode mode : {CompatMode::Nodal, CompatMode::Penalty}) {
    const ShapeTable table = prob.table(2, 2, mode);
    SolveConfig cfg;
    cfg.mode = mode;
    const DofSystem sys = assemble_poisson(
        table, prob.ifaces, exact::hump_source,
        [](const Vector& x) { return exact::hump_value(x); }, cfg);
    const Eigen::SparseMatrix<double> diff =
        Eigen::SparseMatrix<double>(sys.K.transpose()) - sys.K;
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
        worst = std::max(worst, std::abs(it.value()));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("assembly without Dirichlet data is rejected") {
  NurbsPatch sq = square_patch(0, 0, 1, 0, 1);
  const MultiPatchMesh mesh = MultiPatchMesh::build({sq}, {grid2d(2)}, {});
  const InterfaceSet none;
  const ConvPatchIndex idx = build_conv_patch_sets(mesh, none, 1);
  ConvSpec spec;
  spec.p = 1;
  spec.s = 1;
  const ShapeTable table(mesh, none, idx, spec, CompatMode::Nodal);
  SolveConfig cfg;
  CHECK_THROWS_AS(assemble_poisson(
                      table, none, [](const Vector&) { return 1.0; },
                      [](const Vector&) { return 0.0; }, cfg),
                  ConstructionError);
}

TEST_CASE("solve_system solves handmade systems") {
  // Borrow a dof map from a trivial mesh; solve_system reads only K, f,
  // and the constraint list.
  NurbsPatch sq = square_patch(0, 0, 1, 0, 1);
  const MultiPatchMesh mesh = MultiPatchMesh::build({sq}, {grid2d(1)}, {});
  const InterfaceSet none;
  DofSystem sys{Eigen::SparseMatrix<double>(), Vector(),
                std::vector<Constraint>{},
                DofMap(mesh, none, CompatMode::Nodal, 1)};

  SUBCASE("identity") {
    sys.K.resize(4, 4);
    sys.K.setIdentity();
    sys.f = Vector::LinSpaced(4, 1.0, 4.0);
    const Vector u = solve_system(sys, SolveConfig{});
    CHECK((u - sys.f).norm() < 1e-12);
  }
  SUBCASE("2x2 SPD with one constraint") {
    sys.K.resize(4, 4);
    std::vector<Eigen::Triplet<double>> trip{
        {0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0},
        {2, 2, 1.0}, {3, 3, 1.0}};
    sys.K.setFromTriplets(trip.begin(), trip.end());
    sys.f = Vector::Zero(4);
    sys.f << 1.0, 2.0, 0.0, 0.0;
    const Vector u = solve_system(sys, SolveConfig{});
    CHECK(u(0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(u(1) == doctest::Approx(0.6).epsilon(1e-12));

    sys.constraints.push_back({0, 1.0});
    const Vector uc = solve_system(sys, SolveConfig{});
    CHECK(uc(0) == doctest::Approx(1.0).epsilon(1e-12));
    // Remaining equation: 3 u1 = 2 - 1.
    CHECK(uc(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("elasticity constant-strain patch test") {
  const Problem prob(two_squares_tagged(3), 2);
  const double E = 1e3, nu = 0.3;
  const double ax = 2e-3, by = -1e-3, cs = 5e-4;
  const ScalarField ux = [&](const Vector& x) { return ax * x(0) + cs * x(1); };
  const ScalarField uy = [&](const Vector& x) { return cs * x(0) + by * x(1); };

  ElasticityBC bc;
  bc.dirichlet.push_back({"wall", 0, ux});
  bc.dirichlet.push_back({"wall", 1, uy});
  const Eigen::Matrix3d D = plane_stress_matrix(E, nu);
  Eigen::Vector3d strain(ax, by, 2 * cs);
  const Eigen::Vector3d sig = D * strain;

  auto norms_at = [&](CompatMode mode, double rho) {
    const ShapeTable table = prob.table(2, 2, mode);
    SolveConfig cfg;
    cfg.mode = mode;
    cfg.penalty_rho = rho;
    const DofSystem sys =
        assemble_elasticity(table, prob.ifaces, E, nu, bc, cfg);
    const Vector u = solve_system(sys, cfg);
    ExactElasticity exact;
    exact.displacement = [&](const Vector& x) {
      return Vec2(ux(x), uy(x));
    };
    exact.stress = [&](const Vector&) { return sig; };
    return compute_error_norms_elasticity(table, sys.dofs, u, D, exact);
  };
  for (CompatMode mode : {CompatMode::Nodal, CompatMode::G0}) {
    const ErrorNorms norms = norms_at(mode, 0.0);
    CHECK(norms.L2 < 1e-9);
    CHECK(norms.energy < 1e-9);
  }
  // Penalty coupling: consistency error that decays like 1/rho.
  const ErrorNorms pen1 = norms_at(CompatMode::Penalty, 3e4);
  const ErrorNorms pen2 = norms_at(CompatMode::Penalty, 3e6);
  CHECK(pen1.energy < 1e-2);
  CHECK(pen2.energy < 0.02 * pen1.energy);
}

TEST_CASE("fully constrained zero-traction case stays at rest") {
  const Problem prob(generate_plate_with_hole(0), 2);
  const ShapeTable table = prob.table(2, 2, CompatMode::Nodal);
  ElasticityBC bc;
  const ScalarField zero = [](const Vector&) { return 0.0; };
  bc.dirichlet = {{"sym_x", 0, zero}, {"sym_y", 1, zero}};
  // No Neumann data anywhere: the only solution is u = 0.
  SolveConfig cfg;
  const DofSystem sys =
      assemble_elasticity(table, prob.ifaces, 1e3, 0.3, bc, cfg);
  const Vector u = solve_system(sys, cfg);
  CHECK(u.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("error norms: zero solution normalizes to 1, broken = single") {
  const Problem prob(two_squares_tagged(2), 1);
  const ShapeTable table = prob.table(1, 1, CompatMode::Nodal);
  const DofMap dofs(prob.mesh, prob.ifaces, CompatMode::Nodal, 1);
  ExactScalar exact;
  exact.value = [](const Vector& x) { return 1.0 + x(0); };
  exact.gradient = [](const Vector&) { return Vec2(1.0, 0.0); };
  const Vector zero = Vector::Zero(dofs.count());
  const ErrorNorms norms = compute_error_norms(table, dofs, zero, exact);
  CHECK(norms.L2_rel == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norms.energy_rel == doctest::Approx(1.0).epsilon(1e-12));

  // Nodal interpolant of a smooth field: the error is interpolation error
  // only, and it shrinks monotonically under refinement.
  ExactScalar smooth;
  smooth.value = [](const Vector& x) { return std::sin(x(0)) * x(1); };
  smooth.gradient = [](const Vector& x) {
    return Vec2(std::cos(x(0)) * x(1), std::sin(x(0)));
  };
  auto interp_error = [&](int n) {
    const Problem fine(two_squares_tagged(n), 1);
    const ShapeTable ft = fine.table(1, 1, CompatMode::Nodal);
    const DofMap fd(fine.mesh, fine.ifaces, CompatMode::Nodal, 1);
    Vector u(fd.count());
    for (std::size_t p = 0; p < fine.mesh.patches().size(); ++p) {
      const PatchGrid& g = fine.mesh.grids()[p];
      for (int j = 0; j <= g.nelem[1]; ++j)
        for (int i = 0; i <= g.nelem[0]; ++i) {
          const int id = g.node_id(i, j);
          u(fd.dof(static_cast<int>(p), id, 0)) =
              smooth.value(fine.mesh.nodes().row(id).transpose());
        }
    }
    return compute_error_norms(ft, fd, u, smooth).L2;
  };
  const double e4 = interp_error(4);
  const double e8 = interp_error(8);
  const double e16 = interp_error(16);
  CHECK(e4 > e8);
  CHECK(e8 > e16);
  CHECK(e8 / e16 > 3.0);  // roughly O(h^2)
  CHECK(e8 / e16 < 5.0);
}

TEST_CASE("interface deviation: constant field deviates by zero") {
  const Problem prob(generate_plate_with_hole(0), 2);
  const ShapeTable table = prob.table(2, 2, CompatMode::Nodal);
  const DofMap dofs(prob.mesh, prob.ifaces, CompatMode::Nodal, 1);
  const Vector ones = Vector::Ones(dofs.count());
  CHECK(interface_deviation(table, prob.ifaces.pairs[0], dofs, ones) < 1e-12);
  CHECK(interface_jump_max(table, prob.ifaces.pairs[0], dofs, ones, 50) <
        1e-12);

  InterfacePair empty;
  CHECK_THROWS_AS(interface_deviation(table, empty, dofs, ones), DomainError);
}

TEST_CASE("matrix market export and quadrature default") {
  const Problem prob(two_squares_tagged(2), 1);
  const ShapeTable table = prob.table(1, 1, CompatMode::Nodal);
  SolveConfig cfg;
  CHECK(quadrature_points(table, cfg) == 3);  // p + 2
  const DofSystem sys = assemble_poisson(
      table, prob.ifaces, [](const Vector&) { return 0.0; },
      [](const Vector&) { return 1.0; }, cfg);
  const std::string path = "/tmp/ciga_test_K.mtx";
  write_matrix_market(sys.K, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("MatrixMarket") != std::string::npos);
}
