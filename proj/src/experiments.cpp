#include "ciga/experiments.hpp"

#include <cmath>

#include "ciga/assembly.hpp"
#include "ciga/exact_fields.hpp"
#include "ciga/gauss.hpp"
#include "ciga/generators.hpp"
#include "ciga/inverse_map.hpp"
#include "ciga/norms.hpp"

namespace ciga {

namespace {

ConvSpec make_spec(const ExperimentConfig& cfg) {
  ConvSpec spec;
  spec.s = cfg.s;
  spec.a = cfg.a;
  spec.p = cfg.p;
  spec.rbf_kind = cfg.rbf;
  return spec;
}

void fill_meta(ConvergenceReport& rep, const std::string& experiment,
               const std::string& variant, const ExperimentConfig& cfg) {
  rep.experiment = experiment;
  rep.variant = variant;
  rep.p = cfg.p;
  rep.s = cfg.s;
  rep.a = cfg.a;
  rep.compat = cfg.compat;
  rep.rbf = cfg.rbf;
}

// Nodal interpolant value at a shape evaluation: by the Kronecker delta
// property the interpolant is sum_J u_J N~_J.
double interp_value(const ShapeEval& sh, const Vector& nodal) {
  double v = 0.0;
  for (std::size_t j = 0; j < sh.global_ids.size(); ++j)
    v += nodal(sh.global_ids[j]) * sh.values(static_cast<int>(j));
  return v;
}

}  // namespace

ConvergenceReport run_interp1d(const std::string& variant,
                               const ExperimentConfig& cfg) {
  ConvergenceReport rep;
  fill_meta(rep, "interp1d", variant, cfg);
  const bool smooth = variant == "smooth";
  if (!smooth && variant != "oscillatory")
    throw DomainError("run_interp1d: unknown variant " + variant);
  const int levels = cfg.levels > 0 ? cfg.levels : 7;
  const ConvSpec spec = make_spec(cfg);
  const int nq = cfg.p + 2;
  const InterfaceSet no_ifaces;

  for (int L = 0; L < levels; ++L) {
    const int n = 10 << L;
    const TwoMap1d tm = generate_1d_two_map(n);

    auto make_mesh = [&](const NurbsPatch& map, const Vector& par) {
      PatchGrid g;
      g.nelem = {n, 0};
      g.abscissae[0].assign(par.data(), par.data() + n + 1);
      return MultiPatchMesh::build({map}, {g}, {});
    };
    const MultiPatchMesh mesh1 = make_mesh(tm.map1, tm.param1);
    const MultiPatchMesh mesh2 = make_mesh(tm.map2, tm.param2);
    const ConvPatchIndex idx1 = build_conv_patch_sets(mesh1, no_ifaces, cfg.s);
    const ConvPatchIndex idx2 = build_conv_patch_sets(mesh2, no_ifaces, cfg.s);
    const ShapeTable t1(mesh1, no_ifaces, idx1, spec, CompatMode::Nodal);
    const ShapeTable t2(mesh2, no_ifaces, idx2, spec, CompatMode::Nodal);

    // Shared nodal data, addressed through each mesh's own numbering.
    Vector u1 = Vector::Zero(mesh1.node_count());
    Vector u2 = Vector::Zero(mesh2.node_count());
    for (int i = 0; i <= n; ++i) {
      const double ui =
          smooth ? std::sin(tm.phys_nodes(i)) : 1.0 + (i % 2);
      u1(mesh1.grids()[0].node_id(i)) = ui;
      u2(mesh2.grids()[0].node_id(i)) = ui;
    }

    InverseMapConfig inv;
    inv.warm_start = WarmStartKind::None;  // explicit per-element seed below
    double jump2 = 0, a2 = 0, b2 = 0;
    for (int k = 0; k < n; ++k) {
      const GaussRule rule =
          gauss_on_interval(nq, tm.param1(k), tm.param1(k + 1));
      for (int q = 0; q < nq; ++q) {
        Vector xi1(1);
        xi1(0) = rule.points(q);
        const ShapeEval s1 = t1.eval_at(0, xi1);
        const double dx = std::abs(s1.det) * rule.weights(q);
        // Seed the second map's inversion from the matching element.
        const double frac = (xi1(0) - tm.param1(k)) /
                            (tm.param1(k + 1) - tm.param1(k));
        Vector seed(1);
        seed(0) = tm.param2(k) + frac * (tm.param2(k + 1) - tm.param2(k));
        const Vector xi2 = invert_point(tm.map2, s1.x, inv, &seed);
        const ShapeEval s2 = t2.eval_at(0, xi2);
        const double v1 = interp_value(s1, u1);
        const double v2 = interp_value(s2, u2);
        jump2 += dx * (v1 - v2) * (v1 - v2);
        a2 += dx * v1 * v1;
        b2 += dx * v2 * v2;
      }
    }
    ReportRow row;
    row.level = L;
    row.h = 10.0 / n;
    row.dof_count = n + 1;
    row.interface_deviation =
        std::sqrt(jump2) / (std::sqrt(a2) + std::sqrt(b2));
    rep.rows.push_back(row);
  }
  return rep;
}

ConvergenceReport run_interp2d(const ExperimentConfig& cfg) {
  ConvergenceReport rep;
  fill_meta(rep, "interp2d", "", cfg);
  const int levels = cfg.levels > 0 ? cfg.levels : 6;
  const ConvSpec spec = make_spec(cfg);
  const int nq = cfg.p + 2;
  const double R = 0.5;

  for (int L = 0; L < levels; ++L) {
    const MultiPatchMesh mesh =
        generate_plate_with_hole(L, true, cfg.compat == CompatMode::G0);
    const InterfaceSet ifaces = detect_interfaces(mesh);
    const ConvPatchIndex index = build_conv_patch_sets(mesh, ifaces, cfg.s);
    const ShapeTable table(mesh, ifaces, index, spec, cfg.compat);

    Vector nodal = Vector::Zero(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i)
      nodal(i) = exact::kirsch_stress(mesh.nodes().row(i).transpose(), R)(0);

    double e2 = 0, n2 = 0;
    for (std::size_t e = 0; e < mesh.elements().size(); ++e) {
      const Element& el = mesh.elements()[e];
      const PatchGrid& g = mesh.grids()[el.patch];
      const GaussRule r0 = gauss_on_interval(nq, g.abscissae[0][el.i0],
                                             g.abscissae[0][el.i0 + 1]);
      const GaussRule r1 = gauss_on_interval(nq, g.abscissae[1][el.j0],
                                             g.abscissae[1][el.j0 + 1]);
      for (int q1 = 0; q1 < nq; ++q1)
        for (int q0 = 0; q0 < nq; ++q0) {
          Vector xi(2);
          xi << r0.points(q0), r1.points(q1);
          const ShapeEval sh = table.eval(static_cast<int>(e), xi);
          const double w =
              std::abs(sh.det) * r0.weights(q0) * r1.weights(q1);
          const double ue = exact::kirsch_stress(sh.x, R)(0);
          const double uh = interp_value(sh, nodal);
          e2 += w * (uh - ue) * (uh - ue);
          n2 += w * ue * ue;
        }
    }
    ReportRow row;
    row.level = L;
    row.h = 1.0 / (5 << L);
    row.dof_count = mesh.node_count();
    row.error_L2 = std::sqrt(e2);
    rep.rows.push_back(row);
  }
  return rep;
}

ConvergenceReport run_poisson(const ExperimentConfig& cfg) {
  ConvergenceReport rep;
  fill_meta(rep, "poisson", "", cfg);
  const int levels = cfg.levels > 0 ? cfg.levels : (cfg.deep ? 8 : 4);
  const ConvSpec spec = make_spec(cfg);

  for (int L = 0; L < levels; ++L) {
    const MultiPatchMesh mesh =
        generate_plate_with_hole(L, true, cfg.compat == CompatMode::G0);
    const InterfaceSet ifaces = detect_interfaces(mesh);
    const ConvPatchIndex index = build_conv_patch_sets(mesh, ifaces, cfg.s);
    const ShapeTable table(mesh, ifaces, index, spec, cfg.compat);

    SolveConfig sc;
    sc.mode = cfg.compat;
    const DofSystem system = assemble_poisson(
        table, ifaces,
        [](const Vector& x) { return exact::hump_source(x); },
        [](const Vector& x) { return exact::hump_value(x); }, sc);
    const Vector u = solve_system(system, sc);
    const ErrorNorms norms =
        compute_error_norms(table, system.dofs, u, exact::hump_scalar());

    ReportRow row;
    row.level = L;
    row.h = 1.0 / (5 << L);
    row.dof_count = system.dofs.count();
    row.error_L2 = norms.L2_rel;
    row.error_H1_broken = norms.H1_rel;
    row.error_energy = norms.energy_rel;
    row.interface_deviation =
        interface_deviation(table, ifaces.pairs.at(0), system.dofs, u);
    rep.rows.push_back(row);
  }
  return rep;
}

ConvergenceReport run_elasticity(const ExperimentConfig& cfg) {
  ConvergenceReport rep;
  fill_meta(rep, "elasticity", "", cfg);
  const int levels = cfg.levels > 0 ? cfg.levels : 4;
  const ConvSpec spec = make_spec(cfg);
  const double R = 0.5, E = 1e3, nu = 0.3;

  ElasticityBC bc;
  const ScalarField zero = [](const Vector&) { return 0.0; };
  bc.dirichlet = {{"sym_x", 0, zero}, {"sym_y", 1, zero}};
  bc.neumann_tags = {"outer"};
  bc.traction = [R](const Vector& x, const Vec2& n) {
    return exact::kirsch_traction(x, n, R);
  };

  for (int L = 0; L < levels; ++L) {
    const MultiPatchMesh mesh =
        generate_plate_with_hole(L, true, cfg.compat == CompatMode::G0);
    const InterfaceSet ifaces = detect_interfaces(mesh);
    const ConvPatchIndex index = build_conv_patch_sets(mesh, ifaces, cfg.s);
    const ShapeTable table(mesh, ifaces, index, spec, cfg.compat);

    SolveConfig sc;
    sc.mode = cfg.compat;
    const DofSystem system = assemble_elasticity(table, ifaces, E, nu, bc, sc);
    const Vector u = solve_system(system, sc);
    const ErrorNorms norms = compute_error_norms_elasticity(
        table, system.dofs, u, plane_stress_matrix(E, nu),
        exact::kirsch_fields(R, E, nu));

    ReportRow row;
    row.level = L;
    row.h = 1.0 / (5 << L);
    row.dof_count = system.dofs.count();
    row.error_L2 = norms.L2_rel;
    row.error_H1_broken = norms.H1_rel;
    row.error_energy = norms.energy_rel;
    row.interface_deviation =
        interface_deviation(table, ifaces.pairs.at(0), system.dofs, u);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace ciga
