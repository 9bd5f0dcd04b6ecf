// Benchmark and debugging command-line front end.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ciga/experiments.hpp"
#include "ciga/generators.hpp"
#include "ciga/inverse_map.hpp"
#include "ciga/patch_io.hpp"

namespace {

ciga::CompatMode parse_compat(const std::string& s) {
  if (s == "nodal") return ciga::CompatMode::Nodal;
  if (s == "g0") return ciga::CompatMode::G0;
  if (s == "penalty") return ciga::CompatMode::Penalty;
  throw CLI::ValidationError("--compat", "expected nodal|g0|penalty");
}

ciga::RbfKind parse_rbf(const std::string& s) {
  if (s == "cubic") return ciga::RbfKind::CubicSpline;
  if (s == "gaussian") return ciga::RbfKind::Gaussian;
  throw CLI::ValidationError("--rbf", "expected cubic|gaussian");
}

int run_bench(const std::string& experiment, const std::string& variant,
              const ciga::ExperimentConfig& cfg, const std::string& out_dir,
              bool check) {
  std::vector<ciga::ConvergenceReport> reports;
  if (experiment == "interp1d") {
    if (variant.empty()) {
      reports.push_back(ciga::run_interp1d("smooth", cfg));
      reports.push_back(ciga::run_interp1d("oscillatory", cfg));
    } else {
      reports.push_back(ciga::run_interp1d(variant, cfg));
    }
  } else if (experiment == "interp2d") {
    reports.push_back(ciga::run_interp2d(cfg));
  } else if (experiment == "poisson") {
    reports.push_back(ciga::run_poisson(cfg));
  } else if (experiment == "elasticity") {
    reports.push_back(ciga::run_elasticity(cfg));
  }

  bool all_pass = true;
  for (const ciga::ConvergenceReport& rep : reports) {
    const std::string csv = ciga::emit_report(rep, out_dir);
    std::cout << "wrote " << csv << "\n";
    for (const ciga::CheckResult& c : ciga::check_acceptance(rep)) {
      std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  ("
                << c.detail << ")\n";
      all_pass = all_pass && c.pass;
    }
  }
  return (check && !all_pass) ? 1 : 0;
}

int run_invert(const std::string& patch_file, const std::string& points_file) {
  const ciga::NurbsPatch patch = ciga::load_patch_json(patch_file);
  std::ifstream in(points_file);
  if (!in) {
    std::cerr << "cannot read " << points_file << "\n";
    return 1;
  }
  std::cout << "xi0,xi1,residual\n";
  std::string line;
  int failures = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(line[0])) continue;
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    ciga::Vector x = Eigen::Map<ciga::Vector>(vals.data(), vals.size());
    try {
      const ciga::Vector xi = ciga::invert_point(patch, x);
      const double res = (patch.map_forward(xi) - x).norm();
      std::cout << xi(0) << "," << (xi.size() > 1 ? xi(1) : 0.0) << "," << res
                << "\n";
    } catch (const ciga::InversionError& e) {
      std::cout << "nan,nan," << e.best_residual << "\n";
      ++failures;
    }
  }
  return failures > 0 ? 1 : 0;
}

// Samples every shape function that is nonzero along the patch interface
// on a parametric grid, one row per (node, sample point).
int run_dump_shapes(const ciga::ExperimentConfig& cfg, int level, int samples,
                    const std::string& out_file) {
  const ciga::MultiPatchMesh mesh = ciga::generate_plate_with_hole(level);
  const ciga::InterfaceSet ifaces = ciga::detect_interfaces(mesh);
  const ciga::ConvPatchIndex index =
      ciga::build_conv_patch_sets(mesh, ifaces, cfg.s);
  ciga::ConvSpec spec;
  spec.s = cfg.s;
  spec.a = cfg.a;
  spec.p = cfg.p;
  spec.rbf_kind = cfg.rbf;
  const ciga::ShapeTable table(mesh, ifaces, index, spec, cfg.compat);

  std::ofstream out(out_file);
  if (!out) {
    std::cerr << "cannot write " << out_file << "\n";
    return 1;
  }
  out << "patch,node,x,y,xi0,xi1,value\n";
  const auto& pair = ifaces.pairs.at(0);
  for (int p = 0; p < static_cast<int>(mesh.patches().size()); ++p) {
    for (int q1 = 0; q1 <= samples; ++q1)
      for (int q0 = 0; q0 <= samples; ++q0) {
        ciga::Vector xi(2);
        // Stay strictly inside elements to keep the evaluation unambiguous.
        xi << (q0 + 0.5) / (samples + 1.0), (q1 + 0.5) / (samples + 1.0);
        const ciga::ShapeEval sh = table.eval_at(p, xi);
        for (std::size_t j = 0; j < sh.global_ids.size(); ++j) {
          const int node = sh.global_ids[j];
          if (std::find(pair.shared_nodes.begin(), pair.shared_nodes.end(),
                        node) == pair.shared_nodes.end())
            continue;
          out << p << "," << node << "," << sh.x(0) << "," << sh.x(1) << ","
              << xi(0) << "," << xi(1) << ","
              << sh.values(static_cast<int>(j)) << "\n";
        }
      }
  }
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-patch convolution-enhanced isogeometric analysis "
               "benchmarks"};
  app.require_subcommand(1);

  // bench
  std::string experiment, variant, compat = "nodal", rbf = "cubic";
  std::string out_dir = "out";
  ciga::ExperimentConfig cfg;
  bool check = false;
  CLI::App* bench = app.add_subcommand("bench", "Run a convergence benchmark");
  bench->add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember({"interp1d", "interp2d", "poisson", "elasticity"}));
  bench->add_option("--case", variant,
                    "interp1d variant (smooth|oscillatory); default both");
  bench->add_option("--p", cfg.p, "Reproducing polynomial order");
  bench->add_option("--s", cfg.s, "Convolution patch size (element layers)");
  bench->add_option("--a", cfg.a,
                    "Dilation in local-spacing units (0 = default s+1)");
  bench->add_option("--compat", compat, "Interface mode: nodal|g0|penalty");
  bench->add_option("--rbf", rbf, "Radial basis: cubic|gaussian");
  bench->add_option("--levels", cfg.levels,
                    "Refinement level count (0 = experiment default)");
  bench->add_flag("--deep", cfg.deep, "Extend Poisson sweep to 640x640");
  bench->add_option("--out", out_dir, "Output directory for CSV reports");
  bench->add_flag("--check", check,
                  "Exit nonzero if any acceptance band fails");

  // invert
  std::string patch_file, points_file;
  CLI::App* invert =
      app.add_subcommand("invert", "Invert the map of a patch JSON file");
  invert->add_option("--patch", patch_file, "Patch JSON file")->required();
  invert->add_option("--points", points_file, "CSV of physical points")
      ->required();

  // dump-shapes
  int level = 1, samples = 40;
  std::string dump_file = "shapes.csv";
  CLI::App* dump = app.add_subcommand(
      "dump-shapes", "Sample interface shape functions on the plate mesh");
  dump->add_option("--p", cfg.p, "Reproducing polynomial order");
  dump->add_option("--s", cfg.s, "Convolution patch size");
  dump->add_option("--a", cfg.a, "Dilation in local-spacing units");
  dump->add_option("--compat", compat, "Interface mode: nodal|g0|penalty");
  dump->add_option("--rbf", rbf, "Radial basis: cubic|gaussian");
  dump->add_option("--level", level, "Plate refinement level");
  dump->add_option("--samples", samples, "Sample cells per direction");
  dump->add_option("--out", dump_file, "Output CSV file");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.compat = parse_compat(compat);
    cfg.rbf = parse_rbf(rbf);
    if (bench->parsed())
      return run_bench(experiment, variant, cfg, out_dir, check);
    if (invert->parsed()) return run_invert(patch_file, points_file);
    if (dump->parsed())
      return run_dump_shapes(cfg, level, samples, dump_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
