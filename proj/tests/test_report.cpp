#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ciga/report.hpp"
#include "ciga/types.hpp"

using namespace ciga;

namespace {

ConvergenceReport sample_report() {
  ConvergenceReport rep;
  rep.experiment = "poisson";
  rep.variant = "";
  rep.p = 2;
  rep.s = 2;
  rep.a = 3.0;
  rep.compat = CompatMode::G0;
  rep.rbf = RbfKind::Gaussian;
  for (int level = 0; level < 4; ++level) {
    ReportRow r;
    r.level = level;
    r.h = 0.2 / (1 << level);
    r.dof_count = 100L * (1 << (2 * level));
    r.error_L2 = 3.0 * r.h * r.h * r.h;
    r.error_H1_broken = 2.0 * r.h * r.h;
    r.error_energy = 1.5 * r.h * r.h;
    r.interface_deviation = 1e-12;
    rep.rows.push_back(r);
  }
  return rep;
}

std::string temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ciga_report_test";
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("estimate_rate recovers exact power laws") {
  std::vector<double> h{0.2, 0.1, 0.05, 0.025};
  std::vector<double> e2, e3;
  for (double v : h) {
    e2.push_back(v * v);
    e3.push_back(5.0 * v * v * v);
  }
  CHECK(estimate_rate(e2, h) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(estimate_rate(e3, h) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("estimate_rate matches the hand-computed least-squares slope") {
  // Normal equations of log(e) against log(h), worked out independently.
  const std::vector<double> h{0.1, 0.05, 0.025};
  const std::vector<double> e{1e-2, 2.6e-3, 6.2e-4};
  CHECK(estimate_rate(e, h) == doctest::Approx(2.00579398713762).epsilon(1e-12));
}

TEST_CASE("estimate_rate input validation") {
  CHECK_THROWS_AS(estimate_rate({1e-2, 1e-3}, {0.1, 0.05}), DomainError);
  CHECK_THROWS_AS(estimate_rate({1e-2, 1e-3, 0.0}, {0.1, 0.05, 0.025}),
                  DomainError);
  CHECK_THROWS_AS(estimate_rate({1e-2, -1e-3, 1e-4}, {0.1, 0.05, 0.025}),
                  DomainError);
  CHECK_THROWS_AS(estimate_rate({1e-2, 1e-3, 1e-4}, {0.1, 0.05}), DomainError);
}

TEST_CASE("fitted rates use the finest three levels") {
  ConvergenceReport rep = sample_report();
  // Pollute the coarsest level: the fit over the finest three is unchanged.
  rep.rows[0].error_L2 = 1e6;
  const FittedRates rates = rep.fitted_rates();
  REQUIRE(rates.L2.has_value());
  REQUIRE(rates.energy.has_value());
  CHECK(*rates.L2 == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(*rates.energy == doctest::Approx(2.0).epsilon(1e-10));
  // Constant positive deviation: fitted slope 0, not dropped.
  REQUIRE(rates.interface_deviation.has_value());
  CHECK(*rates.interface_deviation == doctest::Approx(0.0).epsilon(1e-10));

  // Fewer than 3 positive values: no rate.
  rep.rows.resize(2);
  CHECK(!rep.fitted_rates().L2.has_value());
}

TEST_CASE("emit and parse round-trip") {
  const ConvergenceReport rep = sample_report();
  const std::string dir = temp_dir();
  const std::string csv = emit_report(rep, dir);
  CHECK(std::filesystem::exists(csv));

  const ConvergenceReport back = parse_report_csv(csv);
  CHECK(back.experiment == rep.experiment);
  CHECK(back.variant == rep.variant);
  CHECK(back.p == rep.p);
  CHECK(back.s == rep.s);
  CHECK(back.a == doctest::Approx(rep.a).epsilon(1e-14));
  CHECK(back.compat == rep.compat);
  CHECK(back.rbf == rep.rbf);
  REQUIRE(back.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(back.rows[i].level == rep.rows[i].level);
    CHECK(back.rows[i].h == doctest::Approx(rep.rows[i].h).epsilon(1e-14));
    CHECK(back.rows[i].dof_count == rep.rows[i].dof_count);
    CHECK(back.rows[i].error_L2 ==
          doctest::Approx(rep.rows[i].error_L2).epsilon(1e-14));
    CHECK(back.rows[i].interface_deviation ==
          doctest::Approx(rep.rows[i].interface_deviation).epsilon(1e-14));
  }
  const FittedRates ra = rep.fitted_rates(), rb = back.fitted_rates();
  CHECK(*rb.L2 == doctest::Approx(*ra.L2).epsilon(1e-12));
  CHECK(*rb.energy == doctest::Approx(*ra.energy).epsilon(1e-12));
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty report produces a header-only CSV") {
  ConvergenceReport rep = sample_report();
  rep.rows.clear();
  const std::string dir = temp_dir();
  const std::string csv = emit_report(rep, dir);
  std::ifstream in(csv);
  REQUIRE(in.good());
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);  // metadata comment + column header
  const ConvergenceReport back = parse_report_csv(csv);
  CHECK(back.rows.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("acceptance checks flag bands") {
  // Passing G0 Poisson configuration: tiny deviation, cubic energy decay.
  ConvergenceReport rep = sample_report();
  auto checks = check_acceptance(rep);
  REQUIRE(checks.size() == 2);
  CHECK(checks[0].pass);  // deviation <= 1e-10 at every level
  CHECK(checks[1].pass);  // energy rate >= 1.8
  // Break the deviation bound at one level.
  rep.rows[2].interface_deviation = 1e-6;
  checks = check_acceptance(rep);
  CHECK(!checks[0].pass);
  // Flatten the energy decay: rate drops below the band.
  for (ReportRow& r : rep.rows) r.error_energy = 0.5 * std::sqrt(r.h);
  checks = check_acceptance(rep);
  CHECK(!checks[1].pass);

  // Configuration without targets yields no checks.
  ConvergenceReport other = sample_report();
  other.experiment = "interp2d";
  other.p = 1;
  other.s = 1;
  CHECK(check_acceptance(other).empty());
}
