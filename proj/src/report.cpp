#include "ciga/report.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ciga/types.hpp"

namespace ciga {

std::string compat_name(CompatMode mode) {
  switch (mode) {
    case CompatMode::Nodal: return "nodal";
    case CompatMode::G0: return "g0";
    case CompatMode::Penalty: return "penalty";
  }
  return "?";
}

std::string rbf_name(RbfKind kind) {
  return kind == RbfKind::CubicSpline ? "cubic" : "gaussian";
}

double estimate_rate(const std::vector<double>& errors,
                     const std::vector<double>& h) {
  if (errors.size() != h.size())
    throw DomainError("estimate_rate: mismatched lengths");
  if (errors.size() < 3)
    throw DomainError("estimate_rate: need at least 3 points");
  const int n = static_cast<int>(errors.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    if (!(errors[i] > 0.0) || !(h[i] > 0.0))
      throw DomainError("estimate_rate: values must be positive");
    A(i, 0) = std::log(h[i]);
    A(i, 1) = 1.0;
    b(i) = std::log(errors[i]);
  }
  // Normal equations of the log-log fit; slope is the convergence rate.
  const Eigen::Vector2d c =
      (A.transpose() * A).ldlt().solve(A.transpose() * b);
  return c(0);
}

namespace {

std::optional<double> column_rate(const std::vector<ReportRow>& rows,
                                  double ReportRow::*col) {
  std::vector<double> e, h;
  for (const ReportRow& r : rows)
    if (r.*col > 0.0 && r.h > 0.0) {
      e.push_back(r.*col);
      h.push_back(r.h);
    }
  if (e.size() < 3) return std::nullopt;
  // Fit over the finest three levels; coarse levels may be pre-asymptotic.
  const std::size_t k = e.size() - 3;
  return estimate_rate({e.begin() + k, e.end()}, {h.begin() + k, h.end()});
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void band_check(std::vector<CheckResult>& out, const std::string& name,
                std::optional<double> value, double lo, double hi) {
  CheckResult c{name, false, ""};
  if (!value) {
    c.detail = "no fitted rate (fewer than 3 positive levels)";
  } else {
    c.pass = *value >= lo && *value <= hi;
    std::ostringstream os;
    os << "value " << *value << ", band [" << lo << ", " << hi << "]";
    c.detail = os.str();
  }
  out.push_back(std::move(c));
}

}  // namespace

FittedRates ConvergenceReport::fitted_rates() const {
  FittedRates r;
  r.L2 = column_rate(rows, &ReportRow::error_L2);
  r.H1_broken = column_rate(rows, &ReportRow::error_H1_broken);
  r.energy = column_rate(rows, &ReportRow::error_energy);
  r.interface_deviation = column_rate(rows, &ReportRow::interface_deviation);
  return r;
}

std::vector<CheckResult> check_acceptance(const ConvergenceReport& rep) {
  std::vector<CheckResult> out;
  const FittedRates rates = rep.fitted_rates();
  const std::string tag =
      rep.experiment + (rep.variant.empty() ? "" : "_" + rep.variant) + " p" +
      std::to_string(rep.p) + " s" + std::to_string(rep.s) + " " +
      compat_name(rep.compat);

  if (rep.experiment == "interp1d") {
    if (rep.variant == "smooth" && rep.p >= 1 && rep.p <= 3) {
      const double t = rep.p + 1.0;
      band_check(out, tag + ": deviation rate ~ p+1", rates.interface_deviation,
                 t - 0.3, t + 0.3);
    } else if (rep.variant == "oscillatory" && (rep.p == 2 || rep.p == 3)) {
      band_check(out, tag + ": deviation rate ~ 1", rates.interface_deviation,
                 0.8, 1.2);
    }
  } else if (rep.experiment == "interp2d") {
    if (rep.p == 2 && rep.s == 2)
      band_check(out, tag + ": L2 rate >= 2.7", rates.L2, 2.7, 100.0);
    else if (rep.p == 3 && rep.s == 3)
      band_check(out, tag + ": L2 rate >= 3.6", rates.L2, 3.6, 100.0);
  } else if (rep.experiment == "poisson") {
    if (rep.compat == CompatMode::G0) {
      CheckResult dev{tag + ": deviation <= 1e-10 at every level", true, ""};
      double worst = 0.0;
      for (const ReportRow& r : rep.rows) worst = std::max(worst, r.interface_deviation);
      dev.pass = !rep.rows.empty() && worst <= 1e-10;
      dev.detail = "max deviation " + fmt(worst);
      out.push_back(std::move(dev));
      if (rep.p == 2 && rep.s == 2)
        band_check(out, tag + ": energy rate >= 1.8", rates.energy, 1.8, 100.0);
      else if (rep.p == 3 && rep.s == 3)
        band_check(out, tag + ": energy rate >= 3.0", rates.energy, 3.0, 100.0);
    } else if (rep.compat == CompatMode::Nodal && rep.p == 2 && rep.s == 2) {
      band_check(out, tag + ": energy rate in [1.0, 1.6]", rates.energy, 1.0, 1.6);
      band_check(out, tag + ": deviation rate ~ 1", rates.interface_deviation,
                 0.7, 1.3);
      for (const ReportRow& r : rep.rows)
        if (r.level == 3) {
          CheckResult c{tag + ": deviation at 40x40 in [5e-6, 5e-5]", false, ""};
          c.pass = r.interface_deviation >= 5e-6 && r.interface_deviation <= 5e-5;
          c.detail = "value " + fmt(r.interface_deviation);
          out.push_back(std::move(c));
        }
    }
  } else if (rep.experiment == "elasticity") {
    if (rep.compat == CompatMode::Nodal && (rep.p == 2 || rep.p == 3)) {
      band_check(out, tag + ": deviation rate ~ 1", rates.interface_deviation,
                 0.7, 1.3);
      band_check(out, tag + ": energy rate < 1.7 (sub-optimal)", rates.energy,
                 -100.0, 1.7);
    }
  }
  return out;
}

std::string emit_report(const ConvergenceReport& rep,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const std::string base =
      rep.experiment + (rep.variant.empty() ? "" : "_" + rep.variant) + "_p" +
      std::to_string(rep.p) + "_s" + std::to_string(rep.s) + "_" +
      compat_name(rep.compat);
  const std::string csv_path = (fs::path(out_dir) / (base + ".csv")).string();

  std::ofstream csv(csv_path);
  if (!csv) throw DomainError("emit_report: cannot write " + csv_path);
  csv << "# experiment=" << rep.experiment << ",variant=" << rep.variant
      << ",p=" << rep.p << ",s=" << rep.s << ",a=" << fmt(rep.a)
      << ",compat=" << compat_name(rep.compat) << ",rbf=" << rbf_name(rep.rbf)
      << "\n";
  csv << "level,h,dof_count,error_L2,error_H1_broken,error_energy,"
         "interface_deviation\n";
  for (const ReportRow& r : rep.rows)
    csv << r.level << "," << fmt(r.h) << "," << r.dof_count << ","
        << fmt(r.error_L2) << "," << fmt(r.error_H1_broken) << ","
        << fmt(r.error_energy) << "," << fmt(r.interface_deviation) << "\n";
  csv.close();

  const FittedRates rates = rep.fitted_rates();
  std::ofstream sum((fs::path(out_dir) / (base + ".summary.txt")).string());
  auto line = [&](const char* name, const std::optional<double>& v) {
    sum << name << ": " << (v ? fmt(*v) : std::string("n/a")) << "\n";
  };
  sum << "experiment " << base << "\n";
  line("rate_L2", rates.L2);
  line("rate_H1_broken", rates.H1_broken);
  line("rate_energy", rates.energy);
  line("rate_interface_deviation", rates.interface_deviation);
  for (const CheckResult& c : check_acceptance(rep))
    sum << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail
        << ")\n";
  return csv_path;
}

ConvergenceReport parse_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("parse_report_csv: cannot read " + path);
  ConvergenceReport rep;
  std::string line;
  auto meta_value = [](const std::string& meta, const std::string& key) {
    const std::string pat = key + "=";
    const std::size_t at = meta.find(pat);
    if (at == std::string::npos) return std::string();
    const std::size_t end = meta.find(',', at);
    return meta.substr(at + pat.size(), end == std::string::npos
                                            ? std::string::npos
                                            : end - at - pat.size());
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      rep.experiment = meta_value(line, "experiment");
      rep.variant = meta_value(line, "variant");
      if (const std::string v = meta_value(line, "p"); !v.empty())
        rep.p = std::stoi(v);
      if (const std::string v = meta_value(line, "s"); !v.empty())
        rep.s = std::stoi(v);
      if (const std::string v = meta_value(line, "a"); !v.empty())
        rep.a = std::stod(v);
      const std::string cm = meta_value(line, "compat");
      rep.compat = cm == "g0"        ? CompatMode::G0
                   : cm == "penalty" ? CompatMode::Penalty
                                     : CompatMode::Nodal;
      rep.rbf = meta_value(line, "rbf") == "gaussian" ? RbfKind::Gaussian
                                                      : RbfKind::CubicSpline;
      continue;
    }
    if (line.rfind("level,", 0) == 0) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7)
      throw DomainError("parse_report_csv: malformed row: " + line);
    ReportRow r;
    r.level = std::stoi(cells[0]);
    r.h = std::stod(cells[1]);
    r.dof_count = std::stol(cells[2]);
    r.error_L2 = std::stod(cells[3]);
    r.error_H1_broken = std::stod(cells[4]);
    r.error_energy = std::stod(cells[5]);
    r.interface_deviation = std::stod(cells[6]);
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace ciga
