#ifndef CIGA_REPORT_HPP
#define CIGA_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "ciga/conv_patch.hpp"
#include "ciga/shape_table.hpp"

namespace ciga {

struct ReportRow {
  int level = 0;
  double h = 0.0;
  long dof_count = 0;
  double error_L2 = 0.0;
  double error_H1_broken = 0.0;
  double error_energy = 0.0;
  double interface_deviation = 0.0;
};

/// Fitted log-log rates per error column; unset if fewer than 3 usable points.
struct FittedRates {
  std::optional<double> L2, H1_broken, energy, interface_deviation;
};

struct ConvergenceReport {
  std::string experiment;  // interp1d | interp2d | poisson | elasticity
  std::string variant;     // e.g. "smooth", "oscillatory", or ""
  int p = 2;
  int s = 2;
  double a = 0.0;  // 0 means the default (s+1) * h dilation
  CompatMode compat = CompatMode::Nodal;
  RbfKind rbf = RbfKind::CubicSpline;
  std::vector<ReportRow> rows;  // sorted by level, h halving

  /// Rates fitted over the finest (up to) 3 levels of each column.
  FittedRates fitted_rates() const;
};

/// Least-squares slope of log(e) vs log(h). Requires >= 3 points, all
/// strictly positive; throws DomainError otherwise.
double estimate_rate(const std::vector<double>& errors,
                     const std::vector<double>& h);

/// One acceptance check evaluated against a report.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Target bands for the report's configuration (empty if the configuration
/// has no associated targets).
std::vector<CheckResult> check_acceptance(const ConvergenceReport& report);

/// Writes <out_dir>/<experiment>[_<variant>]_p<p>_s<s>_<compat>.csv with the
/// row columns, plus a summary.txt line set comparing fitted rates against
/// the target bands with PASS/FAIL flags. Returns the CSV path.
std::string emit_report(const ConvergenceReport& report,
                        const std::string& out_dir);

/// Parses a CSV produced by emit_report back into rows (metadata from the
/// header comment line).
ConvergenceReport parse_report_csv(const std::string& path);

std::string compat_name(CompatMode mode);
std::string rbf_name(RbfKind kind);

}  // namespace ciga

#endif
