#ifndef CIGA_EXPERIMENTS_HPP
#define CIGA_EXPERIMENTS_HPP

#include "ciga/report.hpp"

namespace ciga {

/// Shared knobs of the benchmark experiments.
struct ExperimentConfig {
  int p = 2;
  int s = 2;
  double a = 0.0;  // dilation in local-spacing units; 0 means s+1
  CompatMode compat = CompatMode::Nodal;
  RbfKind rbf = RbfKind::CubicSpline;
  int levels = 0;     // 0 means the per-experiment default
  bool deep = false;  // extend the Poisson sweep to the 640x640 level
};

/// 1D interpolation deviation study: two quadratic parameterizations of
/// [0, 10] share uniform physical nodes; the relative L2 deviation of the
/// two interpolants is reported per refinement level. variant is "smooth"
/// (nodal data sin x) or "oscillatory" (nodal data 1,2,1,2,...).
ConvergenceReport run_interp1d(const std::string& variant,
                               const ExperimentConfig& config);

/// L2 error of interpolating the plate-with-hole sigma_xx field at the
/// nodes of the two-patch mesh, per refinement level.
ConvergenceReport run_interp2d(const ExperimentConfig& config);

/// Poisson problem with a Gaussian-hump manufactured solution on the
/// two-patch plate; relative energy error and interface deviation.
ConvergenceReport run_poisson(const ExperimentConfig& config);

/// Plane-stress plate with a circular hole under far-field tension
/// (exact tractions on the outer edges, symmetry conditions on the axes);
/// relative energy-norm error and interface deviation.
ConvergenceReport run_elasticity(const ExperimentConfig& config);

}  // namespace ciga

#endif
