#ifndef CIGA_INVERSE_MAP_HPP
#define CIGA_INVERSE_MAP_HPP

#include <memory>
#include <vector>

#include "ciga/nurbs_patch.hpp"

namespace ciga {

enum class WarmStartKind { None, Lookup, Sigmoid };

struct InverseMapConfig {
  double tolerance = 1e-10;
  int max_iterations = 50;
  WarmStartKind warm_start = WarmStartKind::Lookup;
  int sample_grid = 11;  // samples per direction for warm-start training
};

/// Cheap approximate inverse predictor trained on forward-map samples.
/// Predictions are clamped to [0,1]^d; accuracy is advisory only, the
/// Gauss-Newton refinement is authoritative.
class WarmStart {
 public:
  virtual ~WarmStart() = default;
  virtual Vector predict(const Vector& x) const = 0;
};

/// Trains a predictor: piecewise-multilinear lookup on a sample grid
/// (deterministic, exact for affine maps) or a small sigmoid regressor.
std::unique_ptr<WarmStart> train_warm_start(const NurbsPatch& patch,
                                            const InverseMapConfig& config);

struct InversionError : ConstructionError {
  double best_residual;
  InversionError(const std::string& msg, double r)
      : ConstructionError(msg), best_residual(r) {}
};

/// Solves F(xi) = x by box-projected damped Gauss-Newton. Throws
/// InversionError on non-convergence (x outside the patch image or a
/// near-degenerate Jacobian).
Vector invert_point(const NurbsPatch& patch, const Vector& x,
                    const InverseMapConfig& config = {},
                    const Vector* xi0 = nullptr,
                    const WarmStart* warm = nullptr);

/// Inverts every row of physical_nodes; trains a warm start once when the
/// config requests one. Errors are aggregated with node indices.
Matrix invert_mesh(const NurbsPatch& patch, const Matrix& physical_nodes,
                   const InverseMapConfig& config = {});

}  // namespace ciga

#endif
