#pragma once

// Deterministic flow S^t and its linearization along orbits.

#include "saddle/linalg.hpp"
#include "saddle/system.hpp"

#include <stdexcept>
#include <vector>

namespace saddle {

struct TrajectoryEscape : std::runtime_error {
  explicit TrajectoryEscape(double bound)
      : std::runtime_error("trajectory escaped the guard region (|x| > " +
                           std::to_string(bound) + ")") {}
};

/// S^t x via fixed-step RK4 (default h = 1e-3, per-call override).
/// Negative t integrates the time-reversed field.
Vec2 flow_map(const SaddleSystem& system, Vec2 x, double t, double h = 1e-3);

/// Joint solution of the base flow and dPhi/dt = Db(S^t x) Phi, Phi(0) = I.
/// Returns Phi on the uniform grid {0, h, 2h, ..., T}.
struct VariationalPath {
  std::vector<double> times;
  std::vector<Mat2> Phi;
  std::vector<Vec2> base;  // S^t x on the same grid
};
VariationalPath variational_flow(const SaddleSystem& system, Vec2 x, double T,
                                 double h = 1e-3);

}  // namespace saddle
