#include "fundsim/time_grid.hpp"

#include <cmath>
#include <string>

#include "fundsim/errors.hpp"

namespace fundsim {

TimeGrid build_time_grid(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon must be a positive finite number, got " +
                          std::to_string(horizon));
  }
  if (steps < 1) {
    throw ValidationError("steps must be >= 1");
  }
  TimeGrid grid;
  grid.horizon = horizon;
  grid.steps = steps;
  grid.nodes.resize(steps + 1);
  const double dt = horizon / static_cast<double>(steps);
  for (std::size_t k = 0; k <= steps; ++k) {
    grid.nodes[k] = dt * static_cast<double>(k);
  }
  grid.nodes[steps] = horizon;
  return grid;
}

std::size_t node_index(const TimeGrid& grid, double t) {
  const std::size_t k = snap_index(grid, t);
  const double tol = 1e-9 * grid.horizon;
  if (std::abs(t - grid.nodes[k]) > tol) {
    throw ValidationError("time " + std::to_string(t) +
                          " is not a grid node (nearest node is " +
                          std::to_string(grid.nodes[k]) +
                          "); pass --snap to round to the nearest node");
  }
  return k;
}

std::size_t snap_index(const TimeGrid& grid, double t) {
  const double x = t / grid.dt();
  long k = std::lround(x);
  if (k < 0) k = 0;
  if (static_cast<std::size_t>(k) > grid.steps) k = static_cast<long>(grid.steps);
  return static_cast<std::size_t>(k);
}

}  // namespace fundsim
