#pragma once

#include <cstddef>
#include <vector>

namespace fundsim {

// Uniform partition of [0, T]. All integration endpoints in this library are
// grid nodes; nothing interpolates between them.
struct TimeGrid {
  double horizon = 0.0;
  std::size_t steps = 0;
  std::vector<double> nodes;  // steps + 1 entries, nodes[0] == 0

  double dt() const { return horizon / static_cast<double>(steps); }
  std::size_t node_count() const { return nodes.size(); }
};

TimeGrid build_time_grid(double horizon, std::size_t steps);

// Maps a time to its node index; throws ValidationError when t is not a node
// (tolerance 1e-9 * horizon).
std::size_t node_index(const TimeGrid& grid, double t);

// Nearest node, for --snap.
std::size_t snap_index(const TimeGrid& grid, double t);

}  // namespace fundsim
