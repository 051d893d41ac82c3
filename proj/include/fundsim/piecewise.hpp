#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace fundsim {

// Piecewise-constant-in-time process. values[j] applies on
// [times[j], times[j+1]) and the last segment extends through the horizon.
// Matrices are stored flattened row-major inside each value.
struct PiecewiseValues {
  std::vector<double> times;                // ascending, times[0] == 0
  std::vector<std::vector<double>> values;  // one entry per segment

  bool empty() const { return values.empty(); }
  std::size_t segments() const { return values.size(); }

  const std::vector<double>& at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t idx = (it == times.begin())
                                ? 0
                                : static_cast<std::size_t>(it - times.begin()) - 1;
    return values[idx];
  }

  static PiecewiseValues constant(std::vector<double> value) {
    PiecewiseValues p;
    p.times = {0.0};
    p.values.push_back(std::move(value));
    return p;
  }
};

}  // namespace fundsim
