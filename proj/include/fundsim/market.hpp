#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fundsim/piecewise.hpp"
#include "fundsim/time_grid.hpp"

namespace fundsim {

// Asset price model: dc_i = c_i mu_i dt + c_i sum_j sigma_ij dB_j.
// mu and sigma are piecewise-constant deterministic; sigma must stay
// non-singular (smallest singular value >= 1e-12 * largest on every segment).
struct MarketParams {
  std::size_t n_assets = 0;
  std::vector<double> c0;
  PiecewiseValues mu;     // per segment: n_assets entries (1/year)
  PiecewiseValues sigma;  // per segment: n_assets^2 entries, row-major (1/sqrt(year))

  void validate() const;  // throws ValidationError naming the offending field
};

// Gaussian increments on the grid, one column per Brownian driver. Column
// layout is fixed by convention: columns [0, N) drive prices, columns
// [N, N+n) drive the fund net flows.
struct BrownianDriver {
  std::size_t steps = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> increments;  // row-major [steps x dim], variance dt each

  double at(std::size_t row, std::size_t col) const {
    return increments[row * dim + col];
  }
  double& at(std::size_t row, std::size_t col) {
    return increments[row * dim + col];
  }
};

// Deterministic in (seed, stream): entry (row, col) is
// sqrt(dt) * PPND16(philox(seed, stream, col, row)).
BrownianDriver sample_driver(const TimeGrid& grid, std::size_t dim,
                             std::uint64_t seed, std::uint64_t stream);

// Sums groups of `factor` consecutive rows, yielding the same Brownian path
// on the coarse grid. Refinement studies rely on this to compare one omega
// across step counts.
BrownianDriver coarsen_driver(const BrownianDriver& fine, std::size_t factor);

struct AssetPaths {
  std::size_t n_assets = 0;
  std::size_t steps = 0;
  std::vector<double> prices;  // per-asset series: prices[i*(steps+1) + k]
  bool valid = true;
  std::size_t first_bad_node = 0;

  double price(std::size_t node, std::size_t asset) const {
    return prices[asset * (steps + 1) + node];
  }
};

// Log-space stepping with left-endpoint coefficients:
//   c(t_{k+1}) = c(t_k) * exp([mu - 0.5 sum_l sigma_l^2] dt + sum_l sigma_l dB_l),
// exact at the nodes for constant coefficients and positive by construction.
AssetPaths simulate_assets(const MarketParams& params, const BrownianDriver& driver,
                           const TimeGrid& grid);

}  // namespace fundsim
