#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fundsim/funds.hpp"
#include "fundsim/market.hpp"
#include "fundsim/time_grid.hpp"

namespace fundsim {

struct RngConfig {
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::size_t paths = 1;
  std::vector<double> checkpoints;  // defaults to {horizon}
  bool write_trajectories = false;
};

// A full experiment description. The JSON schema is documented in the README
// and is the compatibility contract; parse_scenario fills every default so
// the in-memory object (and its digest) is always fully explicit.
struct Scenario {
  double horizon = 1.0;
  std::size_t steps = 256;
  MarketParams market;
  FundControls funds;
  RngConfig rng;
  RunConfig run;
  std::string digest;  // fnv1a-64 of the canonical serialization, hex

  std::size_t n_assets() const { return market.n_assets; }
  std::size_t n_funds() const { return funds.n_funds; }
  std::size_t driver_dim() const { return market.n_assets + funds.n_funds; }

  TimeGrid grid() const { return build_time_grid(horizon, steps); }

  // Validates every field and recomputes the digest.
  void finalize();

  std::string canonical_text() const;  // canonical JSON, defaults explicit
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::string& path);

// One simulated realization of a scenario.
struct SimulatedPath {
  AssetPaths assets;
  FundPaths funds;
};

// Builds the (N + n)-column driver for `stream` and simulates market and
// funds on the scenario grid (or a caller-provided grid/driver).
SimulatedPath simulate_path(const Scenario& scenario, std::uint64_t stream);
SimulatedPath simulate_path(const Scenario& scenario, const TimeGrid& grid,
                            const BrownianDriver& driver,
                            const PrescribedUnits* prescribed = nullptr);

}  // namespace fundsim
