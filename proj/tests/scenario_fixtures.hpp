#pragma once

#include <vector>

#include "fundsim/scenario.hpp"

namespace fixtures {

using fundsim::PiecewiseValues;
using fundsim::Scenario;

// Two correlated assets used by every stochastic fixture.
inline void standard_market(Scenario& sc, std::vector<double> mu) {
  sc.market.n_assets = 2;
  sc.market.c0 = {1.0, 1.0};
  sc.market.mu = PiecewiseValues::constant(std::move(mu));
  sc.market.sigma = PiecewiseValues::constant({0.20, 0.00, 0.05, 0.15});
}

// n=2, N=2 with transfers and stochastic flows; mirrors scenarios/reference.json.
inline Scenario reference_scenario(std::uint64_t seed = 42, std::size_t steps = 256) {
  Scenario sc;
  sc.horizon = 1.0;
  sc.steps = steps;
  standard_market(sc, {0.10, 0.06});
  sc.funds.n_funds = 2;
  sc.funds.k0 = {100.0, 100.0};
  sc.funds.w0 = {1.0, 1.0};
  sc.funds.weights = PiecewiseValues::constant({0.6, 0.4, 0.3, 0.7});
  sc.funds.transfers = PiecewiseValues::constant({0.0, 0.25, 0.10, 0.0});
  sc.funds.flow_drift = PiecewiseValues::constant({15.0, 10.0});
  sc.funds.flow_vol = PiecewiseValues::constant({0.10, 0.16});
  sc.rng.seed = seed;
  sc.run.checkpoints = {0.25, 0.5, 1.0};
  sc.finalize();
  return sc;
}

// Single fund holding both assets, stochastic flows (property 1 fixture).
inline Scenario single_fund_scenario(std::uint64_t seed = 42, std::size_t steps = 256) {
  Scenario sc;
  sc.horizon = 1.0;
  sc.steps = steps;
  standard_market(sc, {0.10, 0.06});
  sc.funds.n_funds = 1;
  sc.funds.k0 = {100.0};
  sc.funds.w0 = {1.0};
  sc.funds.weights = PiecewiseValues::constant({0.6, 0.4});
  sc.funds.transfers = PiecewiseValues::constant({0.0});
  sc.funds.flow_drift = PiecewiseValues::constant({15.0});
  sc.funds.flow_vol = PiecewiseValues::constant({0.10});
  sc.rng.seed = seed;
  sc.finalize();
  return sc;
}

// Two funds with identical portfolios and w0 but different stochastic flows
// (property 3 fixture).
inline Scenario twin_fund_scenario(std::uint64_t seed = 42, std::size_t steps = 256) {
  Scenario sc;
  sc.horizon = 1.0;
  sc.steps = steps;
  standard_market(sc, {0.10, 0.06});
  sc.funds.n_funds = 2;
  sc.funds.k0 = {100.0, 100.0};
  sc.funds.w0 = {1.0, 1.0};
  sc.funds.weights = PiecewiseValues::constant({0.6, 0.4, 0.6, 0.4});
  sc.funds.transfers = PiecewiseValues::constant({0.0, 0.0, 0.0, 0.0});
  sc.funds.flow_drift = PiecewiseValues::constant({15.0, 10.0});
  sc.funds.flow_vol = PiecewiseValues::constant({0.10, 0.16});
  sc.rng.seed = seed;
  sc.finalize();
  return sc;
}

// Stochastic prices, frozen unit counts (property 4 fixture; also the
// beta==0 scenario of the formula-equivalence checks).
inline Scenario frozen_units_scenario(std::uint64_t seed = 42,
                                      std::size_t steps = 512) {
  Scenario sc;
  sc.horizon = 1.0;
  sc.steps = steps;
  standard_market(sc, {0.10, 0.06});
  sc.funds.n_funds = 2;
  sc.funds.k0 = {100.0, 50.0};
  sc.funds.w0 = {1.0, 1.2};
  sc.funds.weights = PiecewiseValues::constant({0.6, 0.4, 0.3, 0.7});
  sc.funds.transfers = PiecewiseValues::constant({0.0, 0.0, 0.0, 0.0});
  sc.funds.flow_drift = PiecewiseValues::constant({0.0, 0.0});
  sc.funds.flow_vol = PiecewiseValues::constant({0.0, 0.0});
  sc.rng.seed = seed;
  sc.finalize();
  return sc;
}

// Driftless prices with off-diagonal correlation (Theorem 1 fixture).
inline Scenario martingale_scenario(std::uint64_t seed = 42, std::size_t steps = 256) {
  Scenario sc = reference_scenario(seed, steps);
  sc.market.mu = PiecewiseValues::constant({0.0, 0.0});
  sc.finalize();
  return sc;
}

// Uniform positive drift, long-only weights (submartingale fixture).
inline Scenario submartingale_scenario(std::uint64_t seed = 42,
                                       std::size_t steps = 256) {
  Scenario sc = reference_scenario(seed, steps);
  sc.market.mu = PiecewiseValues::constant({0.10, 0.10});
  sc.finalize();
  return sc;
}

// sigma == 0, beta == 0: fully deterministic dynamics with moving units.
inline Scenario deterministic_scenario(std::size_t steps = 256) {
  Scenario sc;
  sc.horizon = 1.0;
  sc.steps = steps;
  sc.market.n_assets = 2;
  sc.market.c0 = {1.0, 1.0};
  sc.market.mu = PiecewiseValues::constant({0.05, 0.03});
  sc.market.sigma = PiecewiseValues::constant({0.0, 0.0, 0.0, 0.0});
  sc.funds.n_funds = 2;
  sc.funds.k0 = {100.0, 50.0};
  sc.funds.w0 = {1.0, 1.2};
  sc.funds.weights = PiecewiseValues::constant({0.6, 0.4, 0.3, 0.7});
  sc.funds.transfers = PiecewiseValues::constant({0.0, 0.25, 0.10, 0.0});
  sc.funds.flow_drift = PiecewiseValues::constant({5.0, 3.0});
  sc.funds.flow_vol = PiecewiseValues::constant({0.0, 0.0});
  sc.rng.seed = 7;
  sc.finalize();
  return sc;
}

}  // namespace fixtures
