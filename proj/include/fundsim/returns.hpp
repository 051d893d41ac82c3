#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fundsim/funds.hpp"
#include "fundsim/time_grid.hpp"

namespace fundsim {

// Log-scale accumulated return R and rbar = exp(R) - 1 at every node,
// anchored at node `anchor` (R == 0 for nodes <= anchor).
struct ReturnSeries {
  std::size_t anchor = 0;
  std::vector<double> log_return;  // R(t_k)
  std::vector<double> rbar;        // exp(R) - 1
};

// The group's accumulated log return over [s, t]:
//   R = sum_i int A*_i dw_i/w_i + int d log A - int dA/A
//     + sum_i int (A*_i)^2 dk_i/k_i - sum_i int (A*_i)^2 d log k_i,
// with left-endpoint sums for the dX/X terms, the exact log ratio for
// d log A, and left-endpoint weights times exact per-step log increments for
// the d log k_i term.
double accumulate_R(const FundPaths& paths, std::size_t s, std::size_t t);

// rbar(s,t) = exp(R) - 1.
double average_return(const FundPaths& paths, std::size_t s, std::size_t t);

// Reduction valid when all flow vols vanish (dD_i = alpha_i dt): the two
// unit-count terms are dropped. Throws ValidationError when the scenario has
// any nonzero flow vol.
double average_return_drift_flows(const FundPaths& paths, const FundControls& controls,
                                  std::size_t s, std::size_t t);

ReturnSeries return_series(const FundPaths& paths, std::size_t anchor);

// One period of the discrete-time product formula.
struct PeriodSnapshot {
  std::vector<double> weights;       // A*_i at the period start
  std::vector<double> fund_returns;  // r_i over the period
};

// prod_u (1 + sum_i A*_i(u) r_i(u,u+1)) - 1.
double discrete_average_return(std::span<const PeriodSnapshot> periods);

// Builds the product-formula inputs by snapshotting a simulated path at the
// given nodes (ascending, at least two).
std::vector<PeriodSnapshot> period_snapshots(const FundPaths& paths,
                                             std::span<const std::size_t> nodes);

// Deterministic-model average return: exp(int sum_i [A_i/A] dlog w_i) - 1
// with left-endpoint weights and per-step log increments.
double deterministic_average_return(const FundPaths& paths, std::size_t s,
                                    std::size_t t);

// per-fund simple returns r_i = (w_i(t) - w_i(s)) / w_i(s)
std::vector<double> per_fund_returns(const FundPaths& paths, std::size_t s,
                                     std::size_t t);

}  // namespace fundsim
