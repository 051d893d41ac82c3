#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fundsim/market.hpp"
#include "fundsim/piecewise.hpp"
#include "fundsim/time_grid.hpp"

namespace fundsim {

// Controls of a group of funds. Holdings are parametrized by rebalancing
// weights pi (rows sum to 1), unit transfers by intensities kappa >= 0 with
// dK_ij = kappa_ij dt, and net flows by dD_i = alpha_i dt + beta_i dB_{N+i}.
struct FundControls {
  std::size_t n_funds = 0;
  std::vector<double> k0;       // initial unit counts, > 0
  std::vector<double> w0;       // initial unit values, > 0
  PiecewiseValues weights;      // per segment: n_funds x n_assets, rows sum to 1
  PiecewiseValues transfers;    // per segment: n_funds x n_funds, kappa_ii = 0
  PiecewiseValues flow_drift;   // per segment: n_funds (currency / year)
  PiecewiseValues flow_vol;     // per segment: n_funds (currency / sqrt(year))

  void validate(std::size_t n_assets) const;
  bool flow_vol_is_zero() const;
  bool transfers_are_zero() const;
  bool flow_drift_is_zero() const;
};

// Full state trajectory of the group on the grid. Series are stored
// contiguously per variable: w(node k, fund i) = unit_value[i*(steps+1)+k].
struct FundPaths {
  std::size_t n_funds = 0;
  std::size_t n_assets = 0;
  std::size_t steps = 0;
  std::vector<double> unit_value;    // w_i
  std::vector<double> unit_count;    // k_i
  std::vector<double> net_flow;      // cumulative D_i, D_i(0) = 0
  std::vector<double> holdings;      // u_ij: holdings[(i*n_assets+j)*(steps+1)+k]
  std::vector<double> fund_wealth;   // A_i = k_i w_i
  std::vector<double> total_wealth;  // A
  bool valid = true;
  std::size_t first_bad_node = 0;

  double w(std::size_t k, std::size_t i) const { return unit_value[i * (steps + 1) + k]; }
  double units(std::size_t k, std::size_t i) const { return unit_count[i * (steps + 1) + k]; }
  double flow(std::size_t k, std::size_t i) const { return net_flow[i * (steps + 1) + k]; }
  double holding(std::size_t k, std::size_t i, std::size_t j) const {
    return holdings[(i * n_assets + j) * (steps + 1) + k];
  }
  double wealth(std::size_t k, std::size_t i) const { return fund_wealth[i * (steps + 1) + k]; }
  double total(std::size_t k) const { return total_wealth[k]; }
  double wealth_share(std::size_t k, std::size_t i) const {
    return wealth(k, i) / total(k);
  }
  std::span<const double> unit_value_series(std::size_t i) const {
    return {unit_value.data() + i * (steps + 1), steps + 1};
  }
  std::span<const double> unit_count_series(std::size_t i) const {
    return {unit_count.data() + i * (steps + 1), steps + 1};
  }
  std::span<const double> total_wealth_series() const {
    return {total_wealth.data(), steps + 1};
  }
};

// u_ij = pi_ij * A_i / c_j, which makes A_i = sum_j u_ij c_j an identity.
std::vector<double> derive_holdings(std::span<const double> weight_row,
                                    double fund_wealth,
                                    std::span<const double> prices);

// Exogenously imposed unit counts k_i(t) = unit_weights[i] * phi(t), used by
// the harness to realize prescribed unit-count paths; flows are then set to
// dD_i = w_i dk_i and the flow controls of the scenario are ignored.
struct PrescribedUnits {
  std::vector<double> unit_weights;  // positive, sum to 1
  std::vector<double> phi;           // per node, > 0
};

FundPaths simulate_funds(const FundControls& controls, const AssetPaths& assets,
                         const BrownianDriver& driver, const TimeGrid& grid,
                         const PrescribedUnits* prescribed = nullptr);

// Numerical residuals of the model's accounting identities over one path:
// the wealth identity A_i = sum_j u_ij c_j at every node, the per-step flow
// aggregation sum_i w_i dk_i = dD, and the summed-increment form of
// dD = dA - sum_i k_i dw_i.
struct ResidualReport {
  double wealth_identity = 0.0;   // max over nodes, relative to A_i
  double flow_aggregation = 0.0;  // max over steps, relative to A(0)
  double flow_increment = 0.0;    // |sum over steps|, relative to A(0)
  double wealth_identity_tol = 1e-10;
  double flow_aggregation_tol = 1e-9;
  double flow_increment_tol = 5e-3;
  bool pass = false;
};

ResidualReport consistency_residuals(const FundPaths& paths, const AssetPaths& assets,
                                     double flow_increment_tol = 5e-3);

}  // namespace fundsim
