#include "fundsim/funds.hpp"

#include <cmath>
#include <string>

#include "fundsim/errors.hpp"
#include "fundsim/stats.hpp"

namespace fundsim {

namespace {

constexpr double kWeightRowTol = 1e-9;
constexpr double kPositivityFloorFactor = 1e-9;

void check_shape(const PiecewiseValues& p, std::size_t expected,
                 const std::string& field) {
  if (p.empty()) throw ValidationError("missing field: " + field);
  if (p.times.size() != p.values.size() || p.times.front() != 0.0) {
    throw ValidationError(field + ": malformed breakpoints");
  }
  for (std::size_t j = 1; j < p.times.size(); ++j) {
    if (!(p.times[j] > p.times[j - 1])) {
      throw ValidationError(field + ": breakpoints must be strictly increasing");
    }
  }
  for (std::size_t j = 0; j < p.values.size(); ++j) {
    if (p.values[j].size() != expected) {
      throw ValidationError(field + ": segment " + std::to_string(j) + " has " +
                            std::to_string(p.values[j].size()) +
                            " entries, expected " + std::to_string(expected));
    }
    for (double v : p.values[j]) {
      if (!std::isfinite(v)) {
        throw ValidationError(field + ": segment " + std::to_string(j) +
                              " contains a non-finite entry");
      }
    }
  }
}

bool piecewise_all_zero(const PiecewiseValues& p) {
  for (const auto& seg : p.values) {
    for (double v : seg) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

void FundControls::validate(std::size_t n_assets) const {
  if (n_funds < 1) throw ValidationError("funds.k0: need at least one fund");
  if (k0.size() != n_funds || w0.size() != n_funds) {
    throw ValidationError("funds.k0/funds.w0: expected " +
                          std::to_string(n_funds) + " entries");
  }
  for (std::size_t i = 0; i < n_funds; ++i) {
    if (!(k0[i] > 0.0) || !std::isfinite(k0[i])) {
      throw ValidationError("funds.k0[" + std::to_string(i) + "] must be > 0");
    }
    if (!(w0[i] > 0.0) || !std::isfinite(w0[i])) {
      throw ValidationError("funds.w0[" + std::to_string(i) + "] must be > 0");
    }
  }
  check_shape(weights, n_funds * n_assets, "funds.weights");
  for (std::size_t seg = 0; seg < weights.segments(); ++seg) {
    for (std::size_t i = 0; i < n_funds; ++i) {
      NeumaierSum row;
      for (std::size_t j = 0; j < n_assets; ++j) {
        row.add(weights.values[seg][i * n_assets + j]);
      }
      if (std::abs(row.value() - 1.0) > kWeightRowTol) {
        throw ValidationError("funds.weights row " + std::to_string(i) +
                              " sums to " + std::to_string(row.value()));
      }
    }
  }
  check_shape(transfers, n_funds * n_funds, "funds.transfers");
  for (std::size_t seg = 0; seg < transfers.segments(); ++seg) {
    for (std::size_t i = 0; i < n_funds; ++i) {
      for (std::size_t j = 0; j < n_funds; ++j) {
        const double k = transfers.values[seg][i * n_funds + j];
        if (i == j && k != 0.0) {
          throw ValidationError("funds.transfers: diagonal entry (" +
                                std::to_string(i) + "," + std::to_string(i) +
                                ") must be 0");
        }
        if (k < 0.0) {
          throw ValidationError("funds.transfers(" + std::to_string(i) + "," +
                                std::to_string(j) + ") must be >= 0");
        }
      }
    }
  }
  check_shape(flow_drift, n_funds, "funds.flow_drift");
  check_shape(flow_vol, n_funds, "funds.flow_vol");
}

bool FundControls::flow_vol_is_zero() const { return piecewise_all_zero(flow_vol); }
bool FundControls::transfers_are_zero() const { return piecewise_all_zero(transfers); }
bool FundControls::flow_drift_is_zero() const { return piecewise_all_zero(flow_drift); }

std::vector<double> derive_holdings(std::span<const double> weight_row,
                                    double fund_wealth,
                                    std::span<const double> prices) {
  if (weight_row.size() != prices.size()) {
    throw ValidationError("derive_holdings: weights and prices differ in length");
  }
  if (!(fund_wealth > 0.0)) {
    throw ValidationError("derive_holdings: fund wealth must be > 0");
  }
  std::vector<double> u(prices.size());
  for (std::size_t j = 0; j < prices.size(); ++j) {
    if (!(prices[j] > 0.0)) {
      throw ValidationError("derive_holdings: price " + std::to_string(j) +
                            " is not positive");
    }
    u[j] = weight_row[j] * fund_wealth / prices[j];
  }
  return u;
}

FundPaths simulate_funds(const FundControls& controls, const AssetPaths& assets,
                         const BrownianDriver& driver, const TimeGrid& grid,
                         const PrescribedUnits* prescribed) {
  const std::size_t n = controls.n_funds;
  const std::size_t N = assets.n_assets;
  const std::size_t S = grid.steps;
  controls.validate(N);
  if (assets.steps != S || driver.steps != S) {
    throw ValidationError("assets/driver/grid disagree on step count");
  }
  if (driver.dim < N + n) {
    throw ValidationError("driver needs " + std::to_string(N + n) +
                          " columns (prices + fund flows), has " +
                          std::to_string(driver.dim));
  }
  if (prescribed) {
    if (prescribed->unit_weights.size() != n || prescribed->phi.size() != S + 1) {
      throw ValidationError("prescribed units: wrong weights or phi length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double k_init = prescribed->unit_weights[i] * prescribed->phi[0];
      if (std::abs(k_init - controls.k0[i]) > 1e-9 * controls.k0[i]) {
        throw ValidationError("prescribed units: weights*phi(0) != k0[" +
                              std::to_string(i) + "]");
      }
    }
  }

  FundPaths paths;
  paths.n_funds = n;
  paths.n_assets = N;
  paths.steps = S;
  paths.unit_value.assign(n * (S + 1), 0.0);
  paths.unit_count.assign(n * (S + 1), 0.0);
  paths.net_flow.assign(n * (S + 1), 0.0);
  paths.holdings.assign(n * N * (S + 1), 0.0);
  paths.fund_wealth.assign(n * (S + 1), 0.0);
  paths.total_wealth.assign(S + 1, 0.0);

  auto set_w = [&](std::size_t k, std::size_t i, double v) {
    paths.unit_value[i * (S + 1) + k] = v;
  };
  auto set_k = [&](std::size_t k, std::size_t i, double v) {
    paths.unit_count[i * (S + 1) + k] = v;
  };
  auto set_D = [&](std::size_t k, std::size_t i, double v) {
    paths.net_flow[i * (S + 1) + k] = v;
  };
  auto set_u = [&](std::size_t k, std::size_t i, std::size_t j, double v) {
    paths.holdings[(i * N + j) * (S + 1) + k] = v;
  };
  auto set_A = [&](std::size_t k, std::size_t i, double v) {
    paths.fund_wealth[i * (S + 1) + k] = v;
  };

  std::vector<double> floor_w(n), floor_k(n), floor_A(n);
  for (std::size_t i = 0; i < n; ++i) {
    floor_w[i] = kPositivityFloorFactor * controls.w0[i];
    floor_k[i] = kPositivityFloorFactor * controls.k0[i];
    floor_A[i] = kPositivityFloorFactor * controls.k0[i] * controls.w0[i];
  }

  // node 0
  {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      set_w(0, i, controls.w0[i]);
      set_k(0, i, controls.k0[i]);
      set_D(0, i, 0.0);
      const double Ai = controls.k0[i] * controls.w0[i];
      set_A(0, i, Ai);
      total += Ai;
    }
    paths.total_wealth[0] = total;
    const auto& pi0 = controls.weights.at(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        set_u(0, i, j, pi0[i * N + j] * paths.wealth(0, i) / assets.price(0, j));
      }
    }
  }

  const std::size_t usable_steps =
      assets.valid ? S : (assets.first_bad_node == 0 ? 0 : assets.first_bad_node - 1);

  for (std::size_t k = 0; k < S; ++k) {
    if (k >= usable_steps) {
      paths.valid = false;
      paths.first_bad_node = k + 1;
      return paths;
    }
    const double tk = grid.nodes[k];
    const double dt = grid.dt();
    const auto& kappa = controls.transfers.at(tk);
    const auto& alpha = controls.flow_drift.at(tk);
    const auto& beta = controls.flow_vol.at(tk);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w_i = paths.w(k, i);
      const double k_i = paths.units(k, i);

      // k_i dw_i = sum_j u_ij dc_j
      NeumaierSum gain;
      for (std::size_t j = 0; j < N; ++j) {
        gain.add(paths.holding(k, i, j) *
                 (assets.price(k + 1, j) - assets.price(k, j)));
      }
      const double dw = gain.value() / k_i;

      double dk, dD;
      if (prescribed) {
        dk = prescribed->unit_weights[i] * (prescribed->phi[k + 1] - prescribed->phi[k]);
        dD = w_i * dk;
      } else {
        double out = 0.0, in = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          out += kappa[i * n + j];
          in += paths.w(k, j) * kappa[j * n + i];
        }
        const double dB_flow = driver.at(k, N + i);
        dk = (-w_i * out + in + alpha[i]) * dt / w_i + (beta[i] / w_i) * dB_flow;
        dD = alpha[i] * dt + beta[i] * dB_flow;
      }

      const double w_next = w_i + dw;
      const double k_next = k_i + dk;
      const double A_next = k_next * w_next;
      if (!std::isfinite(A_next) || w_next <= floor_w[i] || k_next <= floor_k[i] ||
          A_next <= floor_A[i]) {
        paths.valid = false;
        paths.first_bad_node = k + 1;
        return paths;
      }
      set_w(k + 1, i, w_next);
      set_k(k + 1, i, k_next);
      set_D(k + 1, i, paths.flow(k, i) + dD);
      set_A(k + 1, i, A_next);
      total += A_next;
    }
    paths.total_wealth[k + 1] = total;

    // rebalance holdings so the wealth identity holds at the new node
    const auto& pi = controls.weights.at(grid.nodes[k + 1]);
    for (std::size_t i = 0; i < n; ++i) {
      const double Ai = paths.wealth(k + 1, i);
      for (std::size_t j = 0; j < N; ++j) {
        set_u(k + 1, i, j, pi[i * N + j] * Ai / assets.price(k + 1, j));
      }
    }
  }
  return paths;
}

ResidualReport consistency_residuals(const FundPaths& paths, const AssetPaths& assets,
                                     double flow_increment_tol) {
  if (!paths.valid) {
    throw InvalidPathError("consistency_residuals requires a valid path (failed at node " +
                           std::to_string(paths.first_bad_node) + ")");
  }
  const std::size_t n = paths.n_funds;
  const std::size_t N = paths.n_assets;
  const std::size_t S = paths.steps;
  const double A0 = paths.total(0);

  ResidualReport report;
  report.flow_increment_tol = flow_increment_tol;

  for (std::size_t k = 0; k <= S; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      NeumaierSum holdings_value;
      for (std::size_t j = 0; j < N; ++j) {
        holdings_value.add(paths.holding(k, i, j) * assets.price(k, j));
      }
      const double rel =
          std::abs(holdings_value.value() - paths.wealth(k, i)) / paths.wealth(k, i);
      if (rel > report.wealth_identity) report.wealth_identity = rel;
    }
  }

  NeumaierSum increment_sum;  // sum over steps of dA - sum_i k_i dw_i - dD
  for (std::size_t k = 0; k < S; ++k) {
    NeumaierSum w_dk;
    NeumaierSum k_dw;
    NeumaierSum dD;
    for (std::size_t i = 0; i < n; ++i) {
      w_dk.add(paths.w(k, i) * (paths.units(k + 1, i) - paths.units(k, i)));
      k_dw.add(paths.units(k, i) * (paths.w(k + 1, i) - paths.w(k, i)));
      dD.add(paths.flow(k + 1, i) - paths.flow(k, i));
    }
    const double agg = std::abs(w_dk.value() - dD.value()) / A0;
    if (agg > report.flow_aggregation) report.flow_aggregation = agg;
    increment_sum.add(paths.total(k + 1) - paths.total(k) - k_dw.value() - dD.value());
  }
  report.flow_increment = std::abs(increment_sum.value()) / A0;

  report.pass = report.wealth_identity <= report.wealth_identity_tol &&
                report.flow_aggregation <= report.flow_aggregation_tol &&
                report.flow_increment <= report.flow_increment_tol;
  return report;
}

}  // namespace fundsim
