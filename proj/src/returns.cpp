#include "fundsim/returns.hpp"

#include <cmath>
#include <string>

#include "fundsim/errors.hpp"
#include "fundsim/ito.hpp"
#include "fundsim/stats.hpp"

namespace fundsim {

namespace {

void check_path_range(const FundPaths& paths, std::size_t s, std::size_t t) {
  if (!paths.valid) {
    throw InvalidPathError("path is invalid from node " +
                           std::to_string(paths.first_bad_node));
  }
  if (s > t || t > paths.steps) {
    throw ValidationError("return endpoints must be grid nodes with s <= t");
  }
}

struct RTerms {
  NeumaierSum wealth_weighted;  // sum_i A*_i dw_i / w_i
  NeumaierSum total_relative;   // dA / A
  NeumaierSum unit_relative;    // sum_i (A*_i)^2 dk_i / k_i
  NeumaierSum unit_log;         // sum_i (A*_i)^2 dlog k_i
};

inline void add_step_terms(const FundPaths& paths, std::size_t k, RTerms& acc) {
  const double A_k = paths.total(k);
  for (std::size_t i = 0; i < paths.n_funds; ++i) {
    const double share = paths.wealth(k, i) / A_k;
    acc.wealth_weighted.add(share * (paths.w(k + 1, i) - paths.w(k, i)) /
                            paths.w(k, i));
    const double k_i = paths.units(k, i);
    const double dk = paths.units(k + 1, i) - k_i;
    if (dk != 0.0) {
      const double share2 = share * share;
      acc.unit_relative.add(share2 * dk / k_i);
      acc.unit_log.add(share2 * std::log(paths.units(k + 1, i) / k_i));
    }
  }
  acc.total_relative.add((paths.total(k + 1) - A_k) / A_k);
}

inline double combine(const RTerms& acc, double log_total_ratio) {
  return acc.wealth_weighted.value() + log_total_ratio - acc.total_relative.value() +
         acc.unit_relative.value() - acc.unit_log.value();
}

}  // namespace

double accumulate_R(const FundPaths& paths, std::size_t s, std::size_t t) {
  check_path_range(paths, s, t);
  RTerms acc;
  for (std::size_t k = s; k < t; ++k) add_step_terms(paths, k, acc);
  return combine(acc, std::log(paths.total(t) / paths.total(s)));
}

double average_return(const FundPaths& paths, std::size_t s, std::size_t t) {
  return std::expm1(accumulate_R(paths, s, t));
}

double average_return_drift_flows(const FundPaths& paths, const FundControls& controls,
                                  std::size_t s, std::size_t t) {
  if (!controls.flow_vol_is_zero()) {
    throw ValidationError(
        "drift-flows reduction requires flow_vol == 0 everywhere; the scenario "
        "has stochastic flows");
  }
  check_path_range(paths, s, t);
  RTerms acc;
  for (std::size_t k = s; k < t; ++k) {
    const double A_k = paths.total(k);
    for (std::size_t i = 0; i < paths.n_funds; ++i) {
      acc.wealth_weighted.add(paths.wealth(k, i) / A_k *
                              (paths.w(k + 1, i) - paths.w(k, i)) / paths.w(k, i));
    }
    acc.total_relative.add((paths.total(k + 1) - A_k) / A_k);
  }
  const double R = acc.wealth_weighted.value() +
                   std::log(paths.total(t) / paths.total(s)) -
                   acc.total_relative.value();
  return std::expm1(R);
}

ReturnSeries return_series(const FundPaths& paths, std::size_t anchor) {
  check_path_range(paths, anchor, paths.steps);
  ReturnSeries series;
  series.anchor = anchor;
  series.log_return.assign(paths.steps + 1, 0.0);
  series.rbar.assign(paths.steps + 1, 0.0);
  RTerms acc;
  for (std::size_t k = anchor; k < paths.steps; ++k) {
    add_step_terms(paths, k, acc);
    const double R =
        combine(acc, std::log(paths.total(k + 1) / paths.total(anchor)));
    series.log_return[k + 1] = R;
    series.rbar[k + 1] = std::expm1(R);
  }
  return series;
}

double discrete_average_return(std::span<const PeriodSnapshot> periods) {
  if (periods.empty()) {
    throw ValidationError("discrete_average_return: need at least one period");
  }
  double product = 1.0;
  for (std::size_t u = 0; u < periods.size(); ++u) {
    const auto& p = periods[u];
    if (p.weights.size() != p.fund_returns.size() || p.weights.empty()) {
      throw ValidationError("discrete_average_return: malformed period " +
                            std::to_string(u));
    }
    NeumaierSum wsum;
    for (double w : p.weights) wsum.add(w);
    if (std::abs(wsum.value() - 1.0) > 1e-9) {
      throw ValidationError("discrete_average_return: period " + std::to_string(u) +
                            " weights sum to " + std::to_string(wsum.value()));
    }
    NeumaierSum weighted;
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      weighted.add(p.weights[i] * p.fund_returns[i]);
    }
    product *= 1.0 + weighted.value();
  }
  return product - 1.0;
}

std::vector<PeriodSnapshot> period_snapshots(const FundPaths& paths,
                                             std::span<const std::size_t> nodes) {
  if (nodes.size() < 2) {
    throw ValidationError("period_snapshots: need at least two nodes");
  }
  check_path_range(paths, nodes.front(), nodes.back());
  for (std::size_t m = 1; m < nodes.size(); ++m) {
    if (!(nodes[m] > nodes[m - 1])) {
      throw ValidationError("period_snapshots: nodes must be strictly increasing");
    }
  }
  std::vector<PeriodSnapshot> periods(nodes.size() - 1);
  for (std::size_t m = 0; m + 1 < nodes.size(); ++m) {
    const std::size_t u = nodes[m];
    const std::size_t v = nodes[m + 1];
    auto& p = periods[m];
    p.weights.resize(paths.n_funds);
    p.fund_returns.resize(paths.n_funds);
    for (std::size_t i = 0; i < paths.n_funds; ++i) {
      p.weights[i] = paths.wealth_share(u, i);
      p.fund_returns[i] = (paths.w(v, i) - paths.w(u, i)) / paths.w(u, i);
    }
  }
  return periods;
}

double deterministic_average_return(const FundPaths& paths, std::size_t s,
                                    std::size_t t) {
  check_path_range(paths, s, t);
  NeumaierSum integral;
  for (std::size_t k = s; k < t; ++k) {
    const double A_k = paths.total(k);
    for (std::size_t i = 0; i < paths.n_funds; ++i) {
      const double w_next = paths.w(k + 1, i);
      const double w_here = paths.w(k, i);
      if (!(w_here > 0.0) || !(w_next > 0.0)) {
        throw ValidationError("deterministic_average_return: non-positive unit value");
      }
      integral.add(paths.wealth(k, i) / A_k * std::log(w_next / w_here));
    }
  }
  return std::expm1(integral.value());
}

std::vector<double> per_fund_returns(const FundPaths& paths, std::size_t s,
                                     std::size_t t) {
  check_path_range(paths, s, t);
  std::vector<double> r(paths.n_funds);
  for (std::size_t i = 0; i < paths.n_funds; ++i) {
    r[i] = (paths.w(t, i) - paths.w(s, i)) / paths.w(s, i);
  }
  return r;
}

}  // namespace fundsim
