#include "fundsim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "fundsim/errors.hpp"
#include "fundsim/parallel.hpp"
#include "fundsim/returns.hpp"
#include "fundsim/rng.hpp"
#include "fundsim/stats.hpp"

namespace fundsim::verify {

namespace {

constexpr double kRoundingFloor = 1e-12;
constexpr double kRatioLow = 1.5;
constexpr double kRatioHigh = 3.0;

std::string format_checkpoint(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return std::string(buf);
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void check_refinements(std::span<const std::size_t> refinements) {
  if (refinements.size() < 2) {
    throw ValidationError("refinement study needs at least two step counts");
  }
  for (std::size_t l = 1; l < refinements.size(); ++l) {
    if (refinements[l] <= refinements[l - 1] ||
        refinements[l] % refinements[l - 1] != 0) {
      throw ValidationError(
          "step counts must be increasing and nested (each divides the next)");
    }
  }
}

// Simulates the scenario on every refinement level of one Brownian path
// (finest level sampled, coarser levels by increment summation).
std::vector<SimulatedPath> simulate_refinements(
    const Scenario& scenario, std::span<const std::size_t> refinements,
    std::uint64_t stream, const std::function<double(double)>* phi = nullptr,
    std::span<const double> unit_weights = {}) {
  check_refinements(refinements);
  const std::size_t finest = refinements.back();
  const TimeGrid fine_grid = build_time_grid(scenario.horizon, finest);
  const BrownianDriver fine_driver =
      sample_driver(fine_grid, scenario.driver_dim(), scenario.rng.seed, stream);
  std::vector<SimulatedPath> sims;
  sims.reserve(refinements.size());
  for (std::size_t steps : refinements) {
    const TimeGrid grid = build_time_grid(scenario.horizon, steps);
    const BrownianDriver driver = (steps == finest)
                                      ? fine_driver
                                      : coarsen_driver(fine_driver, finest / steps);
    if (phi) {
      PrescribedUnits prescribed;
      prescribed.unit_weights.assign(unit_weights.begin(), unit_weights.end());
      prescribed.phi.resize(grid.node_count());
      for (std::size_t k = 0; k < grid.node_count(); ++k) {
        prescribed.phi[k] = (*phi)(grid.nodes[k]);
      }
      sims.push_back(simulate_path(scenario, grid, driver, &prescribed));
    } else {
      sims.push_back(simulate_path(scenario, grid, driver));
    }
  }
  return sims;
}

double relative_gap(double value, double target) {
  const double scale = std::abs(target);
  return scale > kRoundingFloor ? std::abs(value - target) / scale
                                : std::abs(value - target);
}

// Shared tail of the refinement-based property checks: per-level errors,
// per-halving ratios (skipped at the rounding floor), final tolerance.
void fill_refinement_report(TestReport& report,
                            std::span<const std::size_t> refinements,
                            std::span<const double> errors, double final_tol,
                            bool require_ratio_band) {
  bool ratios_ok = true;
  for (std::size_t l = 0; l < errors.size(); ++l) {
    report.add_stat("error@steps=" + std::to_string(refinements[l]), errors[l]);
  }
  std::size_t rated = 0;
  for (std::size_t l = 0; l + 1 < errors.size(); ++l) {
    if (errors[l + 1] <= kRoundingFloor) continue;  // at the rounding floor
    const double ratio = errors[l] / errors[l + 1];
    const bool in_band = ratio >= kRatioLow && ratio <= kRatioHigh;
    const bool monotone = errors[l + 1] <= errors[l] * 1.05 + kRoundingFloor;
    const bool ok = require_ratio_band ? in_band : monotone;
    report.add_stat("ratio@steps=" + std::to_string(refinements[l]) + "->" +
                        std::to_string(refinements[l + 1]),
                    ratio, std::numeric_limits<double>::quiet_NaN(),
                    require_ratio_band ? kRatioLow : std::numeric_limits<double>::quiet_NaN(),
                    ok);
    ratios_ok = ratios_ok && ok;
    ++rated;
  }
  if (rated == 0) {
    report.notes.push_back("all refinements at the rounding floor; ratios not rated");
  }
  const double final_error = errors.back();
  const bool final_ok = final_error < final_tol;
  report.add_stat("final_error", final_error,
                  std::numeric_limits<double>::quiet_NaN(), final_tol, final_ok);
  report.pass = ratios_ok && final_ok;
}

}  // namespace

void TestReport::add_stat(std::string stat_name, double value, double se,
                          double tol, bool stat_pass) {
  stats.push_back(Stat{std::move(stat_name), value, se, tol, stat_pass});
}

void MartingaleTestSpec::validate(const TimeGrid& grid) const {
  if (checkpoints.empty()) throw ValidationError("checkpoints must be non-empty");
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    node_index(grid, checkpoints[c]);
    if (c > 0 && !(checkpoints[c] > checkpoints[c - 1])) {
      throw ValidationError("checkpoints must be strictly increasing");
    }
  }
  if (paths < 100 || branch_paths < 100) {
    throw ValidationError("martingale spec requires at least 100 paths and branches");
  }
  if (branch_paths >= (1u << 20)) {
    throw ValidationError("branch_paths must be below 2^20");
  }
  if (branch_bases < 1) throw ValidationError("branch_bases must be >= 1");
  node_index(grid, branch_time);
  if (!(branch_time < checkpoints.back())) {
    throw ValidationError("branch_time must precede the last checkpoint");
  }
  if (!(confidence > 0.0)) throw ValidationError("confidence must be > 0");
}

std::uint64_t branch_stream(std::size_t base_index, std::size_t branch_index) {
  return (1ull << 63) | (static_cast<std::uint64_t>(base_index) << 20) |
         static_cast<std::uint64_t>(branch_index);
}

TestReport check_property1(const Scenario& scenario,
                           std::span<const std::size_t> refinements) {
  Stopwatch clock;
  if (scenario.n_funds() != 1) {
    throw ValidationError("property1 requires a single-fund scenario (n=1), got n=" +
                          std::to_string(scenario.n_funds()));
  }
  const auto sims = simulate_refinements(scenario, refinements, /*stream=*/0);
  std::vector<double> errors;
  errors.reserve(sims.size());
  for (const auto& sim : sims) {
    if (!sim.funds.valid) {
      throw InvalidPathError("property1: path invalid at node " +
                             std::to_string(sim.funds.first_bad_node));
    }
    const std::size_t last = sim.funds.steps;
    const double rbar = average_return(sim.funds, 0, last);
    const double target = per_fund_returns(sim.funds, 0, last)[0];
    errors.push_back(relative_gap(rbar, target));
  }
  TestReport report;
  report.name = "property1";
  report.scenario_digest = scenario.digest;
  report.paths = 1;
  fill_refinement_report(report, refinements, errors, 1e-3,
                         /*require_ratio_band=*/true);
  report.wall_ms = clock.ms();
  return report;
}

TestReport check_property2(const Scenario& scenario, std::size_t n_paths,
                           std::size_t n_triples, std::size_t threads) {
  Stopwatch clock;
  if (n_paths < 1 || n_triples < 1) {
    throw ValidationError("property2 needs at least one path and one triple");
  }
  const TimeGrid grid = scenario.grid();
  const std::size_t S = grid.steps;
  if (S < 16) throw ValidationError("property2 needs at least 16 steps");
  struct Triple {
    std::size_t s, u, t;
  };
  std::vector<Triple> triples;
  for (std::size_t m = 0; m < n_triples; ++m) {
    const double f = static_cast<double>(m) / static_cast<double>(n_triples);
    Triple tr;
    tr.s = static_cast<std::size_t>(std::lround((0.05 + 0.18 * f) * static_cast<double>(S)));
    tr.u = static_cast<std::size_t>(std::lround((0.30 + 0.27 * f) * static_cast<double>(S)));
    tr.t = static_cast<std::size_t>(std::lround((0.65 + 0.31 * f) * static_cast<double>(S)));
    if (!(tr.s < tr.u && tr.u < tr.t && tr.t <= S)) {
      throw ValidationError("property2: degenerate node triple; increase steps");
    }
    triples.push_back(tr);
  }

  std::vector<double> max_residual(n_paths, 0.0);
  std::vector<unsigned char> invalid(n_paths, 0);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    const SimulatedPath sim = simulate_path(scenario, p);
    if (!sim.funds.valid) {
      invalid[p] = 1;
      return;
    }
    double worst = 0.0;
    for (const auto& tr : triples) {
      const double r_st = average_return(sim.funds, tr.s, tr.t);
      const double r_su = average_return(sim.funds, tr.s, tr.u);
      const double r_ut = average_return(sim.funds, tr.u, tr.t);
      const double residual = std::abs((1.0 + r_st) - (1.0 + r_su) * (1.0 + r_ut)) /
                              (1.0 + std::abs(r_st));
      worst = std::max(worst, residual);
    }
    max_residual[p] = worst;
  });

  TestReport report;
  report.name = "property2_chain_rule";
  report.scenario_digest = scenario.digest;
  report.paths = n_paths;
  double worst = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    if (invalid[p]) {
      ++report.invalid_paths;
    } else {
      worst = std::max(worst, max_residual[p]);
    }
  }
  const double tol = 1e-12;
  report.add_stat("max_relative_residual", worst,
                  std::numeric_limits<double>::quiet_NaN(), tol, worst < tol);
  report.add_stat("triples", static_cast<double>(n_triples));
  report.pass = worst < tol && report.invalid_paths == 0;
  report.wall_ms = clock.ms();
  return report;
}

TestReport check_property3(const Scenario& scenario,
                           std::span<const std::size_t> refinements) {
  Stopwatch clock;
  const std::size_t n = scenario.n_funds();
  const std::size_t N = scenario.n_assets();
  if (n < 2) throw ValidationError("property3 requires at least two funds");
  for (std::size_t i = 1; i < n; ++i) {
    if (scenario.funds.w0[i] != scenario.funds.w0[0]) {
      throw ValidationError("property3 requires identical w0 across funds");
    }
  }
  for (const auto& seg : scenario.funds.weights.values) {
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        if (seg[i * N + j] != seg[j]) {
          throw ValidationError(
              "property3 requires identical portfolio weights across funds");
        }
      }
    }
  }
  if (!scenario.funds.transfers_are_zero()) {
    throw ValidationError("property3 scenario must have no unit transfers");
  }

  const auto sims = simulate_refinements(scenario, refinements, /*stream=*/0);
  std::vector<double> errors;
  for (const auto& sim : sims) {
    if (!sim.funds.valid) {
      throw InvalidPathError("property3: path invalid at node " +
                             std::to_string(sim.funds.first_bad_node));
    }
    // identical controls must give identical unit-value paths
    const std::size_t S = sim.funds.steps;
    for (std::size_t k = 0; k <= S; ++k) {
      for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(sim.funds.w(k, i) - sim.funds.w(k, 0)) >
            1e-12 * sim.funds.w(k, 0)) {
          throw ValidationError(
              "property3 scenario-construction failure: unit values diverged at node " +
              std::to_string(k));
        }
      }
    }
    const double rbar = average_return(sim.funds, 0, S);
    const double target = per_fund_returns(sim.funds, 0, S)[0];
    errors.push_back(relative_gap(rbar, target));
  }
  TestReport report;
  report.name = "property3";
  report.scenario_digest = scenario.digest;
  report.paths = 1;
  fill_refinement_report(report, refinements, errors, 1e-3,
                         /*require_ratio_band=*/true);
  report.wall_ms = clock.ms();
  return report;
}

namespace {

// Shared by the constant-units and prescribed-phi variants of property 4.
TestReport property4_report(const Scenario& scenario,
                            std::span<const std::size_t> refinements,
                            std::span<const double> unit_weights,
                            const std::function<double(double)>* phi,
                            bool constant_units) {
  Stopwatch clock;
  const std::size_t n = scenario.n_funds();
  if (unit_weights.size() != n) {
    throw ValidationError("property4: unit weight count must match funds");
  }
  NeumaierSum wsum;
  for (double a : unit_weights) {
    if (!(a > 0.0)) throw ValidationError("property4: unit weights must be > 0");
    wsum.add(a);
  }
  if (std::abs(wsum.value() - 1.0) > 1e-9) {
    throw ValidationError("property4: unit weights must sum to 1");
  }

  const auto sims =
      simulate_refinements(scenario, refinements, /*stream=*/0, phi, unit_weights);
  std::vector<double> errors_group;
  std::vector<double> errors_weighted;
  for (const auto& sim : sims) {
    if (!sim.funds.valid) {
      throw InvalidPathError("property4: path invalid at node " +
                             std::to_string(sim.funds.first_bad_node));
    }
    const std::size_t S = sim.funds.steps;
    // construction check: k_i(u) / alpha_i must agree across funds
    for (std::size_t k = 0; k <= S; ++k) {
      const double phi0 = sim.funds.units(k, 0) / unit_weights[0];
      for (std::size_t i = 1; i < n; ++i) {
        const double phii = sim.funds.units(k, i) / unit_weights[i];
        if (std::abs(phii - phi0) > 1e-9 * std::abs(phi0)) {
          throw ValidationError(
              "property4 construction failure: unit counts are not proportional "
              "to the weights at node " +
              std::to_string(k));
        }
      }
    }
    const double rbar = average_return(sim.funds, 0, S);
    const auto r = per_fund_returns(sim.funds, 0, S);
    NeumaierSum num, den;
    for (std::size_t i = 0; i < n; ++i) {
      num.add(unit_weights[i] * r[i] * sim.funds.w(0, i));
      den.add(unit_weights[i] * sim.funds.w(0, i));
    }
    errors_weighted.push_back(relative_gap(rbar, num.value() / den.value()));
    if (constant_units) {
      const double group = (sim.funds.total(S) - sim.funds.total(0)) / sim.funds.total(0);
      errors_group.push_back(relative_gap(rbar, group));
    }
  }

  TestReport report;
  report.name = constant_units ? "property4_constant_units" : "property4_prescribed";
  report.scenario_digest = scenario.digest;
  report.paths = 1;
  const std::span<const double> primary =
      constant_units ? std::span<const double>(errors_group)
                     : std::span<const double>(errors_weighted);
  fill_refinement_report(report, refinements, primary, 1e-2,
                         /*require_ratio_band=*/false);
  const double weighted_final = errors_weighted.back();
  const bool weighted_ok = weighted_final < 1e-2;
  report.add_stat("weighted_form_final_error", weighted_final,
                  std::numeric_limits<double>::quiet_NaN(), 1e-2, weighted_ok);
  report.pass = report.pass && weighted_ok;
  report.wall_ms = clock.ms();
  return report;
}

}  // namespace

TestReport check_property4(const Scenario& scenario,
                           std::span<const std::size_t> refinements) {
  if (!scenario.funds.transfers_are_zero() || !scenario.funds.flow_drift_is_zero() ||
      !scenario.funds.flow_vol_is_zero()) {
    throw ValidationError(
        "property4 (constant units) requires zero transfers and zero flows");
  }
  NeumaierSum total;
  for (double k : scenario.funds.k0) total.add(k);
  std::vector<double> weights(scenario.n_funds());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = scenario.funds.k0[i] / total.value();
  }
  return property4_report(scenario, refinements, weights, nullptr,
                          /*constant_units=*/true);
}

TestReport check_property4_prescribed(const Scenario& scenario,
                                      std::span<const double> unit_weights,
                                      const std::function<double(double)>& phi,
                                      std::span<const std::size_t> refinements) {
  return property4_report(scenario, refinements, unit_weights, &phi,
                          /*constant_units=*/false);
}

namespace {

bool piecewise_is_zero(const PiecewiseValues& p) {
  for (const auto& seg : p.values) {
    for (double v : seg) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

TestReport martingale_test(const Scenario& scenario, const MartingaleTestSpec& spec,
                           std::size_t threads) {
  Stopwatch clock;
  if (!piecewise_is_zero(scenario.market.mu)) {
    throw ValidationError(
        "martingale test requires driftless prices (mu identically 0)");
  }
  const TimeGrid grid = scenario.grid();
  spec.validate(grid);
  std::vector<std::size_t> check_idx;
  for (double c : spec.checkpoints) check_idx.push_back(node_index(grid, c));
  const std::size_t s_idx = node_index(grid, spec.branch_time);
  const std::size_t t_idx = check_idx.back();
  const std::size_t M = spec.paths;

  TestReport report;
  report.name = "martingale";
  report.scenario_digest = scenario.digest;
  report.paths = M;
  report.confidence = spec.confidence;

  // (a) unconditional: E[rbar(0, t)] = 0 at every checkpoint
  std::vector<std::vector<double>> rbars(check_idx.size(),
                                         std::vector<double>(M, 0.0));
  std::vector<unsigned char> invalid(M, 0);
  parallel_for(M, threads, [&](std::size_t p) {
    const SimulatedPath sim = simulate_path(scenario, p);
    if (!sim.funds.valid) {
      invalid[p] = 1;
      return;
    }
    for (std::size_t c = 0; c < check_idx.size(); ++c) {
      rbars[c][p] = average_return(sim.funds, 0, check_idx[c]);
    }
  });
  for (std::size_t p = 0; p < M; ++p) {
    if (invalid[p]) ++report.invalid_paths;
  }
  const bool inconclusive =
      report.invalid_paths * 100 > M;  // more than 1% of paths lost
  bool unconditional_ok = true;
  for (std::size_t c = 0; c < check_idx.size(); ++c) {
    std::vector<double> values;
    values.reserve(M);
    for (std::size_t p = 0; p < M; ++p) {
      if (!invalid[p]) values.push_back(rbars[c][p]);
    }
    const SampleStats st = sample_stats(values);
    const bool ok = std::abs(st.mean) <= spec.confidence * st.std_error;
    unconditional_ok = unconditional_ok && ok;
    const std::string label = "mean_rbar@t=" + format_checkpoint(spec.checkpoints[c]);
    report.add_stat(label, st.mean, st.std_error,
                    spec.confidence * st.std_error, ok);
  }

  // (b) conditional: branch M' continuations from the state at branch_time
  const std::size_t bases = std::min<std::size_t>(spec.branch_bases, M);
  std::vector<unsigned char> inside(bases, 0);
  std::vector<unsigned char> base_invalid(bases, 0);
  parallel_for(bases, threads, [&](std::size_t b) {
    const TimeGrid g = scenario.grid();
    const BrownianDriver base_driver =
        sample_driver(g, scenario.driver_dim(), scenario.rng.seed, b);
    const SimulatedPath base = simulate_path(scenario, g, base_driver);
    if (!base.funds.valid) {
      base_invalid[b] = 1;
      return;
    }
    const double anchor = average_return(base.funds, 0, s_idx);
    std::vector<double> branch_values;
    branch_values.reserve(spec.branch_paths);
    for (std::size_t j = 0; j < spec.branch_paths; ++j) {
      BrownianDriver driver = base_driver;
      const std::uint64_t stream = branch_stream(b, j);
      const double root_dt = std::sqrt(g.dt());
      for (std::size_t row = s_idx; row < g.steps; ++row) {
        for (std::size_t col = 0; col < driver.dim; ++col) {
          driver.at(row, col) =
              root_dt * rng::standard_normal_at(scenario.rng.seed, stream,
                                                static_cast<std::uint32_t>(col),
                                                static_cast<std::uint32_t>(row));
        }
      }
      const SimulatedPath branch = simulate_path(scenario, g, driver);
      if (!branch.funds.valid) continue;
      branch_values.push_back(average_return(branch.funds, 0, t_idx));
    }
    const SampleStats st = sample_stats(branch_values);
    inside[b] =
        std::abs(st.mean - anchor) <= spec.confidence * st.std_error ? 1 : 0;
  });
  std::size_t usable_bases = 0, inside_count = 0;
  for (std::size_t b = 0; b < bases; ++b) {
    if (base_invalid[b]) continue;
    ++usable_bases;
    inside_count += inside[b];
  }
  const double fraction =
      usable_bases ? static_cast<double>(inside_count) / static_cast<double>(usable_bases)
                   : 0.0;
  const bool branch_ok = fraction >= spec.min_branch_fraction && usable_bases > 0;
  report.add_stat("branch_mean_within_band_fraction", fraction,
                  std::numeric_limits<double>::quiet_NaN(),
                  spec.min_branch_fraction, branch_ok);
  report.add_stat("branch_bases", static_cast<double>(usable_bases));

  if (inconclusive) {
    report.notes.push_back(
        "inconclusive: more than 1% of paths hit the positivity floor");
  }
  report.pass = unconditional_ok && branch_ok && !inconclusive;
  report.wall_ms = clock.ms();
  return report;
}

TestReport submartingale_test(const Scenario& scenario,
                              const MartingaleTestSpec& spec, std::size_t threads) {
  Stopwatch clock;
  for (const auto& seg : scenario.market.mu.values) {
    for (double m : seg) {
      if (m < 0.0) {
        throw ValidationError("submartingale test requires mu >= 0 everywhere");
      }
    }
  }
  for (const auto& seg : scenario.funds.weights.values) {
    for (double w : seg) {
      if (w < 0.0) {
        throw ValidationError(
            "submartingale test requires long-only weights (pi >= 0)");
      }
    }
  }
  const TimeGrid grid = scenario.grid();
  spec.validate(grid);
  std::vector<std::size_t> check_idx;
  for (double c : spec.checkpoints) check_idx.push_back(node_index(grid, c));
  const std::size_t M = spec.paths;

  TestReport report;
  report.name = "submartingale";
  report.scenario_digest = scenario.digest;
  report.paths = M;
  report.confidence = spec.confidence;

  std::vector<std::vector<double>> rbars(check_idx.size(),
                                         std::vector<double>(M, 0.0));
  std::vector<unsigned char> invalid(M, 0);
  parallel_for(M, threads, [&](std::size_t p) {
    const SimulatedPath sim = simulate_path(scenario, p);
    if (!sim.funds.valid) {
      invalid[p] = 1;
      return;
    }
    for (std::size_t c = 0; c < check_idx.size(); ++c) {
      rbars[c][p] = average_return(sim.funds, 0, check_idx[c]);
    }
  });
  for (std::size_t p = 0; p < M; ++p) {
    if (invalid[p]) ++report.invalid_paths;
  }

  for (std::size_t c = 0; c < check_idx.size(); ++c) {
    std::vector<double> values;
    for (std::size_t p = 0; p < M; ++p) {
      if (!invalid[p]) values.push_back(rbars[c][p]);
    }
    const SampleStats st = sample_stats(values);
    report.add_stat("mean_rbar@t=" + format_checkpoint(spec.checkpoints[c]),
                    st.mean, st.std_error);
  }

  bool weak_ok = true;
  bool strict_ok = true;
  for (std::size_t c = 0; c + 1 < check_idx.size(); ++c) {
    std::vector<double> diffs;
    for (std::size_t p = 0; p < M; ++p) {
      if (!invalid[p]) diffs.push_back(rbars[c + 1][p] - rbars[c][p]);
    }
    const SampleStats st = sample_stats(diffs);
    const bool weak = st.mean >= -spec.confidence * st.std_error;
    const bool strict = st.mean > spec.confidence * st.std_error;
    weak_ok = weak_ok && weak;
    strict_ok = strict_ok && strict;
    const std::string pair = format_checkpoint(spec.checkpoints[c]) + "->" +
                             format_checkpoint(spec.checkpoints[c + 1]);
    report.add_stat("mean_diff@" + pair, st.mean, st.std_error,
                    spec.confidence * st.std_error, weak);
    report.add_stat("strict_increase@" + pair, strict ? 1.0 : 0.0,
                    std::numeric_limits<double>::quiet_NaN(), 1.0, strict);
  }
  const bool inconclusive = report.invalid_paths * 100 > M;
  if (inconclusive) {
    report.notes.push_back(
        "inconclusive: more than 1% of paths hit the positivity floor");
  }
  report.add_stat("strict_increase_all", strict_ok ? 1.0 : 0.0);
  report.pass = weak_ok && !inconclusive;
  report.wall_ms = clock.ms();
  return report;
}

TestReport residual_check(const Scenario& scenario, std::size_t n_paths,
                          std::size_t threads, double flow_increment_tol) {
  Stopwatch clock;
  if (n_paths < 1) throw ValidationError("residual check needs at least one path");
  std::vector<ResidualReport> reports(n_paths);
  std::vector<unsigned char> invalid(n_paths, 0);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    const SimulatedPath sim = simulate_path(scenario, p);
    if (!sim.funds.valid) {
      invalid[p] = 1;
      return;
    }
    reports[p] = consistency_residuals(sim.funds, sim.assets, flow_increment_tol);
  });

  TestReport report;
  report.name = "residuals";
  report.scenario_digest = scenario.digest;
  report.paths = n_paths;
  ResidualReport worst;
  worst.flow_increment_tol = flow_increment_tol;
  for (std::size_t p = 0; p < n_paths; ++p) {
    if (invalid[p]) {
      ++report.invalid_paths;
      continue;
    }
    worst.wealth_identity = std::max(worst.wealth_identity, reports[p].wealth_identity);
    worst.flow_aggregation =
        std::max(worst.flow_aggregation, reports[p].flow_aggregation);
    worst.flow_increment = std::max(worst.flow_increment, reports[p].flow_increment);
  }
  report.add_stat("max_wealth_identity_residual", worst.wealth_identity,
                  std::numeric_limits<double>::quiet_NaN(), worst.wealth_identity_tol,
                  worst.wealth_identity <= worst.wealth_identity_tol);
  report.add_stat("max_flow_aggregation_residual", worst.flow_aggregation,
                  std::numeric_limits<double>::quiet_NaN(), worst.flow_aggregation_tol,
                  worst.flow_aggregation <= worst.flow_aggregation_tol);
  report.add_stat("max_flow_increment_residual", worst.flow_increment,
                  std::numeric_limits<double>::quiet_NaN(), worst.flow_increment_tol,
                  worst.flow_increment <= worst.flow_increment_tol);
  report.pass = worst.wealth_identity <= worst.wealth_identity_tol &&
                worst.flow_aggregation <= worst.flow_aggregation_tol &&
                worst.flow_increment <= worst.flow_increment_tol &&
                report.invalid_paths == 0;
  report.wall_ms = clock.ms();
  return report;
}

TestReport convergence_study(const Scenario& scenario,
                             std::span<const std::size_t> step_counts,
                             ConvergenceMetric metric) {
  Stopwatch clock;
  if (metric == ConvergenceMetric::kProperty1Error && scenario.n_funds() != 1) {
    throw ValidationError("property1 metric requires a single-fund scenario");
  }
  const auto sims = simulate_refinements(scenario, step_counts, /*stream=*/0);
  std::vector<double> values;
  for (const auto& sim : sims) {
    if (!sim.funds.valid) {
      throw InvalidPathError("convergence study: path invalid at node " +
                             std::to_string(sim.funds.first_bad_node));
    }
    if (metric == ConvergenceMetric::kProperty1Error) {
      const std::size_t S = sim.funds.steps;
      const double rbar = average_return(sim.funds, 0, S);
      const double target = per_fund_returns(sim.funds, 0, S)[0];
      values.push_back(relative_gap(rbar, target));
    } else {
      values.push_back(
          consistency_residuals(sim.funds, sim.assets).flow_increment);
    }
  }

  TestReport report;
  report.name = metric == ConvergenceMetric::kProperty1Error
                    ? "convergence_property1"
                    : "convergence_flow_residual";
  report.scenario_digest = scenario.digest;
  report.paths = 1;
  for (std::size_t l = 0; l < values.size(); ++l) {
    report.add_stat("metric@steps=" + std::to_string(step_counts[l]), values[l]);
  }
  NeumaierSum order_sum;
  std::size_t order_count = 0;
  for (std::size_t l = 0; l + 1 < values.size(); ++l) {
    if (values[l + 1] <= kRoundingFloor || values[l] <= kRoundingFloor) continue;
    const double order = std::log2(values[l] / values[l + 1]) /
                         std::log2(static_cast<double>(step_counts[l + 1]) /
                                   static_cast<double>(step_counts[l]));
    report.add_stat("order@steps=" + std::to_string(step_counts[l]) + "->" +
                        std::to_string(step_counts[l + 1]),
                    order);
    order_sum.add(order);
    ++order_count;
  }
  if (order_count == 0) {
    report.notes.push_back("errors at rounding floor; order undefined");
    report.pass = true;
  } else {
    const double mean_order =
        order_sum.value() / static_cast<double>(order_count);
    const bool ok = mean_order >= 0.5 && mean_order <= 1.5;
    report.add_stat("mean_order", mean_order,
                    std::numeric_limits<double>::quiet_NaN(), 0.5, ok);
    report.pass = ok;
  }
  report.wall_ms = clock.ms();
  return report;
}

}  // namespace fundsim::verify
