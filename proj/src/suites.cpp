#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fundsim/errors.hpp"
#include "fundsim/verify.hpp"

namespace fundsim::verify {

namespace {

using nlohmann::json;

struct PreconditionFailure {
  std::string message;
};

Scenario with_overrides(Scenario scenario, const VerifyOptions& options) {
  bool touched = false;
  if (options.seed) {
    scenario.rng.seed = *options.seed;
    touched = true;
  }
  if (options.steps) {
    scenario.steps = *options.steps;
    touched = true;
  }
  if (touched) scenario.finalize();
  return scenario;
}

Scenario single_fund_restriction(const Scenario& base, std::size_t fund) {
  Scenario sc = base;
  const std::size_t N = base.n_assets();
  sc.funds.n_funds = 1;
  sc.funds.k0 = {base.funds.k0[fund]};
  sc.funds.w0 = {base.funds.w0[fund]};
  auto take_row = [&](const PiecewiseValues& p, std::size_t width) {
    PiecewiseValues out;
    out.times = p.times;
    for (const auto& seg : p.values) {
      out.values.emplace_back(seg.begin() + static_cast<long>(fund * width),
                              seg.begin() + static_cast<long>((fund + 1) * width));
    }
    return out;
  };
  sc.funds.weights = take_row(base.funds.weights, N);
  sc.funds.flow_drift = take_row(base.funds.flow_drift, 1);
  sc.funds.flow_vol = take_row(base.funds.flow_vol, 1);
  sc.funds.transfers = PiecewiseValues::constant({0.0});
  sc.finalize();
  return sc;
}

Scenario equalized_funds_variant(const Scenario& base) {
  Scenario sc = base;
  const std::size_t n = base.n_funds();
  const std::size_t N = base.n_assets();
  for (std::size_t i = 1; i < n; ++i) sc.funds.w0[i] = sc.funds.w0[0];
  for (auto& seg : sc.funds.weights.values) {
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < N; ++j) seg[i * N + j] = seg[j];
    }
  }
  sc.funds.transfers =
      PiecewiseValues::constant(std::vector<double>(n * n, 0.0));
  // the check needs pathwise-distinct stochastic flows per fund
  bool vols_usable = true;
  for (const auto& seg : sc.funds.flow_vol.values) {
    for (std::size_t i = 0; i < n && vols_usable; ++i) {
      if (!(seg[i] > 0.0)) vols_usable = false;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (seg[i] == seg[j]) vols_usable = false;
      }
    }
  }
  if (!vols_usable) {
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) {
      beta[i] = 1e-3 * (static_cast<double>(i) + 1.0) * sc.funds.k0[i] * sc.funds.w0[i];
    }
    sc.funds.flow_vol = PiecewiseValues::constant(beta);
  }
  sc.finalize();
  return sc;
}

Scenario frozen_units_variant(const Scenario& base) {
  Scenario sc = base;
  const std::size_t n = base.n_funds();
  sc.funds.transfers = PiecewiseValues::constant(std::vector<double>(n * n, 0.0));
  sc.funds.flow_drift = PiecewiseValues::constant(std::vector<double>(n, 0.0));
  sc.funds.flow_vol = PiecewiseValues::constant(std::vector<double>(n, 0.0));
  sc.finalize();
  return sc;
}

Scenario driftless_variant(const Scenario& base) {
  Scenario sc = base;
  for (auto& seg : sc.market.mu.values) {
    std::fill(seg.begin(), seg.end(), 0.0);
  }
  sc.finalize();
  return sc;
}

Scenario nonneg_drift_variant(const Scenario& base) {
  Scenario sc = base;
  for (auto& seg : sc.market.mu.values) {
    for (double& m : seg) m = std::abs(m);
  }
  for (const auto& seg : sc.funds.weights.values) {
    for (double w : seg) {
      if (w < 0.0) {
        throw PreconditionFailure{
            "submartingale: cannot derive a long-only variant from weights "
            "with negative entries"};
      }
    }
  }
  sc.finalize();
  return sc;
}

MartingaleTestSpec default_spec(const Scenario& scenario,
                                const VerifyOptions& options) {
  MartingaleTestSpec spec;
  const double T = scenario.horizon;
  spec.checkpoints = {0.25 * T, 0.5 * T, T};
  spec.branch_time = 0.5 * T;
  if (options.paths) spec.paths = std::max<std::size_t>(*options.paths, 100);
  return spec;
}

}  // namespace

std::string TestReport::json() const {
  nlohmann::json stats_json = nlohmann::json::array();
  for (const auto& s : stats) {
    nlohmann::json e{{"name", s.name}, {"value", s.value}, {"pass", s.pass}};
    if (std::isfinite(s.std_error)) e["std_error"] = s.std_error;
    if (std::isfinite(s.tolerance)) e["tolerance"] = s.tolerance;
    stats_json.push_back(e);
  }
  nlohmann::json j{{"name", name},
                   {"scenario_digest", scenario_digest},
                   {"paths", paths},
                   {"invalid_paths", invalid_paths},
                   {"pass", pass},
                   {"precondition_error", precondition_error},
                   {"stats", stats_json},
                   {"notes", notes}};
  if (confidence > 0.0) j["confidence"] = confidence;
  return j.dump(2) + "\n";
}

Suite parse_suite(std::string_view name) {
  if (name == "property1") return Suite::kProperty1;
  if (name == "property2" || name == "chain") return Suite::kChain;
  if (name == "property3") return Suite::kProperty3;
  if (name == "property4") return Suite::kProperty4;
  if (name == "martingale") return Suite::kMartingale;
  if (name == "submartingale") return Suite::kSubmartingale;
  if (name == "residuals") return Suite::kResiduals;
  if (name == "convergence") return Suite::kConvergence;
  if (name == "all") return Suite::kAll;
  throw ValidationError("unknown suite '" + std::string(name) +
                        "'; expected one of property1, property2|chain, property3, "
                        "property4, martingale, submartingale, residuals, "
                        "convergence, all");
}

std::string suite_name(Suite suite) {
  switch (suite) {
    case Suite::kProperty1: return "property1";
    case Suite::kChain: return "chain";
    case Suite::kProperty3: return "property3";
    case Suite::kProperty4: return "property4";
    case Suite::kMartingale: return "martingale";
    case Suite::kSubmartingale: return "submartingale";
    case Suite::kResiduals: return "residuals";
    case Suite::kConvergence: return "convergence";
    case Suite::kAll: return "all";
  }
  return "?";
}

std::vector<TestReport> run_suite(const Scenario& base, Suite suite,
                                  const VerifyOptions& options) {
  const Scenario scenario = with_overrides(base, options);
  const bool derive = suite == Suite::kAll || options.allow_derivation;
  const std::vector<std::size_t> refinements{64, 128, 256, 512};
  const std::vector<std::size_t> refinements_p4{128, 256, 512};

  std::vector<Suite> selected;
  if (suite == Suite::kAll) {
    selected = {Suite::kChain,       Suite::kProperty1,     Suite::kProperty3,
                Suite::kProperty4,   Suite::kMartingale,    Suite::kSubmartingale,
                Suite::kResiduals,   Suite::kConvergence};
  } else {
    selected = {suite};
  }

  std::vector<TestReport> reports;
  for (Suite s : selected) {
    TestReport report;
    try {
      switch (s) {
        case Suite::kProperty1: {
          Scenario sc = scenario;
          std::string note;
          if (derive && sc.n_funds() != 1) {
            sc = single_fund_restriction(scenario, 0);
            note = "derived: single-fund restriction of scenario " + scenario.digest;
          }
          report = check_property1(sc, refinements);
          if (!note.empty()) report.notes.push_back(note);
          break;
        }
        case Suite::kChain: {
          const std::size_t n_paths = options.paths.value_or(100);
          report = check_property2(scenario, n_paths, 10, options.threads);
          break;
        }
        case Suite::kProperty3: {
          Scenario sc = scenario;
          std::string note;
          bool qualifies = sc.n_funds() >= 2 && sc.funds.transfers_are_zero();
          for (std::size_t i = 1; qualifies && i < sc.n_funds(); ++i) {
            if (sc.funds.w0[i] != sc.funds.w0[0]) qualifies = false;
          }
          if (qualifies) {
            for (const auto& seg : sc.funds.weights.values) {
              for (std::size_t i = 1; qualifies && i < sc.n_funds(); ++i) {
                for (std::size_t j = 0; j < sc.n_assets(); ++j) {
                  if (seg[i * sc.n_assets() + j] != seg[j]) qualifies = false;
                }
              }
            }
          }
          if (derive && !qualifies) {
            if (scenario.n_funds() < 2) {
              throw PreconditionFailure{"property3 needs at least two funds"};
            }
            sc = equalized_funds_variant(scenario);
            note = "derived: equalized-funds variant of scenario " + scenario.digest;
          }
          report = check_property3(sc, refinements);
          if (!note.empty()) report.notes.push_back(note);
          break;
        }
        case Suite::kProperty4: {
          Scenario sc = scenario;
          std::string note;
          const bool frozen = sc.funds.transfers_are_zero() &&
                              sc.funds.flow_drift_is_zero() &&
                              sc.funds.flow_vol_is_zero();
          if (derive && !frozen) {
            sc = frozen_units_variant(scenario);
            note = "derived: frozen-units variant of scenario " + scenario.digest;
          }
          report = check_property4(sc, refinements_p4);
          if (!note.empty()) report.notes.push_back(note);
          break;
        }
        case Suite::kMartingale: {
          Scenario sc = scenario;
          std::string note;
          bool driftless = true;
          for (const auto& seg : sc.market.mu.values) {
            for (double m : seg) {
              if (m != 0.0) driftless = false;
            }
          }
          if (derive && !driftless) {
            sc = driftless_variant(scenario);
            note = "derived: driftless variant of scenario " + scenario.digest;
          }
          report = martingale_test(sc, default_spec(sc, options), options.threads);
          if (!note.empty()) report.notes.push_back(note);
          break;
        }
        case Suite::kSubmartingale: {
          Scenario sc = scenario;
          std::string note;
          bool nonneg = true;
          for (const auto& seg : sc.market.mu.values) {
            for (double m : seg) {
              if (m < 0.0) nonneg = false;
            }
          }
          if (derive && !nonneg) {
            sc = nonneg_drift_variant(scenario);
            note = "derived: non-negative-drift variant of scenario " +
                   scenario.digest;
          }
          report =
              submartingale_test(sc, default_spec(sc, options), options.threads);
          if (!note.empty()) report.notes.push_back(note);
          break;
        }
        case Suite::kResiduals: {
          const std::size_t n_paths = options.paths.value_or(50);
          report = residual_check(scenario, n_paths, options.threads);
          break;
        }
        case Suite::kConvergence: {
          report = convergence_study(scenario, refinements,
                                     ConvergenceMetric::kFlowIncrementResidual);
          break;
        }
        case Suite::kAll:
          break;  // unreachable
      }
    } catch (const PreconditionFailure& e) {
      report = TestReport{};
      report.name = suite_name(s);
      report.scenario_digest = scenario.digest;
      report.precondition_error = true;
      report.notes.push_back("error: " + e.message);
    } catch (const ValidationError& e) {
      report = TestReport{};
      report.name = suite_name(s);
      report.scenario_digest = scenario.digest;
      report.precondition_error = true;
      report.notes.push_back(std::string("error: ") + e.what());
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string render_table(std::span<const TestReport> reports) {
  std::size_t name_width = 4;
  for (const auto& r : reports) name_width = std::max(name_width, r.name.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %-6s  %8s  %7s  %9s  %s\n",
                static_cast<int>(name_width), "test", "status", "paths", "invalid",
                "wall_ms", "detail");
  out << line;
  for (const auto& r : reports) {
    std::string detail;
    for (const auto& s : r.stats) {
      if (!s.pass) {
        detail = s.name + "=" + std::to_string(s.value);
        break;
      }
    }
    if (detail.empty() && !r.stats.empty()) {
      detail = r.stats.front().name + "=" + std::to_string(r.stats.front().value);
    }
    if (!r.notes.empty()) {
      detail += detail.empty() ? r.notes.front() : ("; " + r.notes.front());
    }
    std::snprintf(line, sizeof(line), "%-*s  %-6s  %8zu  %7zu  %9.1f  %s\n",
                  static_cast<int>(name_width), r.name.c_str(),
                  r.precondition_error ? "ERROR" : (r.pass ? "PASS" : "FAIL"),
                  r.paths, r.invalid_paths, r.wall_ms, detail.c_str());
    out << line;
  }
  return out.str();
}

}  // namespace fundsim::verify
