#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fundsim/scenario.hpp"

namespace fundsim::verify {

// Outcome of one check. Tolerances are pre-registered: `pass` is a pure
// function of the recorded statistics. wall_ms is diagnostic only and is
// deliberately left out of the JSON serialization so reports are
// byte-identical across runs and worker counts.
struct TestReport {
  struct Stat {
    std::string name;
    double value = 0.0;
    double std_error = std::numeric_limits<double>::quiet_NaN();
    double tolerance = std::numeric_limits<double>::quiet_NaN();
    bool pass = true;
  };

  std::string name;
  std::string scenario_digest;
  std::size_t paths = 0;
  double confidence = 0.0;  // SE multiplier for statistical checks, else 0
  bool pass = false;
  bool precondition_error = false;  // suite ran against an incompatible scenario
  std::size_t invalid_paths = 0;
  double wall_ms = 0.0;
  std::vector<Stat> stats;
  std::vector<std::string> notes;

  std::string json() const;  // deterministic
  void add_stat(std::string stat_name, double value,
                double se = std::numeric_limits<double>::quiet_NaN(),
                double tol = std::numeric_limits<double>::quiet_NaN(),
                bool stat_pass = true);
};

struct MartingaleTestSpec {
  std::vector<double> checkpoints = {0.25, 0.5, 1.0};
  std::size_t paths = 10000;        // M
  std::size_t branch_paths = 1000;  // M' continuations per frozen path
  std::size_t branch_bases = 50;    // frozen paths for the conditional check
  double branch_time = 0.5;
  double confidence = 4.0;
  double min_branch_fraction = 0.95;

  void validate(const TimeGrid& grid) const;
};

// Streams 2^63 and above are reserved for branch continuations so they can
// never collide with base path streams.
std::uint64_t branch_stream(std::size_t base_index, std::size_t branch_index);

// --- individual checks ----------------------------------------------------

// Single-fund limit: rbar(s,t) converges to the fund's simple return at rate
// ~dt on a fixed driver; the refinement list must be nested.
TestReport check_property1(const Scenario& scenario,
                           std::span<const std::size_t> refinements);

// Multiplicative chain rule over node triples s < u < t, exact to rounding.
TestReport check_property2(const Scenario& scenario, std::size_t n_paths,
                           std::size_t n_triples, std::size_t threads);

// Identical unit values across funds (shared w0 and weights), heterogeneous
// flows allowed: rbar converges to the common simple return.
TestReport check_property3(const Scenario& scenario,
                           std::span<const std::size_t> refinements);

// Constant unit counts (all flows and transfers zero): rbar matches both the
// group wealth return and the unit-weighted per-fund form.
TestReport check_property4(const Scenario& scenario,
                           std::span<const std::size_t> refinements);

// Prescribed k_i(t) = unit_weights[i] * phi(t) via harness-imposed flows.
TestReport check_property4_prescribed(const Scenario& scenario,
                                      std::span<const double> unit_weights,
                                      const std::function<double(double)>& phi,
                                      std::span<const std::size_t> refinements);

// Unconditional and branching (nested) Monte Carlo martingale checks of
// rbar(0, .) under driftless prices.
TestReport martingale_test(const Scenario& scenario, const MartingaleTestSpec& spec,
                           std::size_t threads);

// Monotone means under non-negative drifts and long-only weights. The weak
// no-violation condition decides `pass`; the strict increase beyond the
// confidence band is recorded as a separate statistic.
TestReport submartingale_test(const Scenario& scenario,
                              const MartingaleTestSpec& spec, std::size_t threads);

// Accounting identity residuals across Monte Carlo paths.
TestReport residual_check(const Scenario& scenario, std::size_t n_paths,
                          std::size_t threads, double flow_increment_tol = 5e-3);

enum class ConvergenceMetric { kProperty1Error, kFlowIncrementResidual };

// Metric vs dt on nested drivers with empirical order estimates.
TestReport convergence_study(const Scenario& scenario,
                             std::span<const std::size_t> step_counts,
                             ConvergenceMetric metric);

// --- suites -----------------------------------------------------------------

enum class Suite {
  kProperty1,
  kChain,  // property 2
  kProperty3,
  kProperty4,
  kMartingale,
  kSubmartingale,
  kResiduals,
  kConvergence,
  kAll,
};

Suite parse_suite(std::string_view name);
std::string suite_name(Suite suite);

struct VerifyOptions {
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> steps;
  // `all` derives per-suite scenario variants; explicit suites validate
  // strictly against the scenario as given.
  bool allow_derivation = false;
};

std::vector<TestReport> run_suite(const Scenario& scenario, Suite suite,
                                  const VerifyOptions& options);

// Aligned text table for humans (one row per report, wall time included).
std::string render_table(std::span<const TestReport> reports);

}  // namespace fundsim::verify
