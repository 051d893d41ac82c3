#include "fundsim/scenario.hpp"

#include <cmath>
#include <set>
#include <string>

#include <json.hpp>

#include "fundsim/artifacts.hpp"
#include "fundsim/errors.hpp"

namespace fundsim {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError(ctx + ": unknown field '" + it.key() + "'");
    }
  }
}

const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError("missing field: " + ctx + key);
  return *it;
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field + " must be a number");
  return j.get<double>();
}

std::vector<double> parse_vector(const json& j, std::size_t len,
                                 const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + " must be an array");
  if (len != 0 && j.size() != len) {
    throw ValidationError(field + " must have " + std::to_string(len) +
                          " entries, has " + std::to_string(j.size()));
  }
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v.push_back(as_number(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return v;
}

// rows x cols nested array, flattened row-major
std::vector<double> parse_matrix(const json& j, std::size_t rows, std::size_t cols,
                                 const std::string& field) {
  if (!j.is_array() || j.size() != rows) {
    throw ValidationError(field + " must be an array of " + std::to_string(rows) +
                          " rows");
  }
  std::vector<double> m;
  m.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = parse_vector(j[i], cols, field + " row " + std::to_string(i));
    m.insert(m.end(), row.begin(), row.end());
  }
  return m;
}

template <typename ElemParser>
PiecewiseValues parse_piecewise(const json& j, const std::string& field,
                                ElemParser parse_elem) {
  PiecewiseValues p;
  if (j.is_object()) {
    reject_unknown_keys(j, {"times", "values"}, field);
    p.times = parse_vector(require(j, "times", field + "."), 0, field + ".times");
    const json& values = require(j, "values", field + ".");
    if (!values.is_array() || values.size() != p.times.size()) {
      throw ValidationError(field + ".values must match times in length");
    }
    for (std::size_t s = 0; s < values.size(); ++s) {
      p.values.push_back(
          parse_elem(values[s], field + ".values[" + std::to_string(s) + "]"));
    }
  } else {
    p.times = {0.0};
    p.values.push_back(parse_elem(j, field));
  }
  return p;
}

json vector_to_json(const std::vector<double>& v) { return json(v); }

json matrix_to_json(const std::vector<double>& m, std::size_t rows,
                    std::size_t cols) {
  json rows_json = json::array();
  for (std::size_t i = 0; i < rows; ++i) {
    rows_json.push_back(std::vector<double>(m.begin() + static_cast<long>(i * cols),
                                            m.begin() + static_cast<long>((i + 1) * cols)));
  }
  return rows_json;
}

template <typename ElemDump>
json piecewise_to_json(const PiecewiseValues& p, ElemDump dump_elem) {
  json values = json::array();
  for (const auto& seg : p.values) values.push_back(dump_elem(seg));
  return json{{"times", p.times}, {"values", values}};
}

}  // namespace

void Scenario::finalize() {
  build_time_grid(horizon, steps);  // validates horizon/steps
  market.validate();
  funds.validate(market.n_assets);
  if (run.paths < 1) throw ValidationError("run.paths must be >= 1");
  if (run.checkpoints.empty()) run.checkpoints = {horizon};
  for (std::size_t i = 0; i < run.checkpoints.size(); ++i) {
    const double c = run.checkpoints[i];
    if (!(c > 0.0) || c > horizon * (1.0 + 1e-12)) {
      throw ValidationError("run.checkpoints[" + std::to_string(i) +
                            "] must lie in (0, horizon]");
    }
    if (i > 0 && !(c > run.checkpoints[i - 1])) {
      throw ValidationError("run.checkpoints must be strictly increasing");
    }
  }
  digest.clear();
  digest = fnv1a64_hex(canonical_text());
}

std::string Scenario::canonical_text() const {
  const std::size_t N = market.n_assets;
  const std::size_t n = funds.n_funds;
  json j;
  j["horizon"] = horizon;
  j["steps"] = steps;
  j["market"] = {
      {"c0", market.c0},
      {"mu", piecewise_to_json(market.mu, vector_to_json)},
      {"sigma", piecewise_to_json(market.sigma,
                                  [&](const std::vector<double>& m) {
                                    return matrix_to_json(m, N, N);
                                  })},
  };
  j["funds"] = {
      {"k0", funds.k0},
      {"w0", funds.w0},
      {"weights", piecewise_to_json(funds.weights,
                                    [&](const std::vector<double>& m) {
                                      return matrix_to_json(m, n, N);
                                    })},
      {"transfers", piecewise_to_json(funds.transfers,
                                      [&](const std::vector<double>& m) {
                                        return matrix_to_json(m, n, n);
                                      })},
      {"flow_drift", piecewise_to_json(funds.flow_drift, vector_to_json)},
      {"flow_vol", piecewise_to_json(funds.flow_vol, vector_to_json)},
  };
  j["rng"] = {{"seed", rng.seed}};
  j["run"] = {{"paths", run.paths},
              {"checkpoints", run.checkpoints},
              {"write_trajectories", run.write_trajectories}};
  return j.dump();
}

Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
  reject_unknown_keys(j, {"horizon", "steps", "market", "funds", "rng", "run"},
                      "scenario");

  Scenario sc;
  if (j.contains("horizon")) sc.horizon = as_number(j["horizon"], "horizon");
  if (j.contains("steps")) {
    if (!j["steps"].is_number_unsigned()) {
      throw ValidationError("steps must be a non-negative integer");
    }
    sc.steps = j["steps"].get<std::size_t>();
  }

  const json& market = require(j, "market", "");
  reject_unknown_keys(market, {"c0", "mu", "sigma"}, "market");
  sc.market.c0 = parse_vector(require(market, "c0", "market."), 0, "market.c0");
  sc.market.n_assets = sc.market.c0.size();
  const std::size_t N = sc.market.n_assets;
  if (market.contains("mu")) {
    sc.market.mu = parse_piecewise(market["mu"], "market.mu",
                                   [N](const json& e, const std::string& f) {
                                     return parse_vector(e, N, f);
                                   });
  } else {
    sc.market.mu = PiecewiseValues::constant(std::vector<double>(N, 0.0));
  }
  sc.market.sigma = parse_piecewise(require(market, "sigma", "market."),
                                    "market.sigma",
                                    [N](const json& e, const std::string& f) {
                                      return parse_matrix(e, N, N, f);
                                    });

  const json& fj = require(j, "funds", "");
  reject_unknown_keys(
      fj, {"k0", "w0", "weights", "transfers", "flow_drift", "flow_vol"}, "funds");
  sc.funds.k0 = parse_vector(require(fj, "k0", "funds."), 0, "funds.k0");
  sc.funds.n_funds = sc.funds.k0.size();
  const std::size_t n = sc.funds.n_funds;
  sc.funds.w0 = parse_vector(require(fj, "w0", "funds."), n, "funds.w0");
  sc.funds.weights = parse_piecewise(require(fj, "weights", "funds."),
                                     "funds.weights",
                                     [n, N](const json& e, const std::string& f) {
                                       return parse_matrix(e, n, N, f);
                                     });
  if (fj.contains("transfers")) {
    sc.funds.transfers = parse_piecewise(fj["transfers"], "funds.transfers",
                                         [n](const json& e, const std::string& f) {
                                           return parse_matrix(e, n, n, f);
                                         });
  } else {
    sc.funds.transfers = PiecewiseValues::constant(std::vector<double>(n * n, 0.0));
  }
  auto parse_flow = [&](const char* key) {
    if (fj.contains(key)) {
      return parse_piecewise(fj[key], std::string("funds.") + key,
                             [n](const json& e, const std::string& f) {
                               return parse_vector(e, n, f);
                             });
    }
    return PiecewiseValues::constant(std::vector<double>(n, 0.0));
  };
  sc.funds.flow_drift = parse_flow("flow_drift");
  sc.funds.flow_vol = parse_flow("flow_vol");

  if (j.contains("rng")) {
    reject_unknown_keys(j["rng"], {"seed"}, "rng");
    if (j["rng"].contains("seed")) {
      if (!j["rng"]["seed"].is_number_unsigned()) {
        throw ValidationError("rng.seed must be a non-negative integer");
      }
      sc.rng.seed = j["rng"]["seed"].get<std::uint64_t>();
    }
  }
  bool trajectories_given = false;
  if (j.contains("run")) {
    const json& run = j["run"];
    reject_unknown_keys(run, {"paths", "checkpoints", "write_trajectories"}, "run");
    if (run.contains("paths")) {
      if (!run["paths"].is_number_unsigned()) {
        throw ValidationError("run.paths must be a non-negative integer");
      }
      sc.run.paths = run["paths"].get<std::size_t>();
    }
    if (run.contains("checkpoints")) {
      sc.run.checkpoints = parse_vector(run["checkpoints"], 0, "run.checkpoints");
    }
    if (run.contains("write_trajectories")) {
      if (!run["write_trajectories"].is_boolean()) {
        throw ValidationError("run.write_trajectories must be a boolean");
      }
      sc.run.write_trajectories = run["write_trajectories"].get<bool>();
      trajectories_given = true;
    }
  }
  if (!trajectories_given) sc.run.write_trajectories = (sc.run.paths == 1);

  sc.finalize();
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  return parse_scenario_text(read_file(path));
}

SimulatedPath simulate_path(const Scenario& scenario, std::uint64_t stream) {
  const TimeGrid grid = scenario.grid();
  const BrownianDriver driver =
      sample_driver(grid, scenario.driver_dim(), scenario.rng.seed, stream);
  return simulate_path(scenario, grid, driver);
}

SimulatedPath simulate_path(const Scenario& scenario, const TimeGrid& grid,
                            const BrownianDriver& driver,
                            const PrescribedUnits* prescribed) {
  SimulatedPath sim;
  sim.assets = simulate_assets(scenario.market, driver, grid);
  sim.funds = simulate_funds(scenario.funds, sim.assets, driver, grid, prescribed);
  return sim;
}

}  // namespace fundsim
