#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fundsim/artifacts.hpp"
#include "fundsim/errors.hpp"
#include "fundsim/parallel.hpp"
#include "fundsim/returns.hpp"
#include "fundsim/scenario.hpp"
#include "fundsim/stats.hpp"
#include "fundsim/verify.hpp"

namespace {

using namespace fundsim;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTestFailure = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string scenario_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> steps;
  std::string out_dir;
  std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool scenario_required = true) {
  auto* opt = cmd->add_option("--scenario", args.scenario_file,
                              "scenario file (JSON, see README)");
  if (scenario_required) opt->required();
  cmd->add_option("--seed", args.seed, "override rng.seed");
  cmd->add_option("--paths", args.paths, "override run.paths / suite path count");
  cmd->add_option("--steps", args.steps, "override steps");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--threads", args.threads, "worker threads (default 1)");
}

Scenario load_scenario(const CommonArgs& args) {
  Scenario sc = parse_scenario(args.scenario_file);
  if (args.seed) sc.rng.seed = *args.seed;
  if (args.paths) sc.run.paths = *args.paths;
  if (args.steps) sc.steps = *args.steps;
  sc.finalize();
  return sc;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory: " + dir);
  }
}

std::string csv_provenance(const Scenario& sc, const char* kind) {
  std::ostringstream line;
  line << "# fundsim " << kind << ", scenario_digest=" << sc.digest
       << ", seed=" << sc.rng.seed << "\n";
  return line.str();
}

std::string trajectory_csv(const Scenario& sc, const SimulatedPath& sim,
                           std::uint64_t stream) {
  const std::size_t N = sc.n_assets();
  const std::size_t n = sc.n_funds();
  const TimeGrid grid = sc.grid();
  const ReturnSeries series = return_series(sim.funds, 0);
  std::ostringstream out;
  out << csv_provenance(sc, "trajectory") << "# stream=" << stream << "\n";
  out << "time";
  for (std::size_t j = 0; j < N; ++j) out << ",c_" << (j + 1);
  for (std::size_t i = 0; i < n; ++i) {
    out << ",w_" << (i + 1) << ",k_" << (i + 1) << ",A_" << (i + 1);
  }
  out << ",A,D,R,rbar\n";
  for (std::size_t k = 0; k <= grid.steps; ++k) {
    out << format_full(grid.nodes[k]);
    for (std::size_t j = 0; j < N; ++j) out << "," << format_full(sim.assets.price(k, j));
    for (std::size_t i = 0; i < n; ++i) {
      out << "," << format_full(sim.funds.w(k, i)) << ","
          << format_full(sim.funds.units(k, i)) << ","
          << format_full(sim.funds.wealth(k, i));
    }
    NeumaierSum total_flow;
    for (std::size_t i = 0; i < n; ++i) total_flow.add(sim.funds.flow(k, i));
    out << "," << format_full(sim.funds.total(k)) << ","
        << format_full(total_flow.value()) << "," << format_full(series.log_return[k])
        << "," << format_full(series.rbar[k]) << "\n";
  }
  return out.str();
}

int cmd_simulate(const CommonArgs& args, bool strict) {
  const Scenario sc = load_scenario(args);
  const TimeGrid grid = sc.grid();
  std::vector<std::size_t> checkpoint_idx;
  for (double c : sc.run.checkpoints) checkpoint_idx.push_back(node_index(grid, c));

  const std::size_t M = sc.run.paths;
  std::vector<SimulatedPath> sims(M);
  parallel_for(M, args.threads,
               [&](std::size_t p) { sims[p] = simulate_path(sc, p); });

  std::size_t invalid = 0;
  for (const auto& sim : sims) {
    if (!sim.funds.valid) ++invalid;
  }

  if (!args.out_dir.empty()) {
    ensure_out_dir(args.out_dir);
    Manifest manifest;
    manifest.scenario_digest = sc.digest;
    manifest.seed = sc.rng.seed;

    std::ostringstream summary;
    summary << csv_provenance(sc, "summary");
    summary << "path,status";
    for (double c : sc.run.checkpoints) summary << ",rbar@" << format_full(c);
    summary << "\n";
    for (std::size_t p = 0; p < M; ++p) {
      const auto& sim = sims[p];
      summary << p << "," << (sim.funds.valid ? "ok" : "invalid");
      if (sim.funds.valid) {
        for (std::size_t idx : checkpoint_idx) {
          summary << "," << format_full(average_return(sim.funds, 0, idx));
        }
      } else {
        for (std::size_t c = 0; c < checkpoint_idx.size(); ++c) summary << ",";
      }
      summary << "\n";
    }
    write_file_atomic(args.out_dir + "/summary.csv", summary.str());
    manifest.file_names.push_back("summary.csv");

    if (sc.run.write_trajectories) {
      for (std::size_t p = 0; p < M; ++p) {
        if (!sims[p].funds.valid) continue;
        char name[64];
        std::snprintf(name, sizeof(name), "trajectory_%05zu.csv", p);
        write_file_atomic(args.out_dir + "/" + name,
                          trajectory_csv(sc, sims[p], p));
        manifest.file_names.push_back(name);
      }
    }
    manifest.write(args.out_dir);
  }

  std::printf("simulated %zu path(s), steps=%zu, digest=%s, invalid=%zu\n", M,
              sc.steps, sc.digest.c_str(), invalid);
  if (invalid > 0 && strict) return kExitTestFailure;
  return kExitOk;
}

int cmd_return(const CommonArgs& args, double from, double to,
               const std::string& mode, bool snap) {
  const Scenario sc = load_scenario(args);
  const TimeGrid grid = sc.grid();
  const std::size_t s = snap ? snap_index(grid, from) : node_index(grid, from);
  const std::size_t t = snap ? snap_index(grid, to) : node_index(grid, to);
  if (s > t) throw ValidationError("--from must not exceed --to");
  if (mode != "continuous" && mode != "drift-only" && mode != "discrete" &&
      mode != "deterministic") {
    throw ValidationError("unknown mode '" + mode +
                          "'; expected continuous, drift-only, discrete or "
                          "deterministic");
  }
  if (mode == "drift-only" && !sc.funds.flow_vol_is_zero()) {
    throw ValidationError(
        "mode drift-only requires a scenario with flow_vol == 0");
  }

  const std::size_t M = sc.run.paths;
  std::vector<double> values(M, 0.0);
  std::vector<unsigned char> invalid(M, 0);
  parallel_for(M, args.threads, [&](std::size_t p) {
    const SimulatedPath sim = simulate_path(sc, p);
    if (!sim.funds.valid) {
      invalid[p] = 1;
      return;
    }
    if (mode == "continuous") {
      values[p] = average_return(sim.funds, s, t);
    } else if (mode == "drift-only") {
      values[p] = average_return_drift_flows(sim.funds, sc.funds, s, t);
    } else if (mode == "discrete") {
      std::vector<std::size_t> nodes;
      for (std::size_t k = s; k <= t; ++k) nodes.push_back(k);
      values[p] = nodes.size() < 2
                      ? 0.0
                      : discrete_average_return(period_snapshots(sim.funds, nodes));
    } else {
      values[p] = deterministic_average_return(sim.funds, s, t);
    }
  });

  std::vector<double> valid_values;
  std::size_t invalid_count = 0;
  for (std::size_t p = 0; p < M; ++p) {
    if (invalid[p]) {
      ++invalid_count;
    } else {
      valid_values.push_back(values[p]);
    }
  }
  const SampleStats st = sample_stats(valid_values);
  std::printf("rbar[%s](%s, %s): mean=%s se=%s paths=%zu invalid=%zu\n",
              mode.c_str(), format_full(grid.nodes[s]).c_str(),
              format_full(grid.nodes[t]).c_str(), format_full(st.mean).c_str(),
              format_full(st.std_error).c_str(), valid_values.size(),
              invalid_count);

  if (!args.out_dir.empty()) {
    ensure_out_dir(args.out_dir);
    std::ostringstream csv;
    csv << csv_provenance(sc, "returns");
    csv << "path,status,rbar\n";
    for (std::size_t p = 0; p < M; ++p) {
      csv << p << "," << (invalid[p] ? "invalid," : "ok,")
          << (invalid[p] ? "" : format_full(values[p])) << "\n";
    }
    write_file_atomic(args.out_dir + "/returns.csv", csv.str());
    Manifest manifest;
    manifest.scenario_digest = sc.digest;
    manifest.seed = sc.rng.seed;
    manifest.file_names.push_back("returns.csv");
    manifest.write(args.out_dir);
  }
  return kExitOk;
}

int cmd_verify(const CommonArgs& args, const std::string& suite_name_arg) {
  const Scenario sc = [&] {
    Scenario s = parse_scenario(args.scenario_file);
    s.finalize();
    return s;
  }();
  verify::VerifyOptions options;
  options.threads = args.threads;
  options.seed = args.seed;
  options.paths = args.paths;
  options.steps = args.steps;
  const verify::Suite suite = verify::parse_suite(suite_name_arg);
  const auto reports = verify::run_suite(sc, suite, options);
  std::fputs(verify::render_table(reports).c_str(), stdout);

  if (!args.out_dir.empty()) {
    ensure_out_dir(args.out_dir);
    Manifest manifest;
    manifest.scenario_digest = sc.digest;
    manifest.seed = args.seed.value_or(sc.rng.seed);
    for (const auto& r : reports) {
      const std::string name = "report_" + r.name + ".json";
      write_file_atomic(args.out_dir + "/" + name, r.json());
      manifest.file_names.push_back(name);
    }
    manifest.write(args.out_dir);
  }

  bool any_error = false, any_fail = false;
  for (const auto& r : reports) {
    any_error = any_error || r.precondition_error;
    any_fail = any_fail || (!r.pass && !r.precondition_error);
  }
  if (any_error) return kExitValidation;
  if (any_fail) return kExitTestFailure;
  return kExitOk;
}

int cmd_report(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cannot parse " + manifest_path + ": " + e.what());
  }
  std::printf("run %s (seed %llu)\n",
              manifest.value("scenario_digest", std::string("?")).c_str(),
              static_cast<unsigned long long>(manifest.value("seed", 0ull)));
  bool checksums_ok = true;
  std::vector<verify::TestReport> reports;
  for (const auto& f : manifest.at("files")) {
    const std::string name = f.at("name").get<std::string>();
    const std::string content = read_file(dir + "/" + name);
    const std::string digest = fnv1a64_hex(content);
    const bool ok = digest == f.at("fnv1a64").get<std::string>() &&
                    content.size() == f.at("bytes").get<std::size_t>();
    checksums_ok = checksums_ok && ok;
    std::printf("  %-32s %8zu bytes  %s\n", name.c_str(), content.size(),
                ok ? "ok" : "CHECKSUM MISMATCH");
    if (ok && name.rfind("report_", 0) == 0) {
      const auto j = nlohmann::json::parse(content);
      verify::TestReport r;
      r.name = j.value("name", name);
      r.scenario_digest = j.value("scenario_digest", "");
      r.paths = j.value("paths", std::size_t{0});
      r.invalid_paths = j.value("invalid_paths", std::size_t{0});
      r.pass = j.value("pass", false);
      r.precondition_error = j.value("precondition_error", false);
      for (const auto& s : j.value("stats", nlohmann::json::array())) {
        r.add_stat(s.value("name", ""), s.value("value", 0.0),
                   s.value("std_error", std::numeric_limits<double>::quiet_NaN()),
                   s.value("tolerance", std::numeric_limits<double>::quiet_NaN()),
                   s.value("pass", true));
      }
      for (const auto& note : j.value("notes", nlohmann::json::array())) {
        r.notes.push_back(note.get<std::string>());
      }
      reports.push_back(std::move(r));
    }
  }
  if (!reports.empty()) {
    std::fputs(verify::render_table(reports).c_str(), stdout);
  }
  if (!checksums_ok) {
    std::fputs("manifest checksum mismatch\n", stderr);
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fundsim: multi-fund market simulator and average-return verifier"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  bool strict = false;
  auto* simulate = app.add_subcommand("simulate", "simulate scenario paths");
  add_common(simulate, sim_args);
  simulate->add_flag("--strict", strict, "nonzero exit if any path is invalid");

  CommonArgs ret_args;
  double from = 0.0, to = -1.0;
  std::string mode = "continuous";
  bool snap = false;
  auto* ret = app.add_subcommand("return", "compute the average rate of return");
  add_common(ret, ret_args);
  ret->add_option("--from", from, "interval start (grid node unless --snap)");
  ret->add_option("--to", to, "interval end (default: horizon)");
  ret->add_option("--mode", mode,
                  "continuous | drift-only | discrete | deterministic");
  ret->add_flag("--snap", snap, "snap --from/--to to the nearest grid node");

  CommonArgs ver_args;
  std::string suite = "all";
  auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
  add_common(verify_cmd, ver_args);
  verify_cmd->add_option("--suite", suite,
                         "property1|property2|chain|property3|property4|"
                         "martingale|submartingale|residuals|convergence|all");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "render stored run artifacts");
  report->add_option("--out", report_dir, "artifact directory to read")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sim_args, strict);
    if (ret->parsed()) {
      Scenario probe = parse_scenario(ret_args.scenario_file);
      if (to < 0.0) to = probe.horizon;
      return cmd_return(ret_args, from, to, mode, snap);
    }
    if (verify_cmd->parsed()) return cmd_verify(ver_args, suite);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitOk;
}
