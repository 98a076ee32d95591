// Copyright 2026 The ADSAGA Workbench Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: problem generation, simulation, grid search,
// potential checks, m-sweeps, plot data and the TCP runtime.
//
// Every subcommand that takes --config reads one JSON document; flags given
// on the command line override the matching config keys.

#include <algorithm>
#include <tuple>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adsaga/adsaga.h"
#include "adsaga/harness.h"
#include "adsaga/net/loopback.h"
#include "adsaga/net/parameter_server.h"
#include "adsaga/net/worker.h"
#include "adsaga/potential.h"
#include "adsaga/problem.h"
#include "json.hpp"

namespace adsaga::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Config keys settable from the command line. Unset flags leave the config
// untouched.
struct Overrides {
  std::string config_path;
  std::optional<std::string> algorithm;
  std::optional<std::string> problem_file;
  std::optional<Index> n;
  std::optional<Index> d;
  std::optional<double> sigma;
  std::optional<std::uint64_t> problem_seed;
  std::optional<Index> m;
  std::vector<double> rates;
  std::optional<double> eta;
  std::optional<std::string> grid;
  std::optional<Index> block_size;
  std::optional<double> threshold;
  std::optional<std::string> metric;
  std::optional<std::uint64_t> max_iterations;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> granularity;
  std::optional<std::uint64_t> partition_seed;
  std::optional<std::string> minibatch_mode;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--algorithm", algorithm,
                    "adsaga, asaga, iag, async_sgd, minibatch_saga or minibatch_sgd");
    app->add_option("--problem-file", problem_file, "problem written by gen-problem");
    app->add_option("--n", n, "number of functions");
    app->add_option("--d", d, "dimension");
    app->add_option("--sigma", sigma, "noise level");
    app->add_option("--problem-seed", problem_seed, "problem generation seed");
    app->add_option("--m", m, "number of machines");
    app->add_option("--rates", rates, "per-machine rates (default uniform)")->delimiter(',');
    app->add_option("--eta", eta, "step size");
    app->add_option("--grid", grid,
                    "step-size grid: comma-separated list, \"absolute\" or \"scaled\"");
    app->add_option("--block-size", block_size, "functions per block");
    app->add_option("--threshold", threshold, "stop once the metric is <= threshold");
    app->add_option("--metric", metric, "dist_sq or gap");
    app->add_option("--max-iterations", max_iterations, "iteration budget");
    app->add_option("--seeds", seeds, "run seeds")->delimiter(',');
    app->add_option("--granularity", granularity, "iteration or epoch");
    app->add_option("--partition-seed", partition_seed, "seed of the data partition");
    app->add_option("--minibatch-mode", minibatch_mode, "shared or distributed");
  }

  json Merge() const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config " + config_path);
      j = json::parse(in);
    }
    if (algorithm) j["algorithm"] = *algorithm;
    if (problem_file) j["problem_file"] = *problem_file;
    if (n) j["problem"]["n"] = *n;
    if (d) j["problem"]["d"] = *d;
    if (sigma) j["problem"]["sigma"] = *sigma;
    if (problem_seed) j["problem"]["seed"] = *problem_seed;
    if (m) j["m"] = *m;
    if (!rates.empty()) j["rates"] = rates;
    if (eta) {
      j["eta"] = *eta;
      j.erase("grid");
    }
    if (grid) {
      if (*grid == "absolute" || *grid == "scaled") {
        j["grid"] = *grid;
      } else {
        std::vector<double> values;
        std::stringstream ss(*grid);
        for (std::string item; std::getline(ss, item, ',');) values.push_back(std::stod(item));
        j["grid"] = values;
      }
      j.erase("eta");
    }
    if (block_size) j["block_size"] = *block_size;
    if (threshold) j["threshold"] = *threshold;
    if (metric) j["metric"] = *metric;
    if (max_iterations) j["max_iterations"] = *max_iterations;
    if (!seeds.empty()) j["seeds"] = seeds;
    if (granularity) j["granularity"] = *granularity;
    if (partition_seed) j["partition_seed"] = *partition_seed;
    if (minibatch_mode) j["minibatch_mode"] = *minibatch_mode;
    return j;
  }
};

void PrintJson(const ordered_json& j) { std::cout << j.dump(2) << '\n'; }

int GenProblem(Index n, Index d, double sigma, std::uint64_t seed, const std::string& out) {
  const Problem p = GenerateLeastSquares(n, d, sigma, seed);
  SaveProblem(p, out);
  std::cout << ProblemMetadataJson(p) << '\n';
  return 0;
}

int Simulate(const Overrides& o, const std::string& out_dir) {
  const RunConfig config = ParseRunConfig(o.Merge());
  const ExperimentResult r = RunExperiment(config, out_dir);
  ordered_json summary = ExperimentManifest(config, r);
  summary.erase("config");
  PrintJson(summary);
  return r.errors.empty() ? 0 : 1;
}

int GridSearchCommand(const Overrides& o) {
  const RunConfig config = ParseRunConfig(o.Merge());
  if (!HasGrid(config)) throw std::invalid_argument("grid-search needs a grid");
  const Problem p = ResolveProblem(config);
  const GridSearchResult r = GridSearch(config, p);
  ordered_json j;
  j["best_eta"] = r.best_eta ? json(*r.best_eta) : json(nullptr);
  j["best_on_boundary"] = r.best_on_boundary;
  j["all_diverged"] = r.all_diverged;
  j["message"] = r.message;
  ordered_json points = ordered_json::array();
  for (const GridPoint& point : r.points) {
    points.push_back({{"eta", point.eta},
                      {"converged", point.aggregate.converged},
                      {"total", point.aggregate.total},
                      {"mean_iterations", point.aggregate.converged > 0
                                              ? json(point.aggregate.mean_iterations)
                                              : json(nullptr)},
                      {"all_diverged", point.aggregate.all_diverged}});
  }
  j["points"] = points;
  PrintJson(j);
  if (!r.message.empty()) std::cerr << r.message << '\n';
  return r.best_eta ? 0 : 1;
}

// One JSONL record per checked state of an ADSAGA run at the configured eta
// (defaults to the theoretical step size).
int PotentialCheck(const Overrides& o, std::uint64_t steps, std::uint64_t every) {
  json merged = o.Merge();
  const bool theory = !merged.contains("eta") && !merged.contains("grid");
  if (theory) merged["eta"] = 1.0;  // placeholder, replaced below
  const RunConfig config = ParseRunConfig(merged);
  const Problem p = ResolveProblem(config);
  const Partition part = MakePartition(p.n, config.m, config.partition_seed);
  const DelayModel model = ResolveDelayModel(config);
  const double eta = theory ? TheoreticalEta(p, config.m, model) : *config.eta;
  const PotentialEvaluator eval(p, part, model, eta);
  const bool at_theory = eta <= TheoreticalEta(p, config.m, model) * (1.0 + 1e-12);
  DrawStreams streams(config.seeds.front(), config.m);
  AdsagaState s = Init(p, part, Vector::Zero(p.d), streams.init);
  std::uint64_t failures = 0;
  for (std::uint64_t k = 0; k <= steps; ++k) {
    if (k % every == 0) {
      ordered_json j;
      j["iteration"] = k;
      if (at_theory) {
        const ContractionReport r = eval.CheckContraction(s);
        j["phi"] = r.phi;
        j["phi_next_expected"] = r.lhs;
        j["gamma"] = r.gamma;
        j["pass"] = r.pass;
        if (!r.pass) ++failures;
      } else {
        // Above the theoretical step size the contraction is not claimed.
        j["phi"] = eval.Evaluate(s).phi;
        j["phi_next_expected"] = eval.EnumerateExpectedStep(s).expected_phi_next;
        j["gamma"] = eval.constants().gamma;
        j["pass"] = nullptr;
      }
      std::cout << j.dump() << '\n';
    }
    if (k < steps) LogicalStep(s, p, part, model, eta, streams);
  }
  return failures == 0 ? 0 : 1;
}

std::vector<PlotRow> SweepRows(const Overrides& o, const std::vector<Index>& ms,
                               const std::vector<std::string>& algorithms,
                               const std::string& out_dir) {
  std::vector<PlotRow> rows;
  for (const std::string& name : algorithms) {
    for (Index m : ms) {
      json merged = o.Merge();
      merged["algorithm"] = name;
      merged["m"] = m;
      merged.erase("rates");
      const RunConfig config = ParseRunConfig(merged);
      const fs::path dir = out_dir.empty() ? fs::path() : fs::path(out_dir) / (name + "_m" + std::to_string(m));
      const ExperimentResult r = RunExperiment(config, dir);
      for (const std::string& e : r.errors) std::cerr << name << " m=" << m << ": " << e << '\n';
      if (r.grid && r.grid->best_on_boundary) std::cerr << name << " m=" << m << ": " << r.grid->message << '\n';
      PlotRow row;
      row.m = m;
      row.algorithm = name;
      row.aggregate = r.aggregate;
      rows.push_back(row);
    }
  }
  return rows;
}

int Sweep(const Overrides& o, const std::vector<Index>& ms,
          const std::vector<std::string>& algorithms, const std::string& out_dir) {
  const std::vector<PlotRow> rows = SweepRows(o, ms, algorithms, out_dir);
  if (!out_dir.empty()) {
    std::ofstream out(fs::path(out_dir) / "results.csv");
    EmitPlotData(rows, out);
  }
  EmitPlotData(rows, std::cout);
  return 0;
}

PlotRow RowFromManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const json j = json::parse(in);
  PlotRow row;
  row.m = j.at("config").at("m").get<Index>();
  row.algorithm = j.at("config").at("algorithm").get<std::string>();
  const json& a = j.at("aggregate");
  row.aggregate.converged = a.at("converged").get<std::size_t>();
  row.aggregate.total = a.at("total").get<std::size_t>();
  if (!a.at("mean_iterations").is_null()) {
    row.aggregate.mean_iterations = a.at("mean_iterations").get<double>();
    row.aggregate.stderr_iterations = a.at("stderr_iterations").get<double>();
  }
  return row;
}

int EmitPlot(const std::vector<std::string>& manifests, const std::string& out_path) {
  std::vector<PlotRow> rows;
  for (const std::string& path : manifests) {
    // A directory stands for every manifest below it.
    if (fs::is_directory(path)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (entry.path().filename() == "manifest.json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      for (const fs::path& f : found) rows.push_back(RowFromManifest(f));
    } else {
      rows.push_back(RowFromManifest(path));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PlotRow& a, const PlotRow& b) {
    return std::tie(a.algorithm, a.m) < std::tie(b.algorithm, b.m);
  });
  if (out_path.empty()) {
    EmitPlotData(rows, std::cout);
  } else {
    std::ofstream out(out_path);
    EmitPlotData(rows, out);
  }
  return 0;
}

// Runtime settings on top of a RunConfig document.
struct RuntimeOptions {
  std::optional<std::string> algorithm;
  std::optional<std::uint16_t> port;
  std::optional<std::uint64_t> max_updates;
  std::optional<double> timeout_s;
  bool vanilla = false;
  std::string log_path;
  std::string out_path;
};

std::string RuntimeAlgorithmFrom(const json& merged, const RuntimeOptions& r) {
  if (r.algorithm) return *r.algorithm;
  return merged.value("algorithm", std::string("adsaga"));
}

int ServePs(const Overrides& o, const RuntimeOptions& r) {
  json merged = o.Merge();
  const std::string algorithm = RuntimeAlgorithmFrom(merged, r);
  merged["algorithm"] = algorithm;
  const RunConfig config = ParseRunConfig(merged);
  if (!config.eta) throw std::invalid_argument("serve-ps needs a fixed eta");
  const Problem p = ResolveProblem(config);

  net::PsConfig ps;
  ps.host = "0.0.0.0";
  ps.port = r.port.value_or(merged.value("port", std::uint16_t{0}));
  ps.algorithm = net::ParseRuntimeAlgorithm(algorithm);
  ps.vanilla = r.vanilla || merged.value("vanilla", false);
  ps.m = config.m;
  ps.eta = *config.eta;
  ps.rates = config.rates;
  ps.metric = config.metric;
  ps.threshold = config.threshold;
  ps.max_updates = r.max_updates.value_or(merged.value("max_updates", config.max_iterations));
  ps.timeout_s = r.timeout_s.value_or(merged.value("timeout_s", 600.0));
  std::ofstream log_file;
  if (!r.log_path.empty()) {
    log_file.open(r.log_path);
    ps.log = &log_file;
  }
  net::ParameterServer server(p, ps);
  std::cerr << "listening on port " << server.port() << '\n';
  const net::PsResult result = server.Run();

  ordered_json j;
  j["algorithm"] = algorithm;
  j["m"] = ps.m;
  j["eta"] = ps.eta;
  j["converged"] = result.converged;
  j["diverged"] = result.diverged;
  j["timed_out"] = result.timed_out;
  j["aborted"] = result.aborted;
  j["diagnostic"] = result.diagnostic;
  j["updates"] = result.updates;
  j["iterations"] = result.iterations;
  j["epochs"] = result.epochs;
  j["update_counts"] = result.update_counts;
  j["estimated_rates"] = DelayModel::EstimateRates(result.update_counts).p();
  j["wallclock_s"] = result.wallclock_s;
  j["time_to_threshold_s"] =
      result.time_to_threshold_s ? json(*result.time_to_threshold_s) : json(nullptr);
  j["iterations_to_threshold"] =
      result.iterations_to_threshold ? json(*result.iterations_to_threshold) : json(nullptr);
  j["final_metric"] = result.final_metric;
  if (r.out_path.empty()) {
    PrintJson(j);
  } else {
    std::ofstream(r.out_path) << j.dump(2) << '\n';
  }
  return result.aborted ? 1 : 0;
}

int RunWorkerCommand(const Overrides& o, const RuntimeOptions& r, const std::string& host,
                     Index id, std::uint64_t seed, double delay_s) {
  json merged = o.Merge();
  const std::string algorithm = RuntimeAlgorithmFrom(merged, r);
  merged["algorithm"] = algorithm;
  if (!merged.contains("eta") && !merged.contains("grid")) merged["eta"] = 0.0;
  const RunConfig config = ParseRunConfig(merged);
  const Problem p = ResolveProblem(config);
  const Partition part = MakePartition(p.n, config.m, config.partition_seed);
  if (id < 0 || id >= config.m) throw std::invalid_argument("--id must be in [0, m)");
  net::WorkerConfig wc;
  wc.host = host;
  wc.port = r.port.value_or(merged.value("port", std::uint16_t{0}));
  wc.id = id;
  wc.seed = seed;
  wc.algorithm = net::ParseRuntimeAlgorithm(algorithm);
  wc.delay_s = delay_s;
  const net::WorkerResult result = net::RunWorker(p, part.sets[id], wc);
  if (result.exit_status != 0) std::cerr << result.diagnostic << '\n';
  return result.exit_status;
}

int Wallclock(const Overrides& o, const std::vector<Index>& ms,
              const std::vector<std::string>& algorithms, const std::vector<double>& etas,
              bool vanilla, double base_delay_s, double straggler_factor,
              std::uint64_t max_updates, const std::string& out_path) {
  json merged = o.Merge();
  if (!merged.contains("eta") && !merged.contains("grid")) merged["eta"] = 0.0;
  const RunConfig config = ParseRunConfig(merged);
  const Problem p = ResolveProblem(config);
  net::WallclockSweep sweep;
  sweep.ms = ms;
  for (const std::string& a : algorithms) sweep.algorithms.push_back(net::ParseRuntimeAlgorithm(a));
  sweep.etas = etas;
  if (sweep.etas.size() == 1) sweep.etas.assign(algorithms.size(), etas.front());
  sweep.vanilla = vanilla;
  sweep.metric = config.metric;
  sweep.threshold = config.threshold;
  sweep.max_updates = max_updates;
  sweep.seeds = config.seeds;
  sweep.partition_seed = config.partition_seed;
  sweep.base_delay_s = base_delay_s;
  sweep.straggler_factor = straggler_factor;
  const net::WallclockReport report = net::MeasureWallclock(p, sweep);
  for (const net::WallclockCell& cell : report.cells) {
    for (const std::string& e : cell.errors) std::cerr << e << '\n';
  }
  if (out_path.empty()) {
    EmitPlotData(report.rows, std::cout);
  } else {
    std::ofstream out(out_path);
    EmitPlotData(report.rows, out);
  }
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Asynchronous distributed SAGA workbench"};
  app.require_subcommand(1);

  Index gen_n = 120, gen_d = 60;
  double gen_sigma = 1.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-problem", "generate a least-squares problem file");
  gen->add_option("--n", gen_n, "number of functions");
  gen->add_option("--d", gen_d, "dimension");
  gen->add_option("--sigma", gen_sigma, "noise level");
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("--out", gen_out, "output file")->required();

  Overrides sim_o;
  std::string sim_out;
  CLI::App* sim = app.add_subcommand("simulate", "run an experiment in the simulator");
  sim_o.Register(sim);
  sim->add_option("--out", sim_out, "directory for manifest.json and traces/");

  Overrides grid_o;
  CLI::App* grid = app.add_subcommand("grid-search", "rank step sizes over the seed list");
  grid_o.Register(grid);

  Overrides pot_o;
  std::uint64_t pot_steps = 1000, pot_every = 10;
  CLI::App* pot = app.add_subcommand("potential-check",
                                     "exact expected potential along an ADSAGA run (JSONL)");
  pot_o.Register(pot);
  pot->add_option("--steps", pot_steps, "iterations to run");
  pot->add_option("--every", pot_every, "check every k iterations")->check(CLI::PositiveNumber);

  Overrides sweep_o;
  std::vector<Index> sweep_ms = {10, 20, 40, 60, 120};
  std::vector<std::string> sweep_algos = {"adsaga", "iag", "async_sgd"};
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "experiments over m and algorithms");
  sweep_o.Register(sweep);
  sweep->add_option("--ms", sweep_ms, "machine counts")->delimiter(',');
  sweep->add_option("--algorithms", sweep_algos, "algorithms")->delimiter(',');
  sweep->add_option("--out", sweep_out, "output directory");

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("emit-plot", "CSV from experiment manifests");
  plot->add_option("inputs", plot_inputs, "manifest.json files or directories")->required();
  plot->add_option("--out", plot_out, "CSV file (default stdout)");

  Overrides ps_o;
  RuntimeOptions ps_r;
  CLI::App* ps = app.add_subcommand("serve-ps", "run the parameter server");
  ps_o.Register(ps);
  ps->add_option("--port", ps_r.port, "TCP port (0 picks one)");
  ps->add_option("--max-updates", ps_r.max_updates, "stop after t updates");
  ps->add_option("--timeout", ps_r.timeout_s, "wallclock limit in seconds");
  ps->add_flag("--vanilla", ps_r.vanilla, "drop the u_j correction");
  ps->add_option("--log", ps_r.log_path, "JSONL run log");
  ps->add_option("--result", ps_r.out_path, "result JSON (default stdout)");

  Overrides worker_o;
  RuntimeOptions worker_r;
  std::string worker_host = "127.0.0.1";
  Index worker_id = 0;
  std::uint64_t worker_seed = 1;
  double worker_delay = 0.0;
  CLI::App* worker = app.add_subcommand("run-worker", "run one worker");
  worker_o.Register(worker);
  worker->add_option("--host", worker_host, "parameter server host");
  worker->add_option("--port", worker_r.port, "parameter server port")->required();
  worker->add_option("--id", worker_id, "machine id")->required();
  worker->add_option("--data", worker_o.problem_file, "problem file");
  worker->add_option("--seed", worker_seed, "function-draw seed");
  worker->add_option("--delay", worker_delay, "seconds to sleep before each update");

  Overrides wall_o;
  std::vector<Index> wall_ms = {8};
  std::vector<std::string> wall_algos = {"adsaga", "minibatch_saga"};
  std::vector<double> wall_etas;
  bool wall_vanilla = false;
  double wall_delay = 0.0, wall_factor = 1.0;
  std::uint64_t wall_max_updates = 1000000;
  std::string wall_out;
  CLI::App* wall = app.add_subcommand("wallclock", "loopback wallclock sweep");
  wall_o.Register(wall);
  wall->add_option("--ms", wall_ms, "machine counts")->delimiter(',');
  wall->add_option("--algorithms", wall_algos, "runtime algorithms")->delimiter(',');
  wall->add_option("--etas", wall_etas, "step size per algorithm (or one for all)")
      ->delimiter(',')
      ->required();
  wall->add_flag("--vanilla", wall_vanilla, "drop the u_j correction");
  wall->add_option("--base-delay", wall_delay, "per-update sleep of every worker (s)");
  wall->add_option("--straggler-factor", wall_factor, "worker 0 sleeps this many times longer");
  wall->add_option("--max-updates", wall_max_updates, "update budget per run");
  wall->add_option("--out", wall_out, "CSV file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return GenProblem(gen_n, gen_d, gen_sigma, gen_seed, gen_out);
    if (*sim) return Simulate(sim_o, sim_out);
    if (*grid) return GridSearchCommand(grid_o);
    if (*pot) return PotentialCheck(pot_o, pot_steps, pot_every);
    if (*sweep) return Sweep(sweep_o, sweep_ms, sweep_algos, sweep_out);
    if (*plot) return EmitPlot(plot_inputs, plot_out);
    if (*ps) return ServePs(ps_o, ps_r);
    if (*worker) {
      return RunWorkerCommand(worker_o, worker_r, worker_host, worker_id, worker_seed,
                              worker_delay);
    }
    if (*wall) {
      if (wall_etas.size() != 1 && wall_etas.size() != wall_algos.size()) {
        throw std::invalid_argument("--etas needs one value or one per algorithm");
      }
      return Wallclock(wall_o, wall_ms, wall_algos, wall_etas, wall_vanilla, wall_delay,
                       wall_factor, wall_max_updates, wall_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace
}  // namespace adsaga::cli

int main(int argc, char** argv) { return adsaga::cli::Main(argc, argv); }
