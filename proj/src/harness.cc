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

#include "adsaga/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "adsaga/adsaga.h"

namespace adsaga {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool NeedsPartition(Algorithm algorithm, DataMode mode) {
  switch (algorithm) {
    case Algorithm::kAsaga:
      return false;
    case Algorithm::kMinibatchSaga:
    case Algorithm::kMinibatchSgd:
      return mode == DataMode::kDistributed;
    default:
      return true;
  }
}

std::string Float17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

StopCriterion MakeStop(const RunConfig& config, bool record_rows) {
  StopCriterion stop;
  stop.metric = config.metric;
  stop.threshold = config.threshold;
  stop.max_iterations = config.max_iterations;
  stop.granularity = config.granularity;
  stop.record_rows = record_rows;
  return stop;
}

SeedOutcome Outcome(std::uint64_t seed, const Trace& trace) {
  SeedOutcome o;
  o.seed = seed;
  o.converged = trace.converged;
  o.diverged = trace.diverged;
  o.iterations = trace.hit_iteration.value_or(trace.iterations);
  o.final_metric = trace.final_metric;
  return o;
}

struct Setup {
  Problem problem;
  Partition partition;
  DelayModel model;
};

Partition PartitionFor(const RunConfig& config, const Problem& problem) {
  if (!NeedsPartition(config.algorithm, config.minibatch_mode) && problem.n % config.m != 0) {
    return Partition{};
  }
  return MakePartition(problem.n, config.m, config.partition_seed);
}

std::vector<SeedOutcome> RunSeeds(const RunConfig& config, const Problem& problem,
                                  const Partition& partition, const DelayModel& model, double eta,
                                  bool record_rows, std::vector<Trace>* traces,
                                  std::vector<std::string>* errors) {
  std::vector<SeedOutcome> outcomes;
  const StopCriterion stop = MakeStop(config, record_rows);
  for (std::uint64_t seed : config.seeds) {
    try {
      Trace trace = RunAlgorithm(config.algorithm, problem, partition, model, config.m,
                                 config.minibatch_mode, eta, stop, seed);
      outcomes.push_back(Outcome(seed, trace));
      if (traces != nullptr) traces->push_back(std::move(trace));
    } catch (const std::exception& e) {
      if (errors == nullptr) throw;
      errors->push_back("seed " + std::to_string(seed) + ": " + e.what());
      SeedOutcome failed;
      failed.seed = seed;
      failed.final_metric = std::nan("");
      outcomes.push_back(failed);
      if (traces != nullptr) traces->emplace_back();
    }
  }
  return outcomes;
}

ordered_json AggregateJson(const Aggregate& a) {
  ordered_json j;
  j["converged"] = a.converged;
  j["total"] = a.total;
  j["non_converged"] = a.total - a.converged;
  if (a.converged > 0) {
    j["mean_iterations"] = a.mean_iterations;
    j["stderr_iterations"] = a.stderr_iterations;
  } else {
    j["mean_iterations"] = nullptr;
    j["stderr_iterations"] = nullptr;
  }
  j["mean_final_metric"] = std::isfinite(a.mean_final_metric) ? json(a.mean_final_metric) : json(nullptr);
  j["all_diverged"] = a.all_diverged;
  j["note"] = "means are over converged seeds only";
  return j;
}

}  // namespace

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kAdsaga:
      return "adsaga";
    case Algorithm::kAsaga:
      return "asaga";
    case Algorithm::kIag:
      return "iag";
    case Algorithm::kAsyncSgd:
      return "async_sgd";
    case Algorithm::kMinibatchSaga:
      return "minibatch_saga";
    case Algorithm::kMinibatchSgd:
      return "minibatch_sgd";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kAdsaga, Algorithm::kAsaga, Algorithm::kIag,
                      Algorithm::kAsyncSgd, Algorithm::kMinibatchSaga, Algorithm::kMinibatchSgd}) {
    if (AlgorithmName(a) == name) return a;
  }
  if (name == "sgd") return Algorithm::kAsyncSgd;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::vector<double> AbsoluteGrid() {
  std::vector<double> grid;
  for (int i = 1; i <= 40; ++i) grid.push_back(0.05 * i);
  return grid;
}

std::vector<double> ScaledGrid(double L) {
  std::vector<double> grid = AbsoluteGrid();
  for (double& v : grid) v /= L;
  return grid;
}

bool HasGrid(const RunConfig& config) {
  return !config.grid.empty() || !config.grid_preset.empty();
}

void ValidateRunConfig(const RunConfig& config) {
  if (config.eta.has_value() == HasGrid(config)) {
    throw std::invalid_argument("config: exactly one of eta and grid must be given");
  }
  if (!(config.threshold > 0.0)) throw std::invalid_argument("config: threshold must be > 0");
  if (config.seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  if (config.m < 1) throw std::invalid_argument("config: m must be >= 1");
  if (config.block_size < 1) throw std::invalid_argument("config: block_size must be >= 1");
  if (!config.rates.empty() && static_cast<Index>(config.rates.size()) != config.m) {
    throw std::invalid_argument("config: rates must have m entries");
  }
  if (!config.grid_preset.empty() && config.grid_preset != "absolute" &&
      config.grid_preset != "scaled") {
    throw std::invalid_argument("config: grid must be a list, \"absolute\" or \"scaled\"");
  }
}

RunConfig ParseRunConfig(const json& j) {
  RunConfig c;
  if (j.contains("algorithm")) c.algorithm = ParseAlgorithm(j.at("algorithm").get<std::string>());
  if (j.contains("problem")) {
    const json& p = j.at("problem");
    c.problem.n = p.value("n", c.problem.n);
    c.problem.d = p.value("d", c.problem.d);
    c.problem.sigma = p.value("sigma", c.problem.sigma);
    c.problem.seed = p.value("seed", c.problem.seed);
  }
  if (j.contains("problem_file")) c.problem.file = j.at("problem_file").get<std::string>();
  if (j.contains("uniform")) c.m = j.at("uniform").get<Index>();
  if (j.contains("m")) c.m = j.at("m").get<Index>();
  if (j.contains("rates")) {
    c.rates = j.at("rates").get<std::vector<double>>();
    if (!j.contains("m") && !j.contains("uniform")) c.m = static_cast<Index>(c.rates.size());
  }
  if (j.contains("eta")) c.eta = j.at("eta").get<double>();
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (g.is_string()) {
      c.grid_preset = g.get<std::string>();
    } else {
      c.grid = g.get<std::vector<double>>();
      if (c.grid.empty()) throw std::invalid_argument("config: grid must be non-empty");
    }
  }
  c.block_size = j.value("block_size", c.block_size);
  c.threshold = j.value("threshold", c.threshold);
  if (j.contains("metric")) c.metric = ParseMetric(j.at("metric").get<std::string>());
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("granularity")) {
    c.granularity = ParseGranularity(j.at("granularity").get<std::string>());
  }
  c.partition_seed = j.value("partition_seed", c.problem.seed);
  if (j.contains("minibatch_mode")) {
    const std::string mode = j.at("minibatch_mode").get<std::string>();
    if (mode == "shared") {
      c.minibatch_mode = DataMode::kShared;
    } else if (mode == "distributed") {
      c.minibatch_mode = DataMode::kDistributed;
    } else {
      throw std::invalid_argument("config: minibatch_mode must be shared or distributed");
    }
  }
  c.write_traces = j.value("write_traces", c.write_traces);
  ValidateRunConfig(c);
  return c;
}

ordered_json RunConfigToJson(const RunConfig& c) {
  ordered_json j;
  j["algorithm"] = AlgorithmName(c.algorithm);
  if (c.problem.file.empty()) {
    j["problem"] = {{"n", c.problem.n}, {"d", c.problem.d}, {"sigma", c.problem.sigma},
                    {"seed", c.problem.seed}};
  } else {
    j["problem_file"] = c.problem.file;
  }
  j["m"] = c.m;
  if (!c.rates.empty()) j["rates"] = c.rates;
  if (c.eta) j["eta"] = *c.eta;
  if (!c.grid_preset.empty()) {
    j["grid"] = c.grid_preset;
  } else if (!c.grid.empty()) {
    j["grid"] = c.grid;
  }
  j["block_size"] = c.block_size;
  j["threshold"] = c.threshold;
  j["metric"] = MetricName(c.metric);
  j["max_iterations"] = c.max_iterations;
  j["seeds"] = c.seeds;
  j["granularity"] = GranularityName(c.granularity);
  j["partition_seed"] = c.partition_seed;
  j["minibatch_mode"] = c.minibatch_mode == DataMode::kShared ? "shared" : "distributed";
  return j;
}

Problem ResolveProblem(const RunConfig& config) {
  Problem p = config.problem.file.empty()
                  ? GenerateLeastSquares(config.problem.n, config.problem.d, config.problem.sigma,
                                         config.problem.seed)
                  : LoadProblem(config.problem.file);
  return config.block_size > 1 ? Block(p, config.block_size) : p;
}

DelayModel ResolveDelayModel(const RunConfig& config) {
  return config.rates.empty() ? DelayModel::Uniform(config.m) : DelayModel::FromRates(config.rates);
}

std::vector<double> ResolveGrid(const RunConfig& config, const Problem& problem) {
  if (config.grid_preset == "absolute") return AbsoluteGrid();
  if (config.grid_preset == "scaled") return ScaledGrid(problem.L);
  return config.grid;
}

Trace RunAlgorithm(Algorithm algorithm, const Problem& problem, const Partition& partition,
                   const DelayModel& model, Index m, DataMode minibatch_mode, double eta,
                   const StopCriterion& stop, std::uint64_t seed) {
  switch (algorithm) {
    case Algorithm::kAdsaga:
      return Run(problem, partition, model, eta, stop, seed);
    case Algorithm::kAsaga:
      return RunAsaga(problem, m, model, eta, stop, seed);
    case Algorithm::kIag:
      return RunIag(problem, partition, model, eta, stop, seed);
    case Algorithm::kAsyncSgd:
      return RunAsyncSgd(problem, partition, model, eta, stop, seed);
    case Algorithm::kMinibatchSaga:
      return RunMinibatchSaga(problem, minibatch_mode, partition, m, eta, stop, seed);
    case Algorithm::kMinibatchSgd:
      return RunMinibatchSgd(problem, minibatch_mode, partition, m, eta, stop, seed);
  }
  throw std::invalid_argument("RunAlgorithm: unknown algorithm");
}

std::optional<std::uint64_t> IterationsToThreshold(const Trace& trace, double threshold,
                                                   Metric metric) {
  for (const TraceRow& row : trace.rows) {
    const double v = metric == Metric::kDistSq ? row.dist_sq : row.gap;
    if (v <= threshold) return row.iteration;
  }
  return std::nullopt;
}

Aggregate AggregateOutcomes(const std::vector<SeedOutcome>& outcomes) {
  Aggregate a;
  a.total = outcomes.size();
  double sum = 0.0;
  double metric_sum = 0.0;
  std::size_t diverged = 0;
  for (const SeedOutcome& o : outcomes) {
    if (o.converged) {
      ++a.converged;
      sum += static_cast<double>(o.iterations);
    }
    if (o.diverged) ++diverged;
    metric_sum += o.final_metric;
  }
  a.all_diverged = a.total > 0 && diverged == a.total;
  a.mean_final_metric = a.total > 0 ? metric_sum / static_cast<double>(a.total) : 0.0;
  if (a.converged > 0) {
    a.mean_iterations = sum / static_cast<double>(a.converged);
    if (a.converged > 1) {
      double ss = 0.0;
      for (const SeedOutcome& o : outcomes) {
        if (!o.converged) continue;
        const double dev = static_cast<double>(o.iterations) - a.mean_iterations;
        ss += dev * dev;
      }
      const double var = ss / static_cast<double>(a.converged - 1);
      a.stderr_iterations = std::sqrt(var / static_cast<double>(a.converged));
    }
  }
  return a;
}

GridSearchResult GridSearch(const RunConfig& config, const Problem& problem) {
  const std::vector<double> grid = ResolveGrid(config, problem);
  if (grid.empty()) throw std::invalid_argument("GridSearch: empty grid");
  const Partition partition = PartitionFor(config, problem);
  const DelayModel model = ResolveDelayModel(config);

  GridSearchResult result;
  for (double eta : grid) {
    GridPoint point;
    point.eta = eta;
    point.aggregate = AggregateOutcomes(
        RunSeeds(config, problem, partition, model, eta, /*record_rows=*/false, nullptr, nullptr));
    result.points.push_back(point);
  }

  std::optional<std::size_t> best;
  auto key = [&](std::size_t k) {
    const Aggregate& a = result.points[k].aggregate;
    return std::make_tuple(a.total - a.converged, a.mean_iterations, result.points[k].eta);
  };
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    if (result.points[k].aggregate.converged == 0) continue;
    if (!best || key(k) < key(*best)) best = k;
  }
  if (!best) {
    // Nothing converged: fall back to the smallest final metric.
    for (std::size_t k = 0; k < result.points.size(); ++k) {
      const Aggregate& a = result.points[k].aggregate;
      if (a.all_diverged || !std::isfinite(a.mean_final_metric)) continue;
      if (!best || a.mean_final_metric < result.points[*best].aggregate.mean_final_metric) {
        best = k;
      }
    }
  }
  if (!best) {
    result.all_diverged = true;
    result.message = "all step sizes diverged";
    return result;
  }
  result.best_eta = result.points[*best].eta;
  result.best_on_boundary =
      result.points.size() > 1 && (*best == 0 || *best == result.points.size() - 1);
  if (result.best_on_boundary) {
    result.message = "warning: best step size " + Float17(*result.best_eta) +
                     " lies on the grid boundary";
  }
  return result;
}

ExperimentResult RunExperiment(const RunConfig& config, const std::filesystem::path& out_dir) {
  ValidateRunConfig(config);
  const Problem problem = ResolveProblem(config);
  ExperimentResult result;
  if (config.eta) {
    result.eta = *config.eta;
  } else {
    result.grid = GridSearch(config, problem);
    if (!result.grid->best_eta) {
      result.errors.push_back(result.grid->message);
      return result;
    }
    result.eta = *result.grid->best_eta;
  }

  const Partition partition = PartitionFor(config, problem);
  const DelayModel model = ResolveDelayModel(config);
  const bool write = !out_dir.empty() && config.write_traces;
  std::vector<Trace> traces;
  result.outcomes = RunSeeds(config, problem, partition, model, result.eta, write, &traces,
                             &result.errors);
  result.aggregate = AggregateOutcomes(result.outcomes);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    if (write) {
      std::filesystem::create_directories(out_dir / "traces");
      for (std::size_t k = 0; k < traces.size(); ++k) {
        const std::string name = "traces/" + AlgorithmName(config.algorithm) + "_m" +
                                 std::to_string(config.m) + "_s" +
                                 std::to_string(config.seeds[k]) + ".csv";
        std::ofstream out(out_dir / name);
        WriteTraceCsv(traces[k], out);
        result.trace_files.push_back(name);
      }
    }
    std::ofstream manifest(out_dir / "manifest.json");
    manifest << ExperimentManifest(config, result).dump(2) << '\n';
  }
  return result;
}

ordered_json ExperimentManifest(const RunConfig& config, const ExperimentResult& result) {
  ordered_json j;
  j["config"] = RunConfigToJson(config);
  j["eta"] = result.eta;
  if (result.grid) {
    ordered_json g;
    g["best_eta"] = result.grid->best_eta ? json(*result.grid->best_eta) : json(nullptr);
    g["best_on_boundary"] = result.grid->best_on_boundary;
    g["all_diverged"] = result.grid->all_diverged;
    g["message"] = result.grid->message;
    ordered_json points = ordered_json::array();
    for (const GridPoint& p : result.grid->points) {
      ordered_json pj;
      pj["eta"] = p.eta;
      pj["aggregate"] = AggregateJson(p.aggregate);
      points.push_back(pj);
    }
    g["points"] = points;
    j["grid_search"] = g;
  }
  ordered_json seeds = ordered_json::array();
  for (const SeedOutcome& o : result.outcomes) {
    ordered_json s;
    s["seed"] = o.seed;
    s["converged"] = o.converged;
    s["diverged"] = o.diverged;
    s["iterations"] = o.converged ? json(o.iterations) : json(nullptr);
    s["final_metric"] = std::isfinite(o.final_metric) ? json(o.final_metric) : json(nullptr);
    seeds.push_back(s);
  }
  j["seeds"] = seeds;
  j["aggregate"] = AggregateJson(result.aggregate);
  j["trace_files"] = result.trace_files;
  j["errors"] = result.errors;
  return j;
}

void EmitPlotData(const std::vector<PlotRow>& rows, std::ostream& out) {
  const bool wallclock = std::any_of(rows.begin(), rows.end(),
                                     [](const PlotRow& r) { return r.mean_wallclock_s.has_value(); });
  out << "m,algorithm,mean_iters,stderr,converged,total,status";
  if (wallclock) out << ",mean_wallclock_s,stderr_wallclock_s";
  out << '\n';
  for (const PlotRow& r : rows) {
    const Aggregate& a = r.aggregate;
    out << r.m << ',' << r.algorithm << ',';
    if (a.converged > 0) {
      out << Float17(a.mean_iterations) << ',' << Float17(a.stderr_iterations);
    } else {
      out << "NA,NA";
    }
    const char* status = a.converged == 0          ? "non_converged"
                         : a.converged < a.total ? "partial"
                                                 : "converged";
    out << ',' << a.converged << ',' << a.total << ',' << status;
    if (wallclock) {
      out << ',' << (r.mean_wallclock_s ? Float17(*r.mean_wallclock_s) : "NA") << ','
          << (r.stderr_wallclock_s ? Float17(*r.stderr_wallclock_s) : "NA");
    }
    out << '\n';
  }
}

}  // namespace adsaga
