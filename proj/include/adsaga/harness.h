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

// Experiment orchestration: configs, step-size grid search,
// iterations-to-threshold, multi-seed aggregation and CSV emission.

#ifndef ADSAGA_HARNESS_H_
#define ADSAGA_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adsaga/baselines.h"
#include "adsaga/delay_model.h"
#include "adsaga/problem.h"
#include "adsaga/trace.h"
#include "json.hpp"

namespace adsaga {

enum class Algorithm { kAdsaga, kAsaga, kIag, kAsyncSgd, kMinibatchSaga, kMinibatchSgd };

std::string AlgorithmName(Algorithm algorithm);
Algorithm ParseAlgorithm(const std::string& name);

struct ProblemSpec {
  Index n = 120;
  Index d = 60;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  std::string file;  // when set, the problem is loaded instead of generated
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kAdsaga;
  ProblemSpec problem;
  Index m = 10;
  std::vector<double> rates;  // empty: uniform
  std::optional<double> eta;
  std::vector<double> grid;  // explicit step sizes
  std::string grid_preset;   // "absolute" or "scaled" instead of an explicit list
  Index block_size = 1;
  double threshold = 0.1;
  Metric metric = Metric::kDistSq;
  std::uint64_t max_iterations = 100000;
  std::vector<std::uint64_t> seeds = {1};
  Granularity granularity = Granularity::kIteration;
  std::uint64_t partition_seed = 0;
  DataMode minibatch_mode = DataMode::kDistributed;
  bool write_traces = true;
};

// The literal grid {0.05 i : i = 1..40}.
std::vector<double> AbsoluteGrid();
// The same grid divided by L.
std::vector<double> ScaledGrid(double L);

// Parses one JSON config document. "grid" accepts an explicit list, "absolute"
// or "scaled". Throws std::invalid_argument on invalid configs: exactly one of
// eta/grid, threshold > 0, non-empty seeds.
RunConfig ParseRunConfig(const nlohmann::json& json);
nlohmann::ordered_json RunConfigToJson(const RunConfig& config);
void ValidateRunConfig(const RunConfig& config);

// Problem described by the config, blocked when block_size > 1.
Problem ResolveProblem(const RunConfig& config);
DelayModel ResolveDelayModel(const RunConfig& config);
std::vector<double> ResolveGrid(const RunConfig& config, const Problem& problem);
bool HasGrid(const RunConfig& config);

// One seeded run of the configured algorithm.
Trace RunAlgorithm(Algorithm algorithm, const Problem& problem, const Partition& partition,
                   const DelayModel& model, Index m, DataMode minibatch_mode, double eta,
                   const StopCriterion& stop, std::uint64_t seed);

// First logged iteration with metric <= threshold, if any.
std::optional<std::uint64_t> IterationsToThreshold(const Trace& trace, double threshold,
                                                   Metric metric);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool converged = false;
  bool diverged = false;
  std::uint64_t iterations = 0;  // iterations-to-threshold when converged
  double final_metric = 0.0;
};

struct Aggregate {
  std::size_t converged = 0;
  std::size_t total = 0;
  double mean_iterations = 0.0;  // over converged seeds only
  double stderr_iterations = 0.0;
  double mean_final_metric = 0.0;
  bool all_diverged = false;
};

Aggregate AggregateOutcomes(const std::vector<SeedOutcome>& outcomes);

struct GridPoint {
  double eta = 0.0;
  Aggregate aggregate;
};

struct GridSearchResult {
  std::vector<GridPoint> points;
  std::optional<double> best_eta;  // empty when every grid point diverged
  bool best_on_boundary = false;
  bool all_diverged = false;
  std::string message;
};

// Ranks step sizes by (non-converged seeds, mean iterations, eta); if nothing
// converges, by mean final metric. Ties go to the smaller eta.
GridSearchResult GridSearch(const RunConfig& config, const Problem& problem);

struct ExperimentResult {
  std::vector<SeedOutcome> outcomes;
  Aggregate aggregate;
  double eta = 0.0;
  std::optional<GridSearchResult> grid;
  std::vector<std::string> trace_files;
  std::vector<std::string> errors;
};

// Runs every seed (after a grid search when the config has a grid). When
// `out_dir` is non-empty, writes manifest.json and traces/<algo>_m<m>_s<seed>.csv.
ExperimentResult RunExperiment(const RunConfig& config, const std::filesystem::path& out_dir = {});

nlohmann::ordered_json ExperimentManifest(const RunConfig& config, const ExperimentResult& result);

struct PlotRow {
  Index m = 0;
  std::string algorithm;
  Aggregate aggregate;
  std::optional<double> mean_wallclock_s;
  std::optional<double> stderr_wallclock_s;
};

// CSV m,algorithm,mean_iters,stderr,converged,total,status (+ wallclock columns
// when any row has them). Rows without converged seeds print NA and status
// non_converged.
void EmitPlotData(const std::vector<PlotRow>& rows, std::ostream& out);

}  // namespace adsaga

#endif  // ADSAGA_HARNESS_H_
