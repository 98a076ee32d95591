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

#ifndef ADSAGA_TRACE_H_
#define ADSAGA_TRACE_H_

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adsaga/problem.h"
#include "adsaga/types.h"

namespace adsaga {

enum class Metric { kDistSq, kGap };
enum class Granularity { kIteration, kEpoch };

std::string MetricName(Metric metric);
Metric ParseMetric(const std::string& name);
std::string GranularityName(Granularity granularity);
Granularity ParseGranularity(const std::string& name);

struct StopCriterion {
  Metric metric = Metric::kDistSq;
  // Stop once the metric is <= threshold. No threshold: run the full budget.
  std::optional<double> threshold;
  std::uint64_t max_iterations = 0;
  Granularity granularity = Granularity::kIteration;
  // Keep per-log-point rows. Grid searches turn this off.
  bool record_rows = true;
  // A metric above this (or non-finite) ends the run as diverged.
  double divergence_limit = 1e30;
};

struct TraceRow {
  std::uint64_t iteration = 0;
  Index machine = -1;  // -1: initial row or synchronous step
  double dist_sq = 0.0;
  double gap = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;
  bool converged = false;
  bool diverged = false;
  // First logged iteration whose metric is <= threshold.
  std::optional<std::uint64_t> hit_iteration;
  std::uint64_t iterations = 0;
  std::uint64_t gradient_evaluations = 0;
  double final_dist_sq = 0.0;
  double final_gap = 0.0;
  double final_metric = 0.0;
};

// CSV with header iteration,machine,dist_sq,gap; floats with 17 significant
// digits.
void WriteTraceCsv(const Trace& trace, std::ostream& out);

// One JSON object per row: {"epoch", "iteration", "dist_sq", "gap"}.
void WriteEpochJsonl(const Trace& trace, std::uint64_t iterations_per_epoch, std::ostream& out);

// Drives `step` (which performs one iteration and returns the machine index
// it served, or -1) until the stop criterion triggers. `x` must alias the live
// iterate. Metrics are evaluated every iteration or once per epoch.
template <class StepFn>
Trace Drive(const Problem& problem, const StopCriterion& stop,
            std::uint64_t iterations_per_epoch, std::uint64_t gradients_per_iteration,
            const Vector& x, StepFn&& step) {
  Trace trace;
  if (iterations_per_epoch == 0) iterations_per_epoch = 1;
  const bool need_gap = stop.metric == Metric::kGap || stop.record_rows;

  auto log = [&](std::uint64_t k, Index machine) {
    const double dist = DistSq(problem, x);
    const double gap = need_gap ? ObjectiveGap(problem, x) : 0.0;
    const double metric = stop.metric == Metric::kDistSq ? dist : gap;
    trace.final_dist_sq = dist;
    trace.final_gap = gap;
    trace.final_metric = metric;
    if (stop.record_rows) trace.rows.push_back({k, machine, dist, gap});
    if (!std::isfinite(metric) || metric > stop.divergence_limit) {
      trace.diverged = true;
      return;
    }
    if (stop.threshold && metric <= *stop.threshold && !trace.hit_iteration) {
      trace.hit_iteration = k;
      trace.converged = true;
    }
  };

  log(0, -1);
  std::uint64_t k = 0;
  while (!trace.converged && !trace.diverged && k < stop.max_iterations) {
    const Index machine = step();
    ++k;
    trace.gradient_evaluations += gradients_per_iteration;
    if (stop.granularity == Granularity::kIteration || k % iterations_per_epoch == 0 ||
        k == stop.max_iterations) {
      log(k, machine);
    }
  }
  trace.iterations = k;
  return trace;
}

}  // namespace adsaga

#endif  // ADSAGA_TRACE_H_
