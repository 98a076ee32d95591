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

#include "adsaga/trace.h"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace adsaga {
namespace {

std::string Float17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string MetricName(Metric metric) {
  return metric == Metric::kDistSq ? "dist_sq" : "gap";
}

Metric ParseMetric(const std::string& name) {
  if (name == "dist_sq") return Metric::kDistSq;
  if (name == "gap") return Metric::kGap;
  throw std::invalid_argument("unknown metric '" + name + "' (expected dist_sq or gap)");
}

std::string GranularityName(Granularity granularity) {
  return granularity == Granularity::kIteration ? "iteration" : "epoch";
}

Granularity ParseGranularity(const std::string& name) {
  if (name == "iteration") return Granularity::kIteration;
  if (name == "epoch") return Granularity::kEpoch;
  throw std::invalid_argument("unknown granularity '" + name + "' (expected iteration or epoch)");
}

void WriteTraceCsv(const Trace& trace, std::ostream& out) {
  out << "iteration,machine,dist_sq,gap\n";
  for (const TraceRow& row : trace.rows) {
    out << row.iteration << ',' << row.machine << ',' << Float17(row.dist_sq) << ','
        << Float17(row.gap) << '\n';
  }
}

void WriteEpochJsonl(const Trace& trace, std::uint64_t iterations_per_epoch, std::ostream& out) {
  if (iterations_per_epoch == 0) iterations_per_epoch = 1;
  for (const TraceRow& row : trace.rows) {
    nlohmann::ordered_json j;
    j["epoch"] = row.iteration / iterations_per_epoch;
    j["iteration"] = row.iteration;
    j["dist_sq"] = row.dist_sq;
    j["gap"] = row.gap;
    out << j.dump() << '\n';
  }
}

}  // namespace adsaga
