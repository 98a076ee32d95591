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


// In-process loopback runs: one parameter server and m workers on threads,
// talking over real TCP sockets on 127.0.0.1.

#ifndef ADSAGA_NET_LOOPBACK_H_
#define ADSAGA_NET_LOOPBACK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "adsaga/harness.h"
#include "adsaga/net/parameter_server.h"
#include "adsaga/net/worker.h"
#include "adsaga/problem.h"

namespace adsaga::net {

struct LoopbackConfig {
  PsConfig ps;  // ps.m must equal the partition size; port and host are set here
  std::uint64_t seed = 1;
  std::vector<double> delays_s;  // per worker; empty means none
  bool record_workers = false;
};

struct LoopbackResult {
  PsResult ps;
  std::vector<WorkerResult> workers;
  bool ok = false;  // server not aborted and every worker exited 0
  std::string diagnostic;
};

LoopbackResult RunLoopback(const Problem& problem, const Partition& partition,
                           const LoopbackConfig& config, const Vector& x0 = Vector());

// Replays a recorded ADSAGA run through the simulator: arrival t of machine j
// is the logical step (j, i) where i is the function j drew after that
// arrival's PARAM. Returns x after every replayed step.
std::vector<Vector> ReplayAdsaga(const Problem& problem, const Partition& partition,
                                 const DelayModel& model, double eta,
                                 const std::vector<Index>& arrivals,
                                 const std::vector<std::vector<Index>>& draws,
                                 const Vector& x0 = Vector());

struct WallclockSweep {
  std::vector<Index> ms;
  std::vector<RuntimeAlgorithm> algorithms;
  bool vanilla = false;
  // Step size per algorithm, parallel to `algorithms`.
  std::vector<double> etas;
  Metric metric = Metric::kDistSq;
  double threshold = 0.1;
  std::uint64_t max_updates = 1000000;
  std::vector<std::uint64_t> seeds = {1};
  std::uint64_t partition_seed = 0;
  double base_delay_s = 0.0;
  // Worker 0 sleeps straggler_factor * base_delay_s instead.
  double straggler_factor = 1.0;
  double timeout_s = 600.0;
};

struct WallclockCell {
  Index m = 0;
  RuntimeAlgorithm algorithm = RuntimeAlgorithm::kAdsaga;
  std::vector<double> wallclock_s;  // converged seeds only
  std::vector<std::vector<std::uint64_t>> update_counts;  // per seed
  std::vector<SeedOutcome> outcomes;  // iterations to threshold per seed
  std::vector<std::string> errors;
};

struct WallclockReport {
  std::vector<WallclockCell> cells;
  std::vector<PlotRow> rows;  // iterations and wallclock per (m, algorithm)
};

WallclockReport MeasureWallclock(const Problem& problem, const WallclockSweep& sweep);

}  // namespace adsaga::net

#endif  // ADSAGA_NET_LOOPBACK_H_
