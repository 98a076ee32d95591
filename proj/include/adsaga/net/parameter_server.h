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


// Parameter server for the TCP runtime.
//
// Asynchronous algorithms process one UPDATE at a time in arrival order. For
// ADSAGA an UPDATE(h) from machine j is handled as
//
//   u_j <- u_j (1 - ratio_j) + ratio_j h      (closes j's previous step)
//   send PARAM(x)                             (x_j becomes the pre-update x)
//   x   <- x - eta ratio_j (u_j + alpha_bar)
//   alpha_bar <- alpha_bar + h / n
//   u_j <- u_j - (m / n) h
//
// which reproduces the logical iteration exactly when the step served at
// arrival t is paired with the function the worker draws after that PARAM.
// The first fold uses ratio_j, not 1; with coefficient 1 the server would
// drift from the iteration the convergence analysis covers. The vanilla
// variant sets every ratio to 1, which drops the u_j correction.
//
// Synchronous minibatch algorithms wait for one UPDATE from every worker,
// apply the aggregated step, then broadcast PARAM.

#ifndef ADSAGA_NET_PARAMETER_SERVER_H_
#define ADSAGA_NET_PARAMETER_SERVER_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "adsaga/adsaga.h"
#include "adsaga/net/socket.h"
#include "adsaga/problem.h"
#include "adsaga/trace.h"
#include "adsaga/types.h"

namespace adsaga::net {

enum class RuntimeAlgorithm { kAdsaga, kIag, kAsyncSgd, kMinibatchSaga, kMinibatchSgd };

std::string RuntimeAlgorithmName(RuntimeAlgorithm algorithm);
RuntimeAlgorithm ParseRuntimeAlgorithm(const std::string& name);
bool IsSynchronous(RuntimeAlgorithm algorithm);
// True when workers send grad f_i(x_j) - alpha_i, false for plain gradients.
bool SendsDifference(RuntimeAlgorithm algorithm);
// IAG walks S_j in order; everything else draws i ~ Uniform(S_j).
bool CyclicOrder(RuntimeAlgorithm algorithm);

struct PsRuntimeState {
  ServerState server;
  Vector alpha_sum;                          // IAG only
  std::vector<Vector> last_h;                // last UPDATE payload per machine
  std::vector<std::uint64_t> update_counts;  // UPDATEs processed per machine
  std::uint64_t updates = 0;
  std::uint64_t epoch = 0;
};

PsRuntimeState InitRuntimeState(Index d, Index m, const Vector& x0);

// One asynchronous ADSAGA arrival, split around the PARAM reply.
void FoldUpdate(PsRuntimeState& state, Index machine, const Vector& h, double ratio);
void ApplyServerStep(PsRuntimeState& state, Index machine, const Vector& h, double ratio,
                     double eta, Index n);

struct PsConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0: pick a free port
  RuntimeAlgorithm algorithm = RuntimeAlgorithm::kAdsaga;
  bool vanilla = false;
  Index m = 1;
  double eta = 0.0;
  std::vector<double> rates;  // ADSAGA step ratios; empty means uniform
  Metric metric = Metric::kDistSq;
  std::optional<double> threshold;
  std::optional<std::uint64_t> max_updates;  // t; 0 stops right after the handshake
  double timeout_s = 600.0;
  int accept_timeout_ms = 30000;
  bool record_trajectory = false;
  std::ostream* log = nullptr;  // JSONL run log, optional
};

struct PsResult {
  Vector x;
  bool converged = false;
  bool diverged = false;
  bool timed_out = false;
  bool aborted = false;
  std::string diagnostic;
  std::uint64_t updates = 0;     // UPDATE messages processed
  std::uint64_t iterations = 0;  // arrivals (async) or aggregated steps (sync)
  std::uint64_t epochs = 0;
  std::vector<std::uint64_t> update_counts;
  double wallclock_s = 0.0;  // handshake complete to STOP
  std::optional<double> time_to_threshold_s;
  std::optional<std::uint64_t> iterations_to_threshold;
  double final_metric = 0.0;
  std::vector<Index> arrivals;     // machine of every processed UPDATE, in order
  std::vector<Vector> trajectory;  // x after every iteration, when recorded
};

class ParameterServer {
 public:
  // Binds the listening socket; throws on bad configs or bind failures. The
  // problem must outlive the server.
  ParameterServer(const Problem& problem, PsConfig config);
  ~ParameterServer();

  std::uint16_t port() const;
  // Accepts m workers, serves until a stop condition, broadcasts STOP.
  // Transport failures end the run with aborted = true and a diagnostic.
  PsResult Run(const Vector& x0 = Vector());

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace adsaga::net

#endif  // ADSAGA_NET_PARAMETER_SERVER_H_
