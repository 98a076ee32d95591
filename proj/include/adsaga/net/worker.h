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


// Worker process for the TCP runtime: HELLO, UPDATE(0), then for every PARAM
// draw a function from S_j, compute the update at the received iterate and
// send it back. Exits on STOP.

#ifndef ADSAGA_NET_WORKER_H_
#define ADSAGA_NET_WORKER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "adsaga/net/parameter_server.h"
#include "adsaga/problem.h"
#include "adsaga/types.h"

namespace adsaga::net {

struct WorkerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  Index id = 0;
  // Function draws come from stream kFunctionBase + id of this seed, the same
  // stream the simulator uses for machine id.
  std::uint64_t seed = 1;
  RuntimeAlgorithm algorithm = RuntimeAlgorithm::kAdsaga;
  double delay_s = 0.0;  // injected sleep before every non-initial UPDATE
  bool record = false;
  int connect_timeout_ms = 10000;
};

struct WorkerStep {
  Index function = 0;
  Vector x_local;  // the PARAM the gradient was taken at
  Vector sent;     // UPDATE payload
};

struct WorkerResult {
  int exit_status = 0;  // 0 after STOP, 1 on any failure
  std::string diagnostic;
  std::vector<Index> draws;        // every function drawn, in order
  std::vector<WorkerStep> steps;   // filled when config.record is set
  std::uint64_t updates_sent = 0;  // including the initial zero update
};

// `set` is S_j in ascending order; only those components are touched.
WorkerResult RunWorker(const Problem& problem, const std::vector<Index>& set,
                       const WorkerConfig& config);

}  // namespace adsaga::net

#endif  // ADSAGA_NET_WORKER_H_
