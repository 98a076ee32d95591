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


#include "adsaga/net/worker.h"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "adsaga/adsaga.h"
#include "adsaga/net/socket.h"
#include "adsaga/rng.h"

namespace adsaga::net {

WorkerResult RunWorker(const Problem& problem, const std::vector<Index>& set,
                       const WorkerConfig& config) {
  WorkerResult result;
  try {
    if (set.empty() || !std::is_sorted(set.begin(), set.end()) || set.front() < 0 ||
        set.back() >= problem.n) {
      throw std::invalid_argument("worker data must be a sorted, non-empty subset of [n]");
    }
    Rng rng = MakeStream(config.seed, stream::kFunctionBase + static_cast<std::uint64_t>(config.id));
    std::vector<Vector> alpha(set.size(), Vector::Zero(problem.d));
    std::size_t cursor = 0;
    const bool difference = SendsDifference(config.algorithm);
    const bool cyclic = CyclicOrder(config.algorithm);
    const std::uint32_t sender = static_cast<std::uint32_t>(config.id);

    Socket socket = Connect(config.host, config.port, config.connect_timeout_ms);
    socket.Send({MessageKind::kHello, sender, {}});
    WireMessage update{MessageKind::kUpdate, sender, std::vector<double>(problem.d, 0.0)};
    socket.Send(update);
    ++result.updates_sent;

    Vector x_local(problem.d);
    Vector g(problem.d);
    Vector h(problem.d);
    for (;;) {
      std::optional<WireMessage> msg = socket.Receive();
      if (!msg) throw std::runtime_error("connection to the parameter server lost");
      if (msg->kind == MessageKind::kStop) break;
      if (msg->kind != MessageKind::kParam) {
        throw std::runtime_error("unexpected " + KindName(msg->kind) + " from the server");
      }
      if (static_cast<Index>(msg->payload.size()) != problem.d) {
        throw std::runtime_error("PARAM has the wrong dimension");
      }
      x_local = Eigen::Map<const Vector>(msg->payload.data(), problem.d);

      std::size_t slot;
      if (cyclic) {
        slot = cursor;
        cursor = (cursor + 1) % set.size();
      } else {
        const Index i = DrawFunction(rng, set);
        slot = static_cast<std::size_t>(std::lower_bound(set.begin(), set.end(), i) - set.begin());
      }
      const Index i = set[slot];
      result.draws.push_back(i);
      GradComponent(problem, i, x_local, g);
      if (difference) {
        h = g - alpha[slot];
        alpha[slot] = g;
      } else {
        h = g;
      }
      if (config.delay_s > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(config.delay_s));
      }
      std::copy(h.data(), h.data() + h.size(), update.payload.begin());
      socket.Send(update);
      ++result.updates_sent;
      if (config.record) result.steps.push_back({i, x_local, h});
    }
  } catch (const std::exception& e) {
    result.exit_status = 1;
    result.diagnostic = std::string("worker ") + std::to_string(config.id) + ": " + e.what();
  }
  return result;
}

}  // namespace adsaga::net
