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


#include <future>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "adsaga/delay_model.h"
#include "adsaga/net/loopback.h"
#include "adsaga/net/parameter_server.h"
#include "adsaga/net/socket.h"
#include "adsaga/net/worker.h"
#include "adsaga/rng.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "test_support.h"

namespace adsaga::net {
namespace {

using testing::MaxAbs;

WireMessage Update(std::uint32_t sender, const Vector& h) {
  return {MessageKind::kUpdate, sender, std::vector<double>(h.data(), h.data() + h.size())};
}

Vector PayloadOf(const WireMessage& m) {
  return Eigen::Map<const Vector>(m.payload.data(), static_cast<Index>(m.payload.size()));
}

// Drives one worker against a scripted server: checks the opening messages,
// sends `rounds` random PARAMs and recomputes every UPDATE independently.
struct ScriptedRun {
  WorkerResult worker;
  std::vector<Index> oracle_draws;
  double max_update_error = 0.0;
  bool first_update_zero = false;
  bool hello_ok = false;
};

ScriptedRun ScriptWorker(const Problem& p, const std::vector<Index>& set, Index id,
                         std::uint64_t seed, int rounds) {
  Listener listener("127.0.0.1", 0);
  WorkerConfig wc;
  wc.port = listener.port();
  wc.id = id;
  wc.seed = seed;
  wc.record = true;
  auto worker = std::async(std::launch::async, [&] { return RunWorker(p, set, wc); });

  ScriptedRun out;
  Socket s = listener.Accept(10000);
  const auto hello = s.Receive();
  out.hello_ok = hello && hello->kind == MessageKind::kHello &&
                 hello->sender == static_cast<std::uint32_t>(id);
  const auto first = s.Receive();
  out.first_update_zero = first && first->kind == MessageKind::kUpdate &&
                          static_cast<Index>(first->payload.size()) == p.d &&
                          MaxAbs(PayloadOf(*first)) == 0.0;

  Rng rng = MakeStream(seed, stream::kFunctionBase + static_cast<std::uint64_t>(id));
  std::vector<Vector> alpha(static_cast<std::size_t>(p.n), Vector::Zero(p.d));
  std::mt19937_64 gen(seed + 100);
  for (int t = 0; t < rounds; ++t) {
    const Vector x = testing::RandomVector(gen, p.d);
    s.Send({MessageKind::kParam, kServerId, std::vector<double>(x.data(), x.data() + x.size())});
    const auto reply = s.Receive();
    if (!reply || reply->kind != MessageKind::kUpdate) break;
    const Index i = DrawFunction(rng, set);
    out.oracle_draws.push_back(i);
    const Vector g = GradComponent(p, i, x);
    const Vector expected = g - alpha[i];
    alpha[i] = g;
    out.max_update_error = std::max(out.max_update_error, MaxAbs(PayloadOf(*reply) - expected));
  }
  s.Send({MessageKind::kStop, kServerId, {}});
  out.worker = worker.get();
  return out;
}

TEST(WorkerTest, OpensWithZeroUpdateAndMatchesGradientOracle) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  const Partition part = MakePartition(12, 3, 1);
  const ScriptedRun run = ScriptWorker(p, part.sets[1], 1, 5, 40);
  EXPECT_TRUE(run.hello_ok);
  EXPECT_TRUE(run.first_update_zero);
  EXPECT_EQ(run.worker.exit_status, 0) << run.worker.diagnostic;
  EXPECT_EQ(run.worker.updates_sent, 41u);
  EXPECT_EQ(run.worker.draws, run.oracle_draws);
  EXPECT_EQ(run.max_update_error, 0.0);
  ASSERT_EQ(run.worker.steps.size(), 40u);
  // Recorded (i, x_j) pairs against the component-gradient oracle.
  std::vector<Vector> alpha(12, Vector::Zero(3));
  for (const WorkerStep& step : run.worker.steps) {
    const Vector g = GradComponent(p, step.function, step.x_local);
    EXPECT_LE(MaxAbs(step.sent - (g - alpha[step.function])), 1e-15);
    alpha[step.function] = g;
  }
}

TEST(WorkerTest, FixedSeedGivesIdenticalDraws) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  const Partition part = MakePartition(12, 2, 1);
  const ScriptedRun a = ScriptWorker(p, part.sets[0], 0, 9, 30);
  const ScriptedRun b = ScriptWorker(p, part.sets[0], 0, 9, 30);
  const ScriptedRun c = ScriptWorker(p, part.sets[0], 0, 10, 30);
  EXPECT_EQ(a.worker.draws, b.worker.draws);
  EXPECT_NE(a.worker.draws, c.worker.draws);
}

TEST(WorkerTest, ConnectionLossIsANonZeroExit) {
  const Problem p = GenerateLeastSquares(6, 2, 1.0, 1);
  Listener listener("127.0.0.1", 0);
  WorkerConfig wc;
  wc.port = listener.port();
  auto worker = std::async(std::launch::async, [&] { return RunWorker(p, {0, 1, 2}, wc); });
  {
    Socket s = listener.Accept(10000);
    s.Receive();
  }
  const WorkerResult r = worker.get();
  EXPECT_EQ(r.exit_status, 1);
  EXPECT_NE(r.diagnostic.find("lost"), std::string::npos) << r.diagnostic;

  listener.Close();
  WorkerConfig nobody = wc;
  nobody.connect_timeout_ms = 200;
  const WorkerResult unreachable = RunWorker(p, {0, 1, 2}, nobody);
  EXPECT_EQ(unreachable.exit_status, 1);
  EXPECT_FALSE(unreachable.diagnostic.empty());
}

// A server run on a background thread with hand-driven worker sockets.
class ScriptedServer {
 public:
  ScriptedServer(const Problem& p, PsConfig config, const Vector& x0)
      : server_(p, std::move(config)),
        result_(std::async(std::launch::async, [this, x0] { return server_.Run(x0); })) {}
  std::uint16_t port() const { return server_.port(); }
  PsResult Join() { return result_.get(); }

 private:
  ParameterServer server_;
  std::future<PsResult> result_;
};

Socket Hello(std::uint16_t port, std::uint32_t id) {
  Socket s = Connect("127.0.0.1", port, 5000);
  s.Send({MessageKind::kHello, id, {}});
  return s;
}

TEST(ServerTest, ZeroBudgetStopsImmediately) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  PsConfig config;
  config.m = 2;
  config.eta = 0.1;
  config.max_updates = 0;
  const Vector x0 = Vector::Constant(3, 0.5);
  ScriptedServer server(p, config, x0);
  Socket a = Hello(server.port(), 0);
  Socket b = Hello(server.port(), 1);
  for (Socket* s : {&a, &b}) {
    const auto msg = s->Receive();
    ASSERT_TRUE(msg.has_value());
    EXPECT_EQ(msg->kind, MessageKind::kStop);
    s->Close();
  }
  const PsResult r = server.Join();
  EXPECT_FALSE(r.aborted) << r.diagnostic;
  EXPECT_EQ(r.updates, 0u);
  EXPECT_EQ(r.x, x0);
}

TEST(ServerTest, DuplicateHelloIsRejected) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  std::ostringstream log;
  PsConfig config;
  config.m = 2;
  config.eta = 0.1;
  config.max_updates = 0;
  config.log = &log;
  ScriptedServer server(p, config, Vector::Zero(3));
  Socket a = Hello(server.port(), 0);
  Socket dup = Hello(server.port(), 0);
  // The server drops the duplicate connection without a reply.
  EXPECT_FALSE(dup.Receive().has_value());
  Socket b = Hello(server.port(), 1);
  EXPECT_EQ(a.Receive()->kind, MessageKind::kStop);
  EXPECT_EQ(b.Receive()->kind, MessageKind::kStop);
  a.Close();
  b.Close();
  const PsResult r = server.Join();
  EXPECT_FALSE(r.aborted) << r.diagnostic;
  EXPECT_NE(log.str().find("\"event\":\"reject\",\"machine\":0"), std::string::npos) << log.str();
}

TEST(ServerTest, ParamPrecedesTheUpdateAndDisconnectAborts) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  PsConfig config;
  config.m = 1;
  config.eta = 0.05;
  config.max_updates = 1000;
  const Vector x0 = Vector::Constant(3, 1.0);
  ScriptedServer server(p, config, x0);
  {
    Socket s = Hello(server.port(), 0);
    s.Send(Update(0, Vector::Zero(3)));
    const auto param = s.Receive();
    ASSERT_TRUE(param.has_value());
    EXPECT_EQ(param->kind, MessageKind::kParam);
    EXPECT_EQ(param->sender, kServerId);
    EXPECT_EQ(PayloadOf(*param), x0);  // the pre-update iterate
    s.Send(Update(0, Vector::Ones(3)));
    const auto second = s.Receive();
    ASSERT_TRUE(second.has_value());
    // Zero update and alpha_bar = 0: the first step leaves x in place.
    EXPECT_EQ(PayloadOf(*second), x0);
  }
  const PsResult r = server.Join();
  EXPECT_TRUE(r.aborted);
  EXPECT_NE(r.diagnostic.find("disconnected"), std::string::npos) << r.diagnostic;
  EXPECT_EQ(r.updates, 2u);
}

TEST(ServerTest, WrongDimensionAborts) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  PsConfig config;
  config.m = 1;
  config.eta = 0.05;
  config.max_updates = 10;
  ScriptedServer server(p, config, Vector::Zero(3));
  Socket s = Hello(server.port(), 0);
  s.Send(Update(0, Vector::Zero(4)));
  const PsResult r = server.Join();
  EXPECT_TRUE(r.aborted);
  EXPECT_NE(r.diagnostic.find("expected 3"), std::string::npos) << r.diagnostic;
}

TEST(ServerTest, StateHelpersFollowTheLogicalIteration) {
  // One arrival on the helpers equals step 2-4 and 6 of the logical step.
  PsRuntimeState s = InitRuntimeState(2, 2, Vector::Constant(2, 1.0));
  s.server.alpha_bar = Vector::Constant(2, 0.5);
  s.server.u[1] = Vector::Constant(2, 2.0);
  const Vector h = Vector::Constant(2, 4.0);
  FoldUpdate(s, 1, h, 0.5);
  EXPECT_EQ(s.server.u[1], Vector::Constant(2, 3.0));  // 2 (1 - 0.5) + 0.5 * 4
  ApplyServerStep(s, 1, h, 0.5, 0.1, 8);
  EXPECT_DOUBLE_EQ(s.server.x[0], 1.0 - 0.1 * 0.5 * 3.5);
  EXPECT_DOUBLE_EQ(s.server.alpha_bar[0], 0.5 + 4.0 / 8.0);
  EXPECT_DOUBLE_EQ(s.server.u[1][0], 3.0 - (2.0 / 8.0) * 4.0);
}

void ExpectReplayMatches(const Problem& p, const Partition& part, const DelayModel& model,
                         double eta, const LoopbackResult& r, const Vector& x0) {
  std::vector<std::vector<Index>> draws;
  for (const WorkerResult& w : r.workers) draws.push_back(w.draws);
  const std::vector<Vector> replay =
      ReplayAdsaga(p, part, model, eta, r.ps.arrivals, draws, x0);
  ASSERT_EQ(replay.size(), r.ps.trajectory.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < replay.size(); ++t) {
    worst = std::max(worst, MaxAbs(replay[t] - r.ps.trajectory[t]));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(LoopbackTest, SingleWorkerConvergesAndReplays) {
  const Problem p = GenerateLeastSquares(120, 60, 1.0, 1);
  const Partition part = MakePartition(120, 1, 1);
  LoopbackConfig config;
  config.ps.m = 1;
  config.ps.eta = 0.5 / p.L;
  config.ps.threshold = 0.1;
  config.ps.max_updates = 200000;
  config.ps.record_trajectory = true;
  config.seed = 3;
  const Vector x0 = Vector::Zero(60);
  const LoopbackResult r = RunLoopback(p, part, config, x0);
  ASSERT_TRUE(r.ok) << r.diagnostic;
  EXPECT_TRUE(r.ps.converged);
  EXPECT_LE(DistSq(p, r.ps.x), 0.1);
  ExpectReplayMatches(p, part, DelayModel::Uniform(1), config.ps.eta, r, x0);
}

TEST(LoopbackTest, ThreeWorkersReachTightThreshold) {
  const Problem p = GenerateLeastSquares(24, 8, 0.0, 2);
  const Partition part = MakePartition(24, 3, 2);
  LoopbackConfig config;
  config.ps.m = 3;
  config.ps.eta = 0.3 / p.L;
  config.ps.threshold = 1e-10;
  config.ps.max_updates = 500000;
  config.ps.record_trajectory = true;
  config.seed = 4;
  const LoopbackResult r = RunLoopback(p, part, config);
  ASSERT_TRUE(r.ok) << r.diagnostic;
  EXPECT_TRUE(r.ps.converged);
  EXPECT_LE(DistSq(p, r.ps.x), 1e-10);
  ExpectReplayMatches(p, part, DelayModel::Uniform(3), config.ps.eta, r, Vector::Zero(8));
}

TEST(LoopbackTest, HeterogeneousRatiosReplay) {
  const Problem p = GenerateLeastSquares(24, 8, 1.0, 3);
  const Partition part = MakePartition(24, 3, 3);
  const std::vector<double> rates = {2.0, 1.0, 1.0};
  LoopbackConfig config;
  config.ps.m = 3;
  config.ps.eta = 0.3 / p.L;
  config.ps.rates = rates;
  config.ps.max_updates = 3000;
  config.ps.record_trajectory = true;
  config.seed = 5;
  const LoopbackResult r = RunLoopback(p, part, config);
  ASSERT_TRUE(r.ok) << r.diagnostic;
  EXPECT_EQ(r.ps.updates, 3000u);
  ExpectReplayMatches(p, part, DelayModel::FromRates(rates), config.ps.eta, r, Vector::Zero(8));
}

TEST(LoopbackTest, EveryAlgorithmConvergesWithoutNoise) {
  const Problem p = GenerateLeastSquares(24, 8, 0.0, 6);
  const Partition part = MakePartition(24, 3, 6);
  for (RuntimeAlgorithm algorithm :
       {RuntimeAlgorithm::kAdsaga, RuntimeAlgorithm::kIag, RuntimeAlgorithm::kAsyncSgd,
        RuntimeAlgorithm::kMinibatchSaga, RuntimeAlgorithm::kMinibatchSgd}) {
    for (bool vanilla : {false, true}) {
      if (vanilla && algorithm != RuntimeAlgorithm::kAdsaga) continue;
      LoopbackConfig config;
      config.ps.algorithm = algorithm;
      config.ps.vanilla = vanilla;
      config.ps.m = 3;
      config.ps.eta = (IsSynchronous(algorithm) ? 0.1 : 0.2) / p.L;
      config.ps.threshold = 1e-6;
      config.ps.max_updates = 300000;
      const LoopbackResult r = RunLoopback(p, part, config);
      const std::string name = RuntimeAlgorithmName(algorithm) + (vanilla ? " (vanilla)" : "");
      ASSERT_TRUE(r.ok) << name << ": " << r.diagnostic;
      EXPECT_TRUE(r.ps.converged) << name << " metric " << r.ps.final_metric;
      std::uint64_t total = 0;
      for (std::uint64_t c : r.ps.update_counts) total += c;
      EXPECT_EQ(total, r.ps.updates) << name;
      if (IsSynchronous(algorithm)) {
        EXPECT_EQ(r.ps.update_counts[0], r.ps.update_counts[2]) << name;
      }
    }
  }
}

TEST(LoopbackTest, StragglerHasTheSmallestEstimatedRate) {
  const Problem p = GenerateLeastSquares(48, 8, 1.0, 7);
  const Partition part = MakePartition(48, 4, 7);
  LoopbackConfig config;
  config.ps.m = 4;
  config.ps.eta = 0.2 / p.L;
  config.ps.max_updates = 800;
  config.delays_s = {2e-3, 2e-4, 2e-4, 2e-4};
  const LoopbackResult r = RunLoopback(p, part, config);
  ASSERT_TRUE(r.ok) << r.diagnostic;
  const DelayModel estimate = DelayModel::EstimateRates(r.ps.update_counts);
  for (Index j = 1; j < 4; ++j) EXPECT_LT(estimate.p(0), estimate.p(j));
}

TEST(LoopbackTest, RunLogIsJsonLines) {
  const Problem p = GenerateLeastSquares(24, 8, 1.0, 8);
  const Partition part = MakePartition(24, 2, 8);
  std::ostringstream log;
  LoopbackConfig config;
  config.ps.m = 2;
  config.ps.eta = 0.2 / p.L;
  config.ps.max_updates = 240;
  config.ps.log = &log;
  const LoopbackResult r = RunLoopback(p, part, config);
  ASSERT_TRUE(r.ok) << r.diagnostic;
  std::istringstream in(log.str());
  std::string line;
  std::vector<std::string> events;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"t_wall", "event", "machine", "epoch", "metric"}) {
      ASSERT_TRUE(j.contains(key)) << line;
    }
    events.push_back(j["event"]);
  }
  ASSERT_GE(events.size(), 4u);
  EXPECT_EQ(events.front(), "hello");
  EXPECT_EQ(events.back(), "stop");
  // Budget 240 = 10 epochs of n = 24, plus the check at the start.
  EXPECT_EQ(std::count(events.begin(), events.end(), "epoch"), 11);
}

}  // namespace
}  // namespace adsaga::net
