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


#include "adsaga/net/parameter_server.h"

#include <poll.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace adsaga::net {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double>(to - from).count();
}

struct Abort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

WireMessage VectorMessage(MessageKind kind, const Vector& v) {
  WireMessage msg;
  msg.kind = kind;
  msg.sender = kServerId;
  msg.payload.assign(v.data(), v.data() + v.size());
  return msg;
}

}  // namespace

std::string RuntimeAlgorithmName(RuntimeAlgorithm algorithm) {
  switch (algorithm) {
    case RuntimeAlgorithm::kAdsaga:
      return "adsaga";
    case RuntimeAlgorithm::kIag:
      return "iag";
    case RuntimeAlgorithm::kAsyncSgd:
      return "async_sgd";
    case RuntimeAlgorithm::kMinibatchSaga:
      return "minibatch_saga";
    case RuntimeAlgorithm::kMinibatchSgd:
      return "minibatch_sgd";
  }
  return "unknown";
}

RuntimeAlgorithm ParseRuntimeAlgorithm(const std::string& name) {
  for (RuntimeAlgorithm a :
       {RuntimeAlgorithm::kAdsaga, RuntimeAlgorithm::kIag, RuntimeAlgorithm::kAsyncSgd,
        RuntimeAlgorithm::kMinibatchSaga, RuntimeAlgorithm::kMinibatchSgd}) {
    if (RuntimeAlgorithmName(a) == name) return a;
  }
  throw std::invalid_argument("unknown runtime algorithm '" + name + "'");
}

bool IsSynchronous(RuntimeAlgorithm algorithm) {
  return algorithm == RuntimeAlgorithm::kMinibatchSaga ||
         algorithm == RuntimeAlgorithm::kMinibatchSgd;
}

bool SendsDifference(RuntimeAlgorithm algorithm) {
  return algorithm != RuntimeAlgorithm::kAsyncSgd && algorithm != RuntimeAlgorithm::kMinibatchSgd;
}

bool CyclicOrder(RuntimeAlgorithm algorithm) { return algorithm == RuntimeAlgorithm::kIag; }

PsRuntimeState InitRuntimeState(Index d, Index m, const Vector& x0) {
  PsRuntimeState s;
  s.server.x = x0.size() == 0 ? Vector::Zero(d) : x0;
  s.server.alpha_bar = Vector::Zero(d);
  s.server.u.assign(static_cast<std::size_t>(m), Vector::Zero(d));
  s.alpha_sum = Vector::Zero(d);
  s.last_h.assign(static_cast<std::size_t>(m), Vector::Zero(d));
  s.update_counts.assign(static_cast<std::size_t>(m), 0);
  return s;
}

void FoldUpdate(PsRuntimeState& state, Index machine, const Vector& h, double ratio) {
  Vector& u = state.server.u[machine];
  u = u * (1.0 - ratio) + ratio * h;
  state.last_h[machine] = h;
}

void ApplyServerStep(PsRuntimeState& state, Index machine, const Vector& h, double ratio,
                     double eta, Index n) {
  ServerState& server = state.server;
  Vector& u = server.u[machine];
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(server.u.size());
  server.x.noalias() -= (eta * ratio) * (u + server.alpha_bar);
  server.alpha_bar.noalias() += h / nd;
  u.noalias() -= (md / nd) * h;
  ++server.iteration;
}

class ParameterServer::Impl {
 public:
  Impl(const Problem& problem, PsConfig config)
      : problem_(problem), config_(std::move(config)), listener_(config_.host, config_.port) {
    if (config_.m < 1) throw std::invalid_argument("ParameterServer: m must be >= 1");
    if (!(config_.eta > 0.0)) throw std::invalid_argument("ParameterServer: eta must be > 0");
    ratios_.assign(static_cast<std::size_t>(config_.m), 1.0);
    if (!config_.rates.empty()) {
      if (static_cast<Index>(config_.rates.size()) != config_.m) {
        throw std::invalid_argument("ParameterServer: rates must have m entries");
      }
      const DelayModel model = DelayModel::FromRates(config_.rates);
      if (!config_.vanilla) {
        for (Index j = 0; j < config_.m; ++j) ratios_[j] = model.ratio(j);
      }
    }
  }

  std::uint16_t port() const { return listener_.port(); }

  PsResult Run(const Vector& x0) {
    start_ = Clock::now();
    if (x0.size() != 0 && x0.size() != problem_.d) {
      throw std::invalid_argument("ParameterServer::Run: x0 has the wrong dimension");
    }
    state_ = InitRuntimeState(problem_.d, config_.m, x0);
    result_ = PsResult();
    try {
      Handshake();
      Serve();
    } catch (const std::exception& e) {
      result_.aborted = true;
      result_.diagnostic = e.what();
      Log("abort", -1, std::nan(""));
      for (Socket& s : workers_) s.Shutdown();
    }
    for (Socket& s : workers_) s.Close();
    listener_.Close();
    result_.x = state_.server.x;
    result_.updates = state_.updates;
    result_.epochs = state_.epoch;
    result_.update_counts = state_.update_counts;
    result_.final_metric = MetricAt(state_.server.x);
    return std::move(result_);
  }

 private:
  double MetricAt(const Vector& x) const {
    return config_.metric == Metric::kDistSq ? DistSq(problem_, x) : ObjectiveGap(problem_, x);
  }

  void Log(const std::string& event, Index machine, double metric) {
    if (config_.log == nullptr) return;
    nlohmann::ordered_json j;
    j["t_wall"] = Seconds(start_, Clock::now());
    j["event"] = event;
    j["machine"] = machine >= 0 ? nlohmann::json(machine) : nlohmann::json(nullptr);
    j["epoch"] = state_.epoch;
    j["metric"] = std::isfinite(metric) ? nlohmann::json(metric) : nlohmann::json(nullptr);
    *config_.log << j.dump() << '\n';
    config_.log->flush();
  }

  void Handshake() {
    workers_.clear();
    workers_.resize(static_cast<std::size_t>(config_.m));
    const auto deadline = Clock::now() + std::chrono::milliseconds(config_.accept_timeout_ms);
    Index registered = 0;
    while (registered < config_.m) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      Socket s = left.count() > 0 ? listener_.Accept(static_cast<int>(left.count())) : Socket();
      if (!s.valid()) {
        throw Abort("timed out waiting for workers: " + std::to_string(registered) + " of " +
                    std::to_string(config_.m) + " connected");
      }
      s.SetReceiveTimeout(std::max(1, static_cast<int>(left.count())));
      std::optional<WireMessage> hello;
      try {
        hello = s.Receive();
      } catch (const std::exception& e) {
        Log("reject", -1, std::nan(""));
        continue;
      }
      if (!hello || hello->kind != MessageKind::kHello) {
        Log("reject", -1, std::nan(""));
        continue;
      }
      const Index id = static_cast<Index>(hello->sender);
      if (id >= config_.m || workers_[id].valid()) {
        // Unknown or duplicate machine id: drop the connection.
        Log("reject", id, std::nan(""));
        continue;
      }
      s.SetReceiveTimeout(0);
      workers_[id] = std::move(s);
      ++registered;
      Log("hello", id, std::nan(""));
    }
  }

  // Returns true when the run should stop.
  bool CheckEpoch() {
    const double metric = MetricAt(state_.server.x);
    Log("epoch", -1, metric);
    if (!std::isfinite(metric) || metric > 1e30) {
      result_.diverged = true;
      return true;
    }
    if (config_.threshold && metric <= *config_.threshold) {
      result_.converged = true;
      result_.time_to_threshold_s = Seconds(serve_start_, Clock::now());
      result_.iterations_to_threshold = result_.iterations;
      Log("converged", -1, metric);
      return true;
    }
    return false;
  }

  bool BudgetExhausted() const {
    return config_.max_updates && state_.updates >= *config_.max_updates;
  }

  void Record(Index machine) {
    result_.arrivals.push_back(machine);
    if (config_.record_trajectory) result_.trajectory.push_back(state_.server.x);
  }

  Vector ReadUpdate(const WireMessage& msg, Index machine) {
    if (msg.kind != MessageKind::kUpdate) {
      throw Abort("unexpected " + KindName(msg.kind) + " from machine " +
                  std::to_string(machine));
    }
    if (static_cast<Index>(msg.sender) != machine) {
      throw Abort("machine " + std::to_string(machine) + " sent an UPDATE as sender " +
                  std::to_string(msg.sender));
    }
    if (static_cast<Index>(msg.payload.size()) != problem_.d) {
      throw Abort("UPDATE from machine " + std::to_string(machine) + " has " +
                  std::to_string(msg.payload.size()) + " entries, expected " +
                  std::to_string(problem_.d));
    }
    return Eigen::Map<const Vector>(msg.payload.data(), problem_.d);
  }

  // Async: one arrival. Returns true when the run should stop.
  bool HandleAsync(Index j, const Vector& h) {
    const bool first = state_.update_counts[j] == 0;
    const double n = static_cast<double>(problem_.n);
    switch (config_.algorithm) {
      case RuntimeAlgorithm::kAdsaga:
        FoldUpdate(state_, j, h, ratios_[j]);
        workers_[j].Send(VectorMessage(MessageKind::kParam, state_.server.x));
        ApplyServerStep(state_, j, h, ratios_[j], config_.eta, problem_.n);
        break;
      case RuntimeAlgorithm::kIag:
        state_.alpha_sum += h;
        state_.last_h[j] = h;
        workers_[j].Send(VectorMessage(MessageKind::kParam, state_.server.x));
        if (!first) state_.server.x.noalias() -= (config_.eta / n) * state_.alpha_sum;
        break;
      case RuntimeAlgorithm::kAsyncSgd:
        state_.last_h[j] = h;
        workers_[j].Send(VectorMessage(MessageKind::kParam, state_.server.x));
        if (!first) state_.server.x.noalias() -= config_.eta * h;
        break;
      default:
        throw Abort("HandleAsync: synchronous algorithm");
    }
    ++state_.update_counts[j];
    ++state_.updates;
    ++result_.iterations;
    Record(j);
    bool stop = false;
    if (state_.updates % static_cast<std::uint64_t>(problem_.n) == 0) {
      ++state_.epoch;
      stop = CheckEpoch();
    }
    return stop || BudgetExhausted();
  }

  // Sync: called once every machine has a pending UPDATE. Returns true when
  // the run should stop; otherwise the caller broadcasts PARAM.
  bool HandleRound(const std::vector<Vector>& pending) {
    const bool initial = rounds_ == 0;
    ++rounds_;
    for (Index j = 0; j < config_.m; ++j) {
      ++state_.update_counts[j];
      state_.last_h[j] = pending[j];
    }
    state_.updates += static_cast<std::uint64_t>(config_.m);
    if (initial) return BudgetExhausted();

    Vector dir = Vector::Zero(problem_.d);
    if (config_.algorithm == RuntimeAlgorithm::kMinibatchSaga) {
      for (const Vector& h : pending) dir += h + state_.server.alpha_bar;
      state_.server.x.noalias() -= config_.eta * dir;
      const double n = static_cast<double>(problem_.n);
      for (const Vector& h : pending) state_.server.alpha_bar.noalias() += h / n;
    } else {
      for (const Vector& g : pending) dir += g;
      state_.server.x.noalias() -= config_.eta * dir;
    }
    ++result_.iterations;
    Record(-1);
    const std::uint64_t per_epoch = static_cast<std::uint64_t>(
        (problem_.n + config_.m - 1) / config_.m);
    bool stop = false;
    if (result_.iterations % per_epoch == 0) {
      ++state_.epoch;
      stop = CheckEpoch();
    }
    return stop || BudgetExhausted();
  }

  void Broadcast(const WireMessage& msg) {
    for (Socket& s : workers_) s.Send(msg);
  }

  void Serve() {
    serve_start_ = Clock::now();
    Log("start", -1, MetricAt(state_.server.x));
    const auto deadline = serve_start_ + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(config_.timeout_s));
    bool stop = CheckEpoch() || BudgetExhausted();

    const bool sync = IsSynchronous(config_.algorithm);
    std::vector<Vector> pending(static_cast<std::size_t>(config_.m));
    std::vector<bool> has_pending(static_cast<std::size_t>(config_.m), false);
    Index pending_count = 0;
    std::vector<pollfd> fds(static_cast<std::size_t>(config_.m));
    std::size_t rotate = 0;

    while (!stop) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) {
        result_.timed_out = true;
        Log("timeout", -1, MetricAt(state_.server.x));
        break;
      }
      for (Index j = 0; j < config_.m; ++j) fds[j] = {workers_[j].fd(), POLLIN, 0};
      const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw Abort("poll failed");
      }
      for (std::size_t step = 0; step < fds.size() && !stop; ++step) {
        const Index j = static_cast<Index>((rotate + step) % fds.size());
        if (fds[j].revents == 0) continue;
        std::optional<WireMessage> msg;
        try {
          msg = workers_[j].Receive();
        } catch (const std::exception& e) {
          throw Abort("machine " + std::to_string(j) + ": " + e.what());
        }
        if (!msg) throw Abort("machine " + std::to_string(j) + " disconnected");
        if (msg->kind == MessageKind::kHello) {
          Log("reject", j, std::nan(""));
          continue;
        }
        const Vector h = ReadUpdate(*msg, j);
        if (!sync) {
          stop = HandleAsync(j, h);
          continue;
        }
        if (has_pending[j]) {
          throw Abort("machine " + std::to_string(j) + " sent two UPDATEs in one round");
        }
        pending[j] = h;
        has_pending[j] = true;
        if (++pending_count == config_.m) {
          stop = HandleRound(pending);
          std::fill(has_pending.begin(), has_pending.end(), false);
          pending_count = 0;
          if (!stop) Broadcast(VectorMessage(MessageKind::kParam, state_.server.x));
        }
      }
      rotate = (rotate + 1) % fds.size();
    }

    result_.wallclock_s = Seconds(serve_start_, Clock::now());
    WireMessage stop_msg;
    stop_msg.kind = MessageKind::kStop;
    stop_msg.sender = kServerId;
    for (Socket& s : workers_) {
      try {
        s.Send(stop_msg);
      } catch (const std::exception&) {
        // The worker is already gone; nothing left to tell it.
      }
    }
    Log("stop", -1, MetricAt(state_.server.x));
    Drain();
  }

  // Reads until every worker has closed so late UPDATEs do not hit a reset.
  void Drain() {
    const auto deadline = Clock::now() + std::chrono::seconds(5);
    std::vector<bool> open(workers_.size(), true);
    std::size_t remaining = workers_.size();
    while (remaining > 0 && Clock::now() < deadline) {
      std::vector<pollfd> fds;
      std::vector<std::size_t> index;
      for (std::size_t j = 0; j < workers_.size(); ++j) {
        if (!open[j]) continue;
        fds.push_back({workers_[j].fd(), POLLIN, 0});
        index.push_back(j);
      }
      if (::poll(fds.data(), fds.size(), 100) <= 0) continue;
      for (std::size_t k = 0; k < fds.size(); ++k) {
        if (fds[k].revents == 0) continue;
        bool closed = false;
        try {
          closed = !workers_[index[k]].Receive().has_value();
        } catch (const std::exception&) {
          closed = true;
        }
        if (closed) {
          open[index[k]] = false;
          --remaining;
        }
      }
    }
  }

  const Problem& problem_;
  PsConfig config_;
  Listener listener_;
  std::vector<double> ratios_;
  std::vector<Socket> workers_;
  PsRuntimeState state_;
  PsResult result_;
  std::uint64_t rounds_ = 0;
  Clock::time_point start_;
  Clock::time_point serve_start_;
};

ParameterServer::ParameterServer(const Problem& problem, PsConfig config)
    : impl_(std::make_unique<Impl>(problem, std::move(config))) {}

ParameterServer::~ParameterServer() = default;

std::uint16_t ParameterServer::port() const { return impl_->port(); }

PsResult ParameterServer::Run(const Vector& x0) { return impl_->Run(x0); }

}  // namespace adsaga::net
