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

#include "adsaga/adsaga.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adsaga {

AdsagaState Init(const Problem& problem, const Partition& partition, const Vector& x0,
                 Rng& init_rng) {
  if (x0.size() != problem.d || partition.components() != problem.n) {
    throw std::invalid_argument("Init: dimensions of x0/partition do not match the problem");
  }
  const Index m = partition.machines();
  const Index d = problem.d;
  AdsagaState state;
  state.server.x = x0;
  state.server.alpha_bar = Vector::Zero(d);
  state.server.u.assign(static_cast<std::size_t>(m), Vector::Zero(d));
  state.workers.resize(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    WorkerState& w = state.workers[j];
    w.x_local = x0;
    w.h = Vector::Zero(d);
    w.g = Vector::Zero(d);
    w.beta = Vector::Zero(d);
    w.alpha.assign(partition.sets[j].size(), Vector::Zero(d));
    w.last_function = DrawFunction(init_rng, partition.sets[j]);
  }
  return state;
}

double StepSizeLocal(double eta, const DelayModel& model, Index j) {
  return eta * model.ratio(j);
}

void ApplyLogicalStep(AdsagaState& state, const Problem& problem, const Partition& partition,
                      const DelayModel& model, double eta, Index machine, Index function,
                      StepCapture* capture) {
  ServerState& server = state.server;
  WorkerState& w = state.workers[machine];
  Vector& u = server.u[machine];
  const double ratio = model.ratio(machine);
  const double n = static_cast<double>(problem.n);
  const double m = static_cast<double>(partition.machines());

  if (capture != nullptr) {
    capture->machine = machine;
    capture->u_before = u;
    capture->h_before = w.h;
  }

  state.alpha(partition, w.last_function) = w.g;
  w.x_local = server.x;  // x_entry
  server.x.noalias() -= (eta * ratio) * (u + server.alpha_bar);
  server.alpha_bar.noalias() += w.h / n;
  u.noalias() -= (m / n) * w.h;

  GradComponent(problem, function, w.x_local, w.g);
  w.beta = state.alpha(partition, function);
  w.h = w.g - w.beta;
  u = u * (1.0 - ratio) + ratio * w.h;
  w.last_function = function;
  ++server.iteration;
}

StepDraw LogicalStep(AdsagaState& state, const Problem& problem, const Partition& partition,
                     const DelayModel& model, double eta, DrawStreams& streams,
                     StepCapture* capture) {
  StepDraw draw;
  draw.machine = model.Sample(streams.machine);
  draw.function = DrawFunction(streams.function[draw.machine], partition.sets[draw.machine]);
  ApplyLogicalStep(state, problem, partition, model, eta, draw.machine, draw.function, capture);
  return draw;
}

double TheoreticalR(Index m, Index n, const DelayModel& model) {
  const double skew = model.p_max() / model.p_min();
  return 8.0 * (76.0 + 168.0 * skew * skew * static_cast<double>(m) / static_cast<double>(n)) /
         3.0;
}

double TheoreticalEta(const Problem& problem, Index m, const DelayModel& model) {
  const double r = TheoreticalR(m, problem.n, model);
  return 1.0 / (2.0 * r * problem.L +
                2.0 * std::sqrt(r * static_cast<double>(m) * problem.L_f * problem.L));
}

std::uint64_t TheoreticalIterations(const Problem& problem, Index m, const DelayModel& model,
                                    double eps, double initial_gap) {
  const double r = TheoreticalR(m, problem.n, model);
  const double eta = TheoreticalEta(problem, m, model);
  const double md = static_cast<double>(m);
  const double numerator =
      (1.0 + 1.0 / (2.0 * md * problem.mu * eta)) * initial_gap +
      static_cast<double>(problem.n) * problem.sigma_sq / (2.0 * problem.L);
  if (!(eps > 0.0) || !(eps < numerator)) {
    throw std::invalid_argument("TheoreticalIterations: eps must lie in (0, log numerator)");
  }
  const double prefactor =
      md * model.p_min() *
      (4.0 * static_cast<double>(problem.n) + 2.0 * r * problem.L / problem.mu +
       2.0 * std::sqrt(r) * std::sqrt(md * problem.L_f * problem.L) / problem.mu);
  return static_cast<std::uint64_t>(std::ceil(prefactor * std::log(numerator / eps)));
}

std::uint64_t TheoreticalIterations(const Problem& problem, Index m, const DelayModel& model,
                                    double eps, const Vector& x0) {
  return TheoreticalIterations(problem, m, model, eps, ObjectiveGap(problem, x0));
}

Trace Run(const Problem& problem, const Partition& partition, const DelayModel& model,
          double eta, const StopCriterion& stop, std::uint64_t seed, const Vector& x0) {
  const Index m = partition.machines();
  if (model.machines() != m) {
    throw std::invalid_argument("Run: delay model and partition disagree on m");
  }
  DrawStreams streams(seed, m);
  const Vector start = x0.size() == 0 ? Vector::Zero(problem.d) : x0;
  AdsagaState state = Init(problem, partition, start, streams.init);
  return Drive(problem, stop, static_cast<std::uint64_t>(problem.n), 1, state.server.x, [&] {
    return LogicalStep(state, problem, partition, model, eta, streams).machine;
  });
}

InvariantResiduals CheckInvariants(const AdsagaState& state, const Problem& problem,
                                   const Partition& partition, const DelayModel& model) {
  InvariantResiduals res;
  Vector mean = Vector::Zero(problem.d);
  double scale = 0.0;
  for (const WorkerState& w : state.workers) {
    for (const Vector& a : w.alpha) {
      mean += a;
      scale += a.norm();
    }
  }
  mean /= static_cast<double>(problem.n);
  scale /= static_cast<double>(problem.n);
  const double diff = (state.server.alpha_bar - mean).norm();
  res.alpha_bar = diff == 0.0 ? 0.0 : diff / std::max(scale, 1e-300);

  for (std::size_t j = 0; j < state.workers.size(); ++j) {
    const WorkerState& w = state.workers[j];
    res.alpha_beta = std::max(
        res.alpha_beta, (state.alpha(partition, w.last_function) - w.beta).lpNorm<Eigen::Infinity>());
    res.h_identity = std::max(res.h_identity, (w.h - (w.g - w.beta)).lpNorm<Eigen::Infinity>());
    if (model.is_uniform()) {
      res.uniform_u =
          std::max(res.uniform_u, (state.server.u[j] - w.h).lpNorm<Eigen::Infinity>());
    }
  }
  return res;
}

double CombinedUpdateResidual(const AdsagaState& after, const StepCapture& capture,
                              const DelayModel& model, Index n) {
  const Index j = capture.machine;
  const double ratio = model.ratio(j);
  const double m = static_cast<double>(model.machines());
  const Vector& h_new = after.workers[j].h;
  const Vector expected = capture.u_before * (1.0 - ratio) + ratio * h_new -
                          (m / static_cast<double>(n)) * (1.0 - ratio) * capture.h_before;
  const double diff = (after.server.u[j] - expected).norm();
  if (diff == 0.0) return 0.0;
  const double scale =
      capture.u_before.norm() + h_new.norm() + capture.h_before.norm();
  return diff / std::max(scale, 1e-300);
}

}  // namespace adsaga
