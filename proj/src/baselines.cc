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

#include "adsaga/baselines.h"

#include <algorithm>
#include <stdexcept>

#include "adsaga/adsaga.h"

namespace adsaga {
namespace {

std::vector<StaleMachine> MakeMachines(Index m, const Vector& x0) {
  std::vector<StaleMachine> machines(static_cast<std::size_t>(m));
  for (StaleMachine& s : machines) s.x_local = x0;
  return machines;
}

Vector StartPoint(const Problem& problem, const Vector& x0) {
  return x0.size() == 0 ? Vector::Zero(problem.d) : x0;
}

std::uint64_t MinibatchEpoch(const Problem& problem, Index m) {
  return static_cast<std::uint64_t>((problem.n + m - 1) / m);
}

}  // namespace

AsagaState InitAsaga(const Problem& problem, Index m, const Vector& x0) {
  AsagaState s;
  s.x = x0;
  s.alpha.assign(static_cast<std::size_t>(problem.n), Vector::Zero(problem.d));
  s.alpha_bar = Vector::Zero(problem.d);
  s.machines = MakeMachines(m, x0);
  return s;
}

IagState InitIag(const Problem& problem, Index m, const Vector& x0) {
  IagState s;
  s.x = x0;
  s.alpha.assign(static_cast<std::size_t>(problem.n), Vector::Zero(problem.d));
  s.alpha_sum = Vector::Zero(problem.d);
  s.machines = MakeMachines(m, x0);
  return s;
}

SgdState InitSgd(const Problem& problem, Index m, const Vector& x0) {
  (void)problem;
  SgdState s;
  s.x = x0;
  s.machines = MakeMachines(m, x0);
  return s;
}

MinibatchState InitMinibatch(const Problem& problem, const Vector& x0) {
  MinibatchState s;
  s.x = x0;
  s.alpha.assign(static_cast<std::size_t>(problem.n), Vector::Zero(problem.d));
  s.alpha_bar = Vector::Zero(problem.d);
  return s;
}

Vector AsagaDirection(const AsagaState& state, const Problem& problem, Index machine, Index i) {
  return GradComponent(problem, i, state.machines[machine].x_local) - state.alpha[i] +
         state.alpha_bar;
}

Vector IagDirection(const IagState& state, const Problem& problem, Index machine, Index i) {
  const Vector g = GradComponent(problem, i, state.machines[machine].x_local);
  return (state.alpha_sum - state.alpha[i] + g) / static_cast<double>(problem.n);
}

void ApplyAsagaVisit(AsagaState& state, const Problem& problem, double eta, Index machine,
                     Index next_function) {
  StaleMachine& mach = state.machines[machine];
  if (mach.pending >= 0) {
    const Index i = mach.pending;
    const Vector g = GradComponent(problem, i, mach.x_local);
    mach.x_local = state.x;  // reply before the update
    state.x.noalias() -= eta * (g - state.alpha[i] + state.alpha_bar);
    state.alpha_bar.noalias() += (g - state.alpha[i]) / static_cast<double>(problem.n);
    state.alpha[i] = g;
  } else {
    mach.x_local = state.x;
  }
  mach.pending = next_function;
}

void ApplyIagVisit(IagState& state, const Problem& problem, double eta, Index machine,
                   Index next_function) {
  StaleMachine& mach = state.machines[machine];
  if (mach.pending >= 0) {
    const Index i = mach.pending;
    const Vector g = GradComponent(problem, i, mach.x_local);
    mach.x_local = state.x;
    state.alpha_sum.noalias() += g - state.alpha[i];
    state.alpha[i] = g;
    state.x.noalias() -= (eta / static_cast<double>(problem.n)) * state.alpha_sum;
  } else {
    mach.x_local = state.x;
  }
  mach.pending = next_function;
}

void ApplySgdVisit(SgdState& state, const Problem& problem, double eta, Index machine,
                   Index next_function) {
  StaleMachine& mach = state.machines[machine];
  if (mach.pending >= 0) {
    const Vector g = GradComponent(problem, mach.pending, mach.x_local);
    mach.x_local = state.x;
    state.x.noalias() -= eta * g;
  } else {
    mach.x_local = state.x;
  }
  mach.pending = next_function;
}

Index AsagaStep(AsagaState& state, const Problem& problem, const DelayModel& model, double eta,
                DrawStreams& streams) {
  const Index j = model.Sample(streams.machine);
  const Index next = UniformIndex(streams.function[j], problem.n);
  ApplyAsagaVisit(state, problem, eta, j, next);
  return j;
}

Index IagStep(IagState& state, const Problem& problem, const Partition& partition,
              const DelayModel& model, double eta, DrawStreams& streams) {
  const Index j = model.Sample(streams.machine);
  StaleMachine& mach = state.machines[j];
  const auto& set = partition.sets[j];
  const Index next = set[static_cast<std::size_t>(mach.cursor)];
  mach.cursor = (mach.cursor + 1) % static_cast<Index>(set.size());
  ApplyIagVisit(state, problem, eta, j, next);
  return j;
}

Index AsyncSgdStep(SgdState& state, const Problem& problem, const Partition& partition,
                   const DelayModel& model, double eta, DrawStreams& streams) {
  const Index j = model.Sample(streams.machine);
  const Index next = DrawFunction(streams.function[j], partition.sets[j]);
  ApplySgdVisit(state, problem, eta, j, next);
  return j;
}

void ApplyMinibatchSaga(MinibatchState& state, const Problem& problem, double eta,
                        std::span<const Index> batch) {
  std::vector<Vector> grads;
  grads.reserve(batch.size());
  Vector dir = Vector::Zero(problem.d);
  for (Index i : batch) {
    grads.push_back(GradComponent(problem, i, state.x));
    dir += grads.back() - state.alpha[i] + state.alpha_bar;
  }
  state.x.noalias() -= eta * dir;
  const double n = static_cast<double>(problem.n);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    Vector& a = state.alpha[batch[k]];
    state.alpha_bar.noalias() += (grads[k] - a) / n;
    a = grads[k];
  }
}

void ApplyMinibatchSgd(Vector& x, const Problem& problem, double eta,
                       std::span<const Index> batch) {
  Vector dir = Vector::Zero(problem.d);
  Vector g(problem.d);
  for (Index i : batch) {
    GradComponent(problem, i, x, g);
    dir += g;
  }
  x.noalias() -= eta * dir;
}

std::vector<Index> DrawMinibatch(const Problem& problem, DataMode mode, const Partition& partition,
                                 Index m, DrawStreams& streams) {
  std::vector<Index> batch(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    batch[j] = mode == DataMode::kShared ? UniformIndex(streams.function[j], problem.n)
                                         : DrawFunction(streams.function[j], partition.sets[j]);
  }
  return batch;
}

void MinibatchSagaStep(MinibatchState& state, const Problem& problem, DataMode mode,
                       const Partition& partition, Index m, double eta, DrawStreams& streams) {
  const std::vector<Index> batch = DrawMinibatch(problem, mode, partition, m, streams);
  ApplyMinibatchSaga(state, problem, eta, batch);
}

void MinibatchSgdStep(Vector& x, const Problem& problem, DataMode mode,
                      const Partition& partition, Index m, double eta, DrawStreams& streams) {
  const std::vector<Index> batch = DrawMinibatch(problem, mode, partition, m, streams);
  ApplyMinibatchSgd(x, problem, eta, batch);
}

double MinibatchSagaEta(const Problem& problem, Index m) {
  return 1.0 / (2.0 * static_cast<double>(m) * problem.L_f + 3.0 * problem.L);
}

double MinibatchSagaGamma(const Problem& problem, Index m) {
  const double md = static_cast<double>(m);
  return std::min(problem.mu * md / (4.0 * md * problem.L_f + 12.0 * problem.L),
                  md / (3.0 * static_cast<double>(problem.n)));
}

double MinibatchSagaPotential(const MinibatchState& state, const Problem& problem, double eta) {
  double acc = 0.0;
  Vector g(problem.d);
  for (Index i = 0; i < problem.n; ++i) {
    GradComponent(problem, i, problem.x_star, g);
    acc += (state.alpha[i] - g).squaredNorm();
  }
  const double n = static_cast<double>(problem.n);
  return (state.x - problem.x_star).squaredNorm() + 4.0 * n * eta * eta * acc / n;
}

double AlphaMeanResidual(const std::vector<Vector>& alpha, const Vector& alpha_bar) {
  Vector mean = Vector::Zero(alpha_bar.size());
  double scale = 0.0;
  for (const Vector& a : alpha) {
    mean += a;
    scale += a.norm();
  }
  mean /= static_cast<double>(alpha.size());
  scale /= static_cast<double>(alpha.size());
  const double diff = (mean - alpha_bar).norm();
  return diff == 0.0 ? 0.0 : diff / std::max(scale, 1e-300);
}

double AlphaSumResidual(const std::vector<Vector>& alpha, const Vector& alpha_sum) {
  Vector sum = Vector::Zero(alpha_sum.size());
  double scale = 0.0;
  for (const Vector& a : alpha) {
    sum += a;
    scale += a.norm();
  }
  const double diff = (sum - alpha_sum).norm();
  return diff == 0.0 ? 0.0 : diff / std::max(scale, 1e-300);
}

Trace RunAsaga(const Problem& problem, Index m, const DelayModel& model, double eta,
               const StopCriterion& stop, std::uint64_t seed, const Vector& x0) {
  DrawStreams streams(seed, m);
  AsagaState state = InitAsaga(problem, m, StartPoint(problem, x0));
  return Drive(problem, stop, static_cast<std::uint64_t>(problem.n), 1, state.x,
               [&] { return AsagaStep(state, problem, model, eta, streams); });
}

Trace RunIag(const Problem& problem, const Partition& partition, const DelayModel& model,
             double eta, const StopCriterion& stop, std::uint64_t seed, const Vector& x0) {
  const Index m = partition.machines();
  DrawStreams streams(seed, m);
  IagState state = InitIag(problem, m, StartPoint(problem, x0));
  return Drive(problem, stop, static_cast<std::uint64_t>(problem.n), 1, state.x,
               [&] { return IagStep(state, problem, partition, model, eta, streams); });
}

Trace RunAsyncSgd(const Problem& problem, const Partition& partition, const DelayModel& model,
                  double eta, const StopCriterion& stop, std::uint64_t seed, const Vector& x0) {
  const Index m = partition.machines();
  DrawStreams streams(seed, m);
  SgdState state = InitSgd(problem, m, StartPoint(problem, x0));
  return Drive(problem, stop, static_cast<std::uint64_t>(problem.n), 1, state.x,
               [&] { return AsyncSgdStep(state, problem, partition, model, eta, streams); });
}

Trace RunMinibatchSaga(const Problem& problem, DataMode mode, const Partition& partition,
                       Index m, double eta, const StopCriterion& stop, std::uint64_t seed,
                       const Vector& x0) {
  DrawStreams streams(seed, m);
  MinibatchState state = InitMinibatch(problem, StartPoint(problem, x0));
  return Drive(problem, stop, MinibatchEpoch(problem, m), static_cast<std::uint64_t>(m), state.x,
               [&] {
                 MinibatchSagaStep(state, problem, mode, partition, m, eta, streams);
                 return Index{-1};
               });
}

Trace RunMinibatchSgd(const Problem& problem, DataMode mode, const Partition& partition,
                      Index m, double eta, const StopCriterion& stop, std::uint64_t seed,
                      const Vector& x0) {
  DrawStreams streams(seed, m);
  Vector x = StartPoint(problem, x0);
  return Drive(problem, stop, MinibatchEpoch(problem, m), static_cast<std::uint64_t>(m), x, [&] {
    MinibatchSgdStep(x, problem, mode, partition, m, eta, streams);
    return Index{-1};
  });
}

}  // namespace adsaga
