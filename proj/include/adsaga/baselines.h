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

// Reference algorithms under the same delay model and problem interface.
//
// The asynchronous baselines (ASAGA, IAG, async SGD) share one visit
// protocol: when machine j is selected it delivers the gradient of the
// function it drew on its previous visit, evaluated at its stale iterate x_j;
// the server replies with its current x (which becomes the new x_j) and then
// applies the update; finally the machine draws its next function. A machine
// that has not been visited yet has nothing to deliver.
//
// The minibatch methods are synchronous: one step draws a function per machine
// and applies a single aggregated update at the current x.

#ifndef ADSAGA_BASELINES_H_
#define ADSAGA_BASELINES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "adsaga/delay_model.h"
#include "adsaga/problem.h"
#include "adsaga/rng.h"
#include "adsaga/trace.h"
#include "adsaga/types.h"

namespace adsaga {

enum class DataMode { kShared, kDistributed };

struct StaleMachine {
  Vector x_local;
  Index pending = -1;  // function drawn on the last visit, -1 if none
  Index cursor = 0;    // IAG position inside S_j
};

struct AsagaState {
  Vector x;
  std::vector<Vector> alpha;  // n entries
  Vector alpha_bar;
  std::vector<StaleMachine> machines;
};

struct IagState {
  Vector x;
  std::vector<Vector> alpha;
  Vector alpha_sum;
  std::vector<StaleMachine> machines;
};

struct SgdState {
  Vector x;
  std::vector<StaleMachine> machines;
};

struct MinibatchState {
  Vector x;
  std::vector<Vector> alpha;
  Vector alpha_bar;
};

AsagaState InitAsaga(const Problem& problem, Index m, const Vector& x0);
IagState InitIag(const Problem& problem, Index m, const Vector& x0);
SgdState InitSgd(const Problem& problem, Index m, const Vector& x0);
MinibatchState InitMinibatch(const Problem& problem, const Vector& x0);

// U = grad f_i(x_j) - alpha_i + alpha_bar.
Vector AsagaDirection(const AsagaState& state, const Problem& problem, Index machine, Index i);
// (1/n)(grad f_i(x_j) + sum_{i' != i} alpha_{i'}).
Vector IagDirection(const IagState& state, const Problem& problem, Index machine, Index i);

// Explicit visits: machine j delivers its pending function, then takes
// `next_function` as its new pending draw.
void ApplyAsagaVisit(AsagaState& state, const Problem& problem, double eta, Index machine,
                     Index next_function);
void ApplyIagVisit(IagState& state, const Problem& problem, double eta, Index machine,
                   Index next_function);
void ApplySgdVisit(SgdState& state, const Problem& problem, double eta, Index machine,
                   Index next_function);

// Random visits. ASAGA draws from all of [n] (shared data); IAG walks S_j
// cyclically; SGD draws i ~ Uniform(S_j). Return the machine served.
Index AsagaStep(AsagaState& state, const Problem& problem, const DelayModel& model, double eta,
                DrawStreams& streams);
Index IagStep(IagState& state, const Problem& problem, const Partition& partition,
              const DelayModel& model, double eta, DrawStreams& streams);
Index AsyncSgdStep(SgdState& state, const Problem& problem, const Partition& partition,
                   const DelayModel& model, double eta, DrawStreams& streams);

// x <- x - eta * sum_k (grad f_{b_k}(x) - alpha_{b_k} + alpha_bar), then the
// alpha refresh in batch order (last writer wins on duplicates).
void ApplyMinibatchSaga(MinibatchState& state, const Problem& problem, double eta,
                        std::span<const Index> batch);
// x <- x - eta * sum_k grad f_{b_k}(x).
void ApplyMinibatchSgd(Vector& x, const Problem& problem, double eta,
                       std::span<const Index> batch);

// One function per machine: i_j ~ Uniform(S_j) (distributed) or
// i_j ~ Uniform([n]) (shared), each from streams.function[j].
std::vector<Index> DrawMinibatch(const Problem& problem, DataMode mode, const Partition& partition,
                                 Index m, DrawStreams& streams);

void MinibatchSagaStep(MinibatchState& state, const Problem& problem, DataMode mode,
                       const Partition& partition, Index m, double eta, DrawStreams& streams);
void MinibatchSgdStep(Vector& x, const Problem& problem, DataMode mode,
                      const Partition& partition, Index m, double eta, DrawStreams& streams);

// 1 / (2 m L_f + 3 L).
double MinibatchSagaEta(const Problem& problem, Index m);

// min(mu m / (4 m L_f + 12 L), m / (3n)).
double MinibatchSagaGamma(const Problem& problem, Index m);

// |x - x*|^2 + 4 n eta^2 mean_i |alpha_i - grad f_i(x*)|^2.
double MinibatchSagaPotential(const MinibatchState& state, const Problem& problem, double eta);

// Relative residuals of the alpha aggregates.
double AlphaMeanResidual(const std::vector<Vector>& alpha, const Vector& alpha_bar);
double AlphaSumResidual(const std::vector<Vector>& alpha, const Vector& alpha_sum);

// Full runs from x0 (zero if empty), streams from DrawStreams(seed, m).
Trace RunAsaga(const Problem& problem, Index m, const DelayModel& model, double eta,
               const StopCriterion& stop, std::uint64_t seed, const Vector& x0 = Vector());
Trace RunIag(const Problem& problem, const Partition& partition, const DelayModel& model,
             double eta, const StopCriterion& stop, std::uint64_t seed,
             const Vector& x0 = Vector());
Trace RunAsyncSgd(const Problem& problem, const Partition& partition, const DelayModel& model,
                  double eta, const StopCriterion& stop, std::uint64_t seed,
                  const Vector& x0 = Vector());
Trace RunMinibatchSaga(const Problem& problem, DataMode mode, const Partition& partition,
                       Index m, double eta, const StopCriterion& stop, std::uint64_t seed,
                       const Vector& x0 = Vector());
Trace RunMinibatchSgd(const Problem& problem, DataMode mode, const Partition& partition,
                      Index m, double eta, const StopCriterion& stop, std::uint64_t seed,
                      const Vector& x0 = Vector());

}  // namespace adsaga

#endif  // ADSAGA_BASELINES_H_
