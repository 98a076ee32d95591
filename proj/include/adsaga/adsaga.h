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

// Asynchronous distributed SAGA, logical view.
//
// One logical iteration serves machine j ~ P and function i ~ Uniform(S_j).
// With ratio = p_min / p_j and h_old the machine's pending update:
//
//   1. alpha[i_j] <- g_j
//   2. x          <- x - eta * ratio * (u_j + alpha_bar)
//   3. alpha_bar  <- alpha_bar + h_old / n
//   4. u_j        <- u_j - (m / n) h_old
//   5. g_j <- grad f_i(x_entry), beta_j <- alpha[i], h_j <- g_j - beta_j
//   6. u_j        <- u_j (1 - ratio) + ratio * h_j
//   7. i_j <- i, x_j <- x_entry
//
// where x_entry is x at the start of the iteration. Steps 4 and 6 combine to
//   u_j' = u_j (1 - ratio) + ratio h_j' - (m / n)(1 - ratio) h_j,
// which is the update the convergence analysis is carried out for. Note that
// the worker's gradient is taken at the iterate the server held *before* the
// step, because the server replies with x before it applies the update.

#ifndef ADSAGA_ADSAGA_H_
#define ADSAGA_ADSAGA_H_

#include <cstdint>
#include <vector>

#include "adsaga/delay_model.h"
#include "adsaga/problem.h"
#include "adsaga/rng.h"
#include "adsaga/trace.h"
#include "adsaga/types.h"

namespace adsaga {

struct ServerState {
  Vector x;
  Vector alpha_bar;
  std::vector<Vector> u;  // u_j, one per machine
  std::uint64_t iteration = 0;
};

struct WorkerState {
  Vector x_local;  // x_j
  Vector h;
  Vector g;
  Vector beta;
  Index last_function = 0;   // i_j
  std::vector<Vector> alpha;  // alpha_i for i in S_j, indexed by slot
};

struct AdsagaState {
  ServerState server;
  std::vector<WorkerState> workers;

  // alpha_i, looked up through the partition.
  const Vector& alpha(const Partition& part, Index i) const {
    return workers[part.owner[i]].alpha[part.slot[i]];
  }
  Vector& alpha(const Partition& part, Index i) {
    return workers[part.owner[i]].alpha[part.slot[i]];
  }
};

struct StepDraw {
  Index machine = 0;
  Index function = 0;
};

// Entry values of one step, captured for the combined-update check.
struct StepCapture {
  Index machine = 0;
  Vector u_before;
  Vector h_before;
};

// Everything zero, x = x_j = x0, i_j ~ Uniform(S_j) from `init_rng`.
AdsagaState Init(const Problem& problem, const Partition& partition, const Vector& x0,
                 Rng& init_rng);

double StepSizeLocal(double eta, const DelayModel& model, Index j);

// i ~ Uniform(set); shared by the simulator and the networked worker so both
// consume a function stream identically.
inline Index DrawFunction(Rng& rng, const std::vector<Index>& set) {
  return set[static_cast<std::size_t>(UniformIndex(rng, static_cast<Index>(set.size())))];
}

// One logical iteration with an explicit (machine, function) pair.
void ApplyLogicalStep(AdsagaState& state, const Problem& problem, const Partition& partition,
                      const DelayModel& model, double eta, Index machine, Index function,
                      StepCapture* capture = nullptr);

// Draws j from streams.machine and i from streams.function[j], then applies
// the step.
StepDraw LogicalStep(AdsagaState& state, const Problem& problem, const Partition& partition,
                     const DelayModel& model, double eta, DrawStreams& streams,
                     StepCapture* capture = nullptr);

// r = 8 (76 + 168 (p_max / p_min)^2 m / n) / 3.
double TheoreticalR(Index m, Index n, const DelayModel& model);

// eta = 1 / (2 r L + 2 sqrt(r m L_f L)).
double TheoreticalEta(const Problem& problem, Index m, const DelayModel& model);

// Ceiling of m p_min (4n + 2rL/mu + 2 sqrt(r) sqrt(m L_f L)/mu)
//   * log(((1 + 1/(2 m mu eta)) gap0 + n sigma_sq / (2L)) / eps)
// at the theoretical eta. Throws std::invalid_argument if eps is not below the
// log argument's numerator.
std::uint64_t TheoreticalIterations(const Problem& problem, Index m, const DelayModel& model,
                                    double eps, double initial_gap);
std::uint64_t TheoreticalIterations(const Problem& problem, Index m, const DelayModel& model,
                                    double eps, const Vector& x0);

// Runs logical iterations from x0 (zero if empty) with every random choice
// taken from DrawStreams(seed, m).
Trace Run(const Problem& problem, const Partition& partition, const DelayModel& model,
          double eta, const StopCriterion& stop, std::uint64_t seed, const Vector& x0 = Vector());

// Invariant residuals. Each is zero (up to rounding) on every reachable state.
struct InvariantResiduals {
  double alpha_bar = 0.0;   // |alpha_bar - mean alpha| / scale
  double alpha_beta = 0.0;  // max_j |alpha_{i_j} - beta_j|
  double h_identity = 0.0;  // max_j |h_j - (g_j - beta_j)|
  double uniform_u = 0.0;   // max_j |u_j - h_j| (uniform rates only)
};

InvariantResiduals CheckInvariants(const AdsagaState& state, const Problem& problem,
                                   const Partition& partition, const DelayModel& model);

// Relative residual of the combined u update for the machine served by the
// step that produced `after` from the captured entry values.
double CombinedUpdateResidual(const AdsagaState& after, const StepCapture& capture,
                              const DelayModel& model, Index n);

}  // namespace adsaga

#endif  // ADSAGA_ADSAGA_H_
