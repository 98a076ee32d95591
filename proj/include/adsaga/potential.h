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

// Lyapunov potential for the logical ADSAGA iteration and exact one-step
// expectations.
//
// With y = x - x*, w = eta (sum_j u_j + m alpha_bar), weights q_j = p_min/p_j
// and the "star" quantities alpha*_i = alpha_i - grad f_i(x*),
// beta*_j = beta_j - grad f_{i_j}(x*), g*_j = g_j - grad f_{i_j}(x*):
//
//   phi1 = c1 (f(x) - f(x*))
//   phi2 = |y|^2 - 2 y.w + 2 |w|^2          ([[1,-1],[-1,2]] quadratic form)
//   phi3 = eta^2 c3 sum_j q_j |g*_j|^2
//   phi4 = eta^2 c4 (2 sum_i q_{j(i)} |alpha*_i|^2 - sum_j q_j |beta*_j|^2)
//   phi5 = eta^2 c5 sum_j |u_j|^2
//
// The expectation of the next potential is computed exactly by applying the
// step for every (j, i in S_j) with weight p_j / |S_j|.

#ifndef ADSAGA_POTENTIAL_H_
#define ADSAGA_POTENTIAL_H_

#include <vector>

#include "adsaga/adsaga.h"
#include "adsaga/delay_model.h"
#include "adsaga/problem.h"
#include "adsaga/types.h"

namespace adsaga {

struct PotentialConstants {
  double eta = 0.0;
  double c1 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
  double r = 0.0;
  double gamma = 0.0;
};

PotentialConstants ComputePotentialConstants(const Problem& problem, Index m,
                                             const DelayModel& model, double eta);

struct PotentialSnapshot {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
  double phi4 = 0.0;
  double phi5 = 0.0;
  double phi = 0.0;
  Vector y;  // x - x*
  Vector w;  // eta (U1 + m alpha_bar)
};

struct ExpectedStep {
  Vector expected_x_next;
  Vector expected_delta;     // E[Delta], 2d entries: (x part, w part)
  Vector closed_form_delta;  // -p_min eta (U1 + m abar ; U1 + m abar - (m/n) grad_sum)
  double expected_phi_next = 0.0;
  double delta_residual = 0.0;  // max |expected_delta - closed_form_delta|
  // Residual of the alternative statement
  //   E[U'1 + m abar'] = p_min (1 - 1/n)(U1 + m abar) + m p_min grad f(x),
  // reported for documentation only.
  double alternative_form_residual = 0.0;
};

struct ContractionReport {
  double phi = 0.0;
  double lhs = 0.0;  // E[phi(k+1)]
  double rhs = 0.0;  // (1 - gamma) phi(k)
  double gamma = 0.0;
  bool pass = false;
};

inline constexpr Index kEnumerationGuard = 200;

class PotentialEvaluator {
 public:
  // The referenced problem, partition and model must outlive the evaluator.
  PotentialEvaluator(const Problem& problem, const Partition& partition, const DelayModel& model,
                     double eta);

  const PotentialConstants& constants() const { return constants_; }
  const std::vector<Vector>& optimal_gradients() const { return grad_star_; }

  PotentialSnapshot Evaluate(const AdsagaState& state) const;

  // Exact expectation over (j, i). Throws std::invalid_argument when
  // n > kEnumerationGuard.
  ExpectedStep EnumerateExpectedStep(const AdsagaState& state) const;

  // Requires eta <= TheoreticalEta (throws otherwise).
  ContractionReport CheckContraction(const AdsagaState& state) const;

  // E[phi(0)] over the initial i_j draws, in closed form, for any rates.
  double ExpectedInitialPotential(const Vector& x0) const;

 private:
  const Problem& problem_;
  const Partition& partition_;
  const DelayModel& model_;
  PotentialConstants constants_;
  std::vector<Vector> grad_star_;
};

// (4 m eta + 2/mu)(f(x0) - f(x*)) + 2 eta m n sigma_sq / L.
// Throws std::invalid_argument if eta > 1/(2 r L).
double InitialPotentialBound(const Problem& problem, Index m, const DelayModel& model, double eta,
                             const Vector& x0);

}  // namespace adsaga

#endif  // ADSAGA_POTENTIAL_H_
