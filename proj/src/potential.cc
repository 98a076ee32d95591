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

#include "adsaga/potential.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adsaga {
namespace {

Vector SumU(const AdsagaState& state) {
  Vector sum = Vector::Zero(state.server.x.size());
  for (const Vector& u : state.server.u) sum += u;
  return sum;
}

// eta (U1 + m alpha_bar).
Vector WeightedDirection(const AdsagaState& state, double eta, Index m) {
  return eta * (SumU(state) + static_cast<double>(m) * state.server.alpha_bar);
}

}  // namespace

PotentialConstants ComputePotentialConstants(const Problem& problem, Index m,
                                             const DelayModel& model, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("ComputePotentialConstants: eta must be > 0");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(problem.n);
  const double skew = model.p_max() / model.p_min();
  PotentialConstants c;
  c.eta = eta;
  c.c1 = 4.0 * md * eta;
  c.c5 = (4.0 / 3.0) * (4.0 * md * problem.L_f * eta + 4.0);
  c.c4 = (22.0 + 76.0 * (md / nd) * skew * skew) * c.c5;
  c.c3 = (64.0 + 168.0 * (md / nd) * skew * skew) * c.c5;
  c.r = TheoreticalR(m, problem.n, model);
  c.gamma = md * model.p_min() * std::min(1.0 / (4.0 * nd), problem.mu * eta);
  return c;
}

PotentialEvaluator::PotentialEvaluator(const Problem& problem, const Partition& partition,
                                       const DelayModel& model, double eta)
    : problem_(problem),
      partition_(partition),
      model_(model),
      constants_(ComputePotentialConstants(problem, partition.machines(), model, eta)) {
  grad_star_.reserve(static_cast<std::size_t>(problem.n));
  for (Index i = 0; i < problem.n; ++i) grad_star_.push_back(GradComponent(problem, i, problem.x_star));
}

PotentialSnapshot PotentialEvaluator::Evaluate(const AdsagaState& state) const {
  const PotentialConstants& c = constants_;
  const Index m = partition_.machines();
  const double eta2 = c.eta * c.eta;
  PotentialSnapshot s;
  s.y = state.server.x - problem_.x_star;
  s.w = WeightedDirection(state, c.eta, m);

  s.phi1 = c.c1 * ObjectiveGap(problem_, state.server.x);
  s.phi2 = s.y.squaredNorm() - 2.0 * s.y.dot(s.w) + 2.0 * s.w.squaredNorm();

  double g_sum = 0.0;
  double beta_sum = 0.0;
  double u_sum = 0.0;
  for (Index j = 0; j < m; ++j) {
    const WorkerState& w = state.workers[j];
    const double q = model_.ratio(j);
    const Vector& star = grad_star_[w.last_function];
    g_sum += q * (w.g - star).squaredNorm();
    beta_sum += q * (w.beta - star).squaredNorm();
    u_sum += state.server.u[j].squaredNorm();
  }
  double alpha_sum = 0.0;
  for (Index i = 0; i < problem_.n; ++i) {
    alpha_sum += model_.ratio(partition_.owner[i]) *
                 (state.alpha(partition_, i) - grad_star_[i]).squaredNorm();
  }
  s.phi3 = eta2 * c.c3 * g_sum;
  s.phi4 = eta2 * c.c4 * (2.0 * alpha_sum - beta_sum);
  s.phi5 = eta2 * c.c5 * u_sum;
  s.phi = s.phi1 + s.phi2 + s.phi3 + s.phi4 + s.phi5;
  return s;
}

ExpectedStep PotentialEvaluator::EnumerateExpectedStep(const AdsagaState& state) const {
  if (problem_.n > kEnumerationGuard) {
    throw std::invalid_argument("EnumerateExpectedStep: n exceeds the enumeration guard");
  }
  const Index m = partition_.machines();
  const Index d = problem_.d;
  const double eta = constants_.eta;
  const Vector w0 = WeightedDirection(state, eta, m);

  ExpectedStep out;
  out.expected_x_next = Vector::Zero(d);
  Vector expected_w = Vector::Zero(d);
  double expected_phi = 0.0;
  for (Index j = 0; j < m; ++j) {
    const auto& set = partition_.sets[j];
    const double weight = model_.p(j) / static_cast<double>(set.size());
    for (Index i : set) {
      AdsagaState next = state;
      ApplyLogicalStep(next, problem_, partition_, model_, eta, j, i);
      out.expected_x_next += weight * next.server.x;
      expected_w += weight * WeightedDirection(next, eta, m);
      expected_phi += weight * Evaluate(next).phi;
    }
  }
  out.expected_phi_next = expected_phi;

  out.expected_delta.resize(2 * d);
  out.expected_delta.head(d) = out.expected_x_next - state.server.x;
  out.expected_delta.tail(d) = expected_w - w0;

  Vector grad_sum = Vector::Zero(d);
  for (Index i = 0; i < problem_.n; ++i) grad_sum += GradComponent(problem_, i, state.server.x);
  const Vector direction = SumU(state) + static_cast<double>(m) * state.server.alpha_bar;
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(problem_.n);
  const double pmin = model_.p_min();
  out.closed_form_delta.resize(2 * d);
  out.closed_form_delta.head(d) = -pmin * eta * direction;
  out.closed_form_delta.tail(d) = -pmin * eta * (direction - (md / nd) * grad_sum);
  out.delta_residual =
      (out.expected_delta - out.closed_form_delta).lpNorm<Eigen::Infinity>();

  const Vector alternative =
      pmin * (1.0 - 1.0 / nd) * direction + md * pmin * (grad_sum / nd);
  out.alternative_form_residual =
      (expected_w / eta - alternative).lpNorm<Eigen::Infinity>();
  return out;
}

ContractionReport PotentialEvaluator::CheckContraction(const AdsagaState& state) const {
  const double eta_max = TheoreticalEta(problem_, partition_.machines(), model_);
  if (constants_.eta > eta_max * (1.0 + 1e-12)) {
    throw std::invalid_argument("CheckContraction: eta exceeds the theoretical step size");
  }
  ContractionReport report;
  report.phi = Evaluate(state).phi;
  report.lhs = EnumerateExpectedStep(state).expected_phi_next;
  report.gamma = constants_.gamma;
  report.rhs = (1.0 - constants_.gamma) * report.phi;
  // Relative slack plus an absolute floor for states at the optimum, where
  // both sides are pure roundoff.
  const double floor = 1e-20 * (1.0 + problem_.x_star.squaredNorm());
  report.pass = report.lhs <= report.rhs + 1e-9 * report.phi + floor;
  return report;
}

double PotentialEvaluator::ExpectedInitialPotential(const Vector& x0) const {
  const PotentialConstants& c = constants_;
  const Index m = partition_.machines();
  double drawn = 0.0;  // sum_j q_j E|grad f_{i_j}(x*)|^2
  for (Index j = 0; j < m; ++j) {
    double mean = 0.0;
    for (Index i : partition_.sets[j]) mean += grad_star_[i].squaredNorm();
    drawn += model_.ratio(j) * mean / static_cast<double>(partition_.sets[j].size());
  }
  double all = 0.0;  // sum_i q_{j(i)} |grad f_i(x*)|^2
  for (Index i = 0; i < problem_.n; ++i) {
    all += model_.ratio(partition_.owner[i]) * grad_star_[i].squaredNorm();
  }
  const double eta2 = c.eta * c.eta;
  return c.c1 * ObjectiveGap(problem_, x0) + (x0 - problem_.x_star).squaredNorm() +
         eta2 * (c.c3 * drawn + c.c4 * (2.0 * all - drawn));
}

double InitialPotentialBound(const Problem& problem, Index m, const DelayModel& model, double eta,
                             const Vector& x0) {
  const double r = TheoreticalR(m, problem.n, model);
  if (eta > 1.0 / (2.0 * r * problem.L)) {
    throw std::invalid_argument("InitialPotentialBound: requires eta <= 1/(2 r L)");
  }
  const double md = static_cast<double>(m);
  return (4.0 * md * eta + 2.0 / problem.mu) * ObjectiveGap(problem, x0) +
         2.0 * eta * md * static_cast<double>(problem.n) * problem.sigma_sq / problem.L;
}

}  // namespace adsaga
