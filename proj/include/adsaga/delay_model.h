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

// Stochastic delay model: at every step machine j delivers its update with
// probability p_j, independently of the past. Equivalently each machine works
// for i.i.d. Exponential(lambda_j) times and p_j = lambda_j / sum(lambda).

#ifndef ADSAGA_DELAY_MODEL_H_
#define ADSAGA_DELAY_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "adsaga/rng.h"
#include "adsaga/types.h"

namespace adsaga {

class DelayModel {
 public:
  static DelayModel Uniform(Index m);
  // p_j = lambda_j / sum(lambda). Rejects non-positive rates.
  static DelayModel FromRates(std::span<const double> rates);
  // p_j = counts_j / sum(counts). Rejects zero counts.
  static DelayModel EstimateRates(std::span<const std::uint64_t> counts);

  Index machines() const { return static_cast<Index>(p_.size()); }
  const std::vector<double>& p() const { return p_; }
  double p(Index j) const { return p_[j]; }
  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }
  // p_min / p_j, the factor in eta_j = eta * p_min / p_j.
  double ratio(Index j) const { return p_min_ / p_[j]; }
  bool is_uniform() const { return p_min_ == p_max_; }

  // Inverse CDF: the first j whose cumulative probability exceeds a uniform
  // draw in [0, 1).
  Index Sample(Rng& rng) const;

 private:
  explicit DelayModel(std::vector<double> p);

  std::vector<double> p_;
  std::vector<double> cumulative_;
  double p_min_ = 0.0;
  double p_max_ = 0.0;
};

inline Index SampleMachine(const DelayModel& model, Rng& rng) { return model.Sample(rng); }

struct Event {
  double time = 0.0;
  Index machine = 0;
};
using EventSchedule = std::vector<Event>;

// Merged, time-sorted completion events of m machines with i.i.d.
// Exponential(lambda_j) work times, over (0, horizon].
EventSchedule ContinuousSchedule(std::span<const double> rates, double horizon, Rng& rng);

}  // namespace adsaga

#endif  // ADSAGA_DELAY_MODEL_H_
