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

#include "adsaga/delay_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace adsaga {

DelayModel::DelayModel(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw std::invalid_argument("DelayModel: need at least one machine");
  for (double v : p_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("DelayModel: probabilities must be positive");
    }
  }
  const double total = std::accumulate(p_.begin(), p_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("DelayModel: probabilities must sum to 1");
  }
  p_min_ = *std::min_element(p_.begin(), p_.end());
  p_max_ = *std::max_element(p_.begin(), p_.end());
  cumulative_.resize(p_.size());
  std::partial_sum(p_.begin(), p_.end(), cumulative_.begin());
}

DelayModel DelayModel::Uniform(Index m) {
  if (m < 1) throw std::invalid_argument("DelayModel::Uniform: m must be >= 1");
  return DelayModel(std::vector<double>(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m)));
}

DelayModel DelayModel::FromRates(std::span<const double> rates) {
  if (rates.empty()) throw std::invalid_argument("DelayModel::FromRates: empty rate vector");
  double total = 0.0;
  for (double r : rates) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("DelayModel::FromRates: rates must be positive and finite");
    }
    total += r;
  }
  std::vector<double> p(rates.size());
  for (std::size_t j = 0; j < rates.size(); ++j) p[j] = rates[j] / total;
  // Equal rates must give exactly 1/m so that p_min == p_max.
  if (std::all_of(rates.begin(), rates.end(), [&](double r) { return r == rates[0]; })) {
    return Uniform(static_cast<Index>(rates.size()));
  }
  return DelayModel(std::move(p));
}

DelayModel DelayModel::EstimateRates(std::span<const std::uint64_t> counts) {
  std::vector<double> rates(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) {
      throw std::invalid_argument("DelayModel::EstimateRates: machine " + std::to_string(j) +
                                  " was never observed");
    }
    rates[j] = static_cast<double>(counts[j]);
  }
  return FromRates(rates);
}

Index DelayModel::Sample(Rng& rng) const {
  const double u = UniformUnit(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return machines() - 1;  // u within rounding of 1
  return static_cast<Index>(it - cumulative_.begin());
}

EventSchedule ContinuousSchedule(std::span<const double> rates, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("ContinuousSchedule: horizon must be > 0");
  EventSchedule events;
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (!(rates[j] > 0.0)) throw std::invalid_argument("ContinuousSchedule: rates must be > 0");
    std::exponential_distribution<double> work(rates[j]);
    double t = work(rng);
    while (t <= horizon) {
      events.push_back({t, static_cast<Index>(j)});
      t += work(rng);
    }
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.time < b.time; });
  return events;
}

}  // namespace adsaga
