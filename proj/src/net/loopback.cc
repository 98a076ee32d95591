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


#include "adsaga/net/loopback.h"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "adsaga/adsaga.h"
#include "adsaga/rng.h"

namespace adsaga::net {

LoopbackResult RunLoopback(const Problem& problem, const Partition& partition,
                           const LoopbackConfig& config, const Vector& x0) {
  const Index m = partition.machines();
  if (config.ps.m != m) throw std::invalid_argument("RunLoopback: ps.m must match the partition");
  if (!config.delays_s.empty() && static_cast<Index>(config.delays_s.size()) != m) {
    throw std::invalid_argument("RunLoopback: delays_s must have m entries");
  }
  PsConfig ps_config = config.ps;
  ps_config.host = "127.0.0.1";
  ps_config.port = 0;
  ParameterServer server(problem, ps_config);

  LoopbackResult result;
  result.workers.resize(static_cast<std::size_t>(m));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    WorkerConfig wc;
    wc.port = server.port();
    wc.id = j;
    wc.seed = config.seed;
    wc.algorithm = config.ps.algorithm;
    wc.delay_s = config.delays_s.empty() ? 0.0 : config.delays_s[j];
    wc.record = config.record_workers;
    threads.emplace_back([&problem, &partition, &result, wc, j] {
      result.workers[j] = RunWorker(problem, partition.sets[j], wc);
    });
  }
  result.ps = server.Run(x0);
  for (std::thread& t : threads) t.join();

  result.ok = !result.ps.aborted;
  result.diagnostic = result.ps.diagnostic;
  for (const WorkerResult& w : result.workers) {
    if (w.exit_status != 0) {
      result.ok = false;
      if (!result.diagnostic.empty()) result.diagnostic += "; ";
      result.diagnostic += w.diagnostic;
    }
  }
  return result;
}

std::vector<Vector> ReplayAdsaga(const Problem& problem, const Partition& partition,
                                 const DelayModel& model, double eta,
                                 const std::vector<Index>& arrivals,
                                 const std::vector<std::vector<Index>>& draws,
                                 const Vector& x0) {
  const Index m = partition.machines();
  if (static_cast<Index>(draws.size()) != m) {
    throw std::invalid_argument("ReplayAdsaga: one draw list per machine expected");
  }
  // The initial i_j draws only seed alpha slots that start at zero, so any
  // stream works here.
  Rng init = MakeStream(0, stream::kInit);
  AdsagaState state =
      Init(problem, partition, x0.size() == 0 ? Vector::Zero(problem.d) : x0, init);
  std::vector<std::size_t> next(static_cast<std::size_t>(m), 0);
  std::vector<Vector> trajectory;
  trajectory.reserve(arrivals.size());
  for (Index j : arrivals) {
    // The final PARAM of a machine may have been answered by STOP, in which
    // case the worker drew nothing; the x update does not depend on it.
    const auto& list = draws[j];
    const Index i = next[j] < list.size() ? list[next[j]] : partition.sets[j].front();
    ++next[j];
    ApplyLogicalStep(state, problem, partition, model, eta, j, i);
    trajectory.push_back(state.server.x);
  }
  return trajectory;
}

WallclockReport MeasureWallclock(const Problem& problem, const WallclockSweep& sweep) {
  if (sweep.etas.size() != sweep.algorithms.size()) {
    throw std::invalid_argument("MeasureWallclock: one eta per algorithm expected");
  }
  WallclockReport report;
  for (Index m : sweep.ms) {
    const Partition partition = MakePartition(problem.n, m, sweep.partition_seed);
    for (std::size_t a = 0; a < sweep.algorithms.size(); ++a) {
      WallclockCell cell;
      cell.m = m;
      cell.algorithm = sweep.algorithms[a];
      for (std::uint64_t seed : sweep.seeds) {
        LoopbackConfig config;
        config.ps.algorithm = cell.algorithm;
        config.ps.vanilla = sweep.vanilla;
        config.ps.m = m;
        config.ps.eta = sweep.etas[a];
        config.ps.metric = sweep.metric;
        config.ps.threshold = sweep.threshold;
        config.ps.max_updates = sweep.max_updates;
        config.ps.timeout_s = sweep.timeout_s;
        config.seed = seed;
        if (sweep.base_delay_s > 0.0) {
          config.delays_s.assign(static_cast<std::size_t>(m), sweep.base_delay_s);
          config.delays_s[0] = sweep.base_delay_s * sweep.straggler_factor;
        }
        SeedOutcome outcome;
        outcome.seed = seed;
        try {
          const LoopbackResult run = RunLoopback(problem, partition, config);
          if (!run.ok) cell.errors.push_back("seed " + std::to_string(seed) + ": " + run.diagnostic);
          outcome.converged = run.ok && run.ps.converged;
          outcome.diverged = run.ps.diverged;
          outcome.iterations = run.ps.iterations_to_threshold.value_or(run.ps.iterations);
          outcome.final_metric = run.ps.final_metric;
          if (outcome.converged) cell.wallclock_s.push_back(*run.ps.time_to_threshold_s);
          cell.update_counts.push_back(run.ps.update_counts);
        } catch (const std::exception& e) {
          cell.errors.push_back("seed " + std::to_string(seed) + ": " + e.what());
          outcome.final_metric = std::nan("");
        }
        cell.outcomes.push_back(outcome);
      }
      PlotRow row;
      row.m = m;
      row.algorithm = RuntimeAlgorithmName(cell.algorithm);
      if (sweep.vanilla && cell.algorithm == RuntimeAlgorithm::kAdsaga) row.algorithm = "vanilla_adsaga";
      row.aggregate = AggregateOutcomes(cell.outcomes);
      if (!cell.wallclock_s.empty()) {
        double sum = 0.0;
        for (double t : cell.wallclock_s) sum += t;
        const double k = static_cast<double>(cell.wallclock_s.size());
        const double mean = sum / k;
        double ss = 0.0;
        for (double t : cell.wallclock_s) ss += (t - mean) * (t - mean);
        row.mean_wallclock_s = mean;
        row.stderr_wallclock_s = k > 1 ? std::sqrt(ss / (k - 1) / k) : 0.0;
      }
      report.rows.push_back(row);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

}  // namespace adsaga::net
