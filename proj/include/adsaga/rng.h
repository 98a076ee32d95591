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

// Seeded random streams.
//
// Every random quantity in the workbench comes from a std::mt19937_64 whose
// state is derived from (root seed, stream id) through std::seed_seq. Stream
// ids are fixed constants so that a run can be replayed exactly, and so that a
// networked worker can regenerate the same function draws the simulator uses.
// Distributions are the libstdc++ implementations of std::normal_distribution,
// std::uniform_int_distribution and std::exponential_distribution; bit-exact
// replay across standard libraries is not promised.

#ifndef ADSAGA_RNG_H_
#define ADSAGA_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

#include "adsaga/types.h"

namespace adsaga {

using Rng = std::mt19937_64;

namespace stream {
inline constexpr std::uint64_t kProblem = 0;
inline constexpr std::uint64_t kPartition = 1;
inline constexpr std::uint64_t kMachine = 2;
inline constexpr std::uint64_t kInit = 3;
// Function draws of machine j use stream kFunctionBase + j.
inline constexpr std::uint64_t kFunctionBase = 1000;
}  // namespace stream

Rng MakeStream(std::uint64_t root_seed, std::uint64_t stream_id);

// Uniform integer in [0, count).
Index UniformIndex(Rng& rng, Index count);

// Uniform double in [0, 1).
double UniformUnit(Rng& rng);

// The full set of streams one simulated run consumes: machine selection,
// per-machine function selection and the initial i_j draws.
struct DrawStreams {
  DrawStreams(std::uint64_t root_seed, Index machines);

  Rng machine;
  Rng init;
  std::vector<Rng> function;
};

}  // namespace adsaga

#endif  // ADSAGA_RNG_H_
