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

#include "adsaga/rng.h"

namespace adsaga {

Rng MakeStream(std::uint64_t root_seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed),
                    static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return Rng(seq);
}

Index UniformIndex(Rng& rng, Index count) {
  std::uniform_int_distribution<Index> dist(0, count - 1);
  return dist(rng);
}

double UniformUnit(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

DrawStreams::DrawStreams(std::uint64_t root_seed, Index machines)
    : machine(MakeStream(root_seed, stream::kMachine)),
      init(MakeStream(root_seed, stream::kInit)) {
  function.reserve(static_cast<std::size_t>(machines));
  for (Index j = 0; j < machines; ++j) {
    function.push_back(
        MakeStream(root_seed, stream::kFunctionBase + static_cast<std::uint64_t>(j)));
  }
}

}  // namespace adsaga
