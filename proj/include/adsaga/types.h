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

#ifndef ADSAGA_TYPES_H_
#define ADSAGA_TYPES_H_

#include <cstdint>

#include "Eigen/Core"

namespace adsaga {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;
// Row-major so that a_i (and the per-function alpha_i tables) are contiguous.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace adsaga

#endif  // ADSAGA_TYPES_H_
