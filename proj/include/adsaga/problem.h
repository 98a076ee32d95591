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

// Finite-sum least-squares problems.
//
// Component i is f_i(x) = 1/2 |A_i x - b_i|^2 where A_i is a block of
// `rows_per_component` consecutive data rows (one row unless the problem was
// produced by Block()). The objective is f = (1/n) sum_i f_i, so for unblocked
// problems f(x) = |Ax - b|^2 / (2n) and
//   L   = max_i lambda_max(A_i^T A_i)   (= max_i |a_i|^2 for single rows)
//   L_f = lambda_max(A^T A) / n
//   mu  = lambda_min(A^T A) / n
//   sigma_sq = (1/n) sum_i |grad f_i(x*)|^2.

#ifndef ADSAGA_PROBLEM_H_
#define ADSAGA_PROBLEM_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "adsaga/types.h"

namespace adsaga {

struct Problem {
  Index n = 0;  // number of components
  Index d = 0;
  Index rows_per_component = 1;
  RowMatrix rows;  // (n * rows_per_component) x d
  Vector targets;  // n * rows_per_component
  Vector x_star;

  double L = 0.0;
  double L_f = 0.0;
  double mu = 0.0;
  double sigma_sq = 0.0;

  // Generation parameters, kept for serialization.
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Random equal-size assignment of n components to m machines.
struct Partition {
  std::vector<std::vector<Index>> sets;  // S_j
  std::vector<Index> owner;              // j(i)
  std::vector<Index> slot;               // position of i inside S_{j(i)}

  Index machines() const { return static_cast<Index>(sets.size()); }
  Index set_size() const { return sets.empty() ? 0 : static_cast<Index>(sets[0].size()); }
  Index components() const { return static_cast<Index>(owner.size()); }
};

// Rows i.i.d. N(0, I/d), ground truth x ~ N(0, I), b = Ax + z with
// z ~ N(0, sigma^2). Throws std::invalid_argument on bad sizes and
// std::runtime_error when the Gram matrix is numerically singular.
Problem GenerateLeastSquares(Index n, Index d, double sigma, std::uint64_t seed);

// Recomputes x_star, L, L_f, mu and sigma_sq from rows/targets.
void ComputeConstants(Problem& problem);

// out = grad f_i(x).
void GradComponent(const Problem& problem, Index i, const Vector& x,
                   Eigen::Ref<Vector> out);
Vector GradComponent(const Problem& problem, Index i, const Vector& x);

Vector GradFull(const Problem& problem, const Vector& x);

double Objective(const Problem& problem, const Vector& x);
double ComponentValue(const Problem& problem, Index i, const Vector& x);

// f(x) - f(x*).
double ObjectiveGap(const Problem& problem, const Vector& x);

inline double DistSq(const Problem& problem, const Vector& x) {
  return (x - problem.x_star).squaredNorm();
}

// Rejects m that does not divide n.
Partition MakePartition(Index n, Index m, std::uint64_t seed);

// Groups b consecutive components into one. Rejects b that does not divide n.
Problem Block(const Problem& problem, Index b);

// Binary problem file: "AVRP", u32 version, u64 n, u64 d, f64 sigma, u64 seed,
// then rows (row-major), targets, x_star, and L, L_f, mu, sigma_sq. All
// little-endian. Only unblocked problems can be saved.
void SaveProblem(const Problem& problem, const std::filesystem::path& path);
Problem LoadProblem(const std::filesystem::path& path);
void WriteProblem(const Problem& problem, std::ostream& out);
Problem ReadProblem(std::istream& in);

// JSON sidecar with n, d, L, L_f, mu, sigma_sq.
std::string ProblemMetadataJson(const Problem& problem);

}  // namespace adsaga

#endif  // ADSAGA_PROBLEM_H_
