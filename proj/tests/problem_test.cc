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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "Eigen/Dense"
#include "adsaga/problem.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "test_support.h"

namespace adsaga {
namespace {

using testing::ManualProblem;
using testing::MaxAbs;
using testing::RandomVector;

TEST(GenerateTest, DeskSizedInstance) {
  const Problem p = GenerateLeastSquares(120, 60, 1.0, 7);
  EXPECT_EQ(p.n, 120);
  EXPECT_EQ(p.d, 60);
  EXPECT_EQ(p.rows.rows(), 120);
  EXPECT_EQ(p.rows.cols(), 60);
  EXPECT_LE(p.mu, p.L_f);
  EXPECT_LE(p.L_f, p.L);
  EXPECT_GT(p.sigma_sq, 0.0);
  const Vector g = GradFull(p, p.x_star);
  EXPECT_LE(g.norm(), 1e-8 * (1.0 + p.x_star.norm()));
}

TEST(GenerateTest, DeterministicPerSeed) {
  const Problem a = GenerateLeastSquares(30, 5, 0.5, 3);
  const Problem b = GenerateLeastSquares(30, 5, 0.5, 3);
  const Problem c = GenerateLeastSquares(30, 5, 0.5, 4);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_NE(a.rows, c.rows);
}

TEST(GenerateTest, NoiselessInstanceIsInterpolated) {
  const Problem p = GenerateLeastSquares(10, 3, 0.0, 11);
  EXPECT_EQ(p.sigma_sq, 0.0);
  EXPECT_EQ(Objective(p, p.x_star), 0.0);
  EXPECT_EQ(ObjectiveGap(p, p.x_star), 0.0);
}

TEST(GenerateTest, MinimizerMatchesQrSolve) {
  const Problem p = GenerateLeastSquares(8, 4, 1.0, 5);
  // Independent route: Householder QR on A, never forming the Gram matrix.
  const Eigen::MatrixXd a = p.rows;
  const Vector x = a.colPivHouseholderQr().solve(p.targets);
  EXPECT_LE((x - p.x_star).norm(), 1e-10 * x.norm());
}

TEST(GenerateTest, ConstantsMatchDefinitions) {
  const Problem p = GenerateLeastSquares(40, 6, 1.0, 2);
  double l = 0.0;
  for (Index i = 0; i < p.n; ++i) l = std::max(l, p.rows.row(i).squaredNorm());
  EXPECT_DOUBLE_EQ(p.L, l);
  // Power iteration for the top eigenvalue of A^T A / n.
  const Eigen::MatrixXd gram = p.rows.transpose() * p.rows / static_cast<double>(p.n);
  Vector v = Vector::Ones(p.d);
  for (int k = 0; k < 2000; ++k) v = (gram * v).normalized();
  EXPECT_NEAR(v.dot(gram * v), p.L_f, 1e-9 * p.L_f);
  // Smallest eigenvalue via the inverse.
  const Eigen::MatrixXd inv = gram.inverse();
  Vector w = Vector::Ones(p.d);
  for (int k = 0; k < 2000; ++k) w = (inv * w).normalized();
  EXPECT_NEAR(1.0 / w.dot(inv * w), p.mu, 1e-8 * p.mu);
  double s = 0.0;
  for (Index i = 0; i < p.n; ++i) {
    const double r = p.rows.row(i).dot(p.x_star) - p.targets[i];
    s += r * r * p.rows.row(i).squaredNorm();
  }
  EXPECT_NEAR(p.sigma_sq, s / static_cast<double>(p.n), 1e-12 * s);
}

TEST(GenerateTest, RejectsBadSizes) {
  EXPECT_THROW(GenerateLeastSquares(3, 4, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(GenerateLeastSquares(4, 0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(GenerateLeastSquares(4, 2, -1.0, 1), std::invalid_argument);
}

TEST(GenerateTest, RejectsSingularGram) {
  RowMatrix rows(3, 2);
  rows << 1, 2, 2, 4, -1, -2;
  EXPECT_THROW(ManualProblem(rows, Vector::Ones(3)), std::runtime_error);
}

TEST(GradientTest, UnitVectorCase) {
  RowMatrix rows = RowMatrix::Identity(3, 3);
  const Problem p = ManualProblem(rows, Vector::Zero(3));
  const Vector e1 = Vector::Unit(3, 0);
  EXPECT_EQ(GradComponent(p, 0, e1), e1);
}

TEST(GradientTest, AverageVanishesAtOptimum) {
  const Problem p = GenerateLeastSquares(50, 10, 1.0, 9);
  Vector sum = Vector::Zero(p.d);
  for (Index i = 0; i < p.n; ++i) sum += GradComponent(p, i, p.x_star);
  EXPECT_LE(MaxAbs(sum / static_cast<double>(p.n)), 1e-8);
}

TEST(GradientTest, MatchesCentralDifferences) {
  const Problem p = GenerateLeastSquares(20, 5, 1.0, 4);
  std::mt19937_64 rng(1);
  for (Index i = 0; i < p.n; ++i) {
    const Vector x = RandomVector(rng, p.d);
    const Vector g = GradComponent(p, i, x);
    Vector fd(p.d);
    const double h = 1e-5;
    for (Index k = 0; k < p.d; ++k) {
      Vector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      fd[k] = (ComponentValue(p, i, xp) - ComponentValue(p, i, xm)) / (2 * h);
    }
    EXPECT_LE((fd - g).norm(), 1e-5 * std::max(1.0, g.norm())) << "component " << i;
  }
}

TEST(GradientTest, FullGradientOfSingleComponent) {
  RowMatrix rows(1, 1);
  rows << 2.0;
  Vector b(1);
  b << 1.0;
  const Problem p = ManualProblem(rows, b);
  Vector x(1);
  x << 3.0;
  EXPECT_EQ(GradFull(p, x), GradComponent(p, 0, x));
}

TEST(GradientTest, FullGradientIsOrderIndependent) {
  const Problem p = GenerateLeastSquares(60, 7, 1.0, 8);
  std::mt19937_64 rng(3);
  const Vector x = RandomVector(rng, p.d);
  std::vector<Index> order(static_cast<std::size_t>(p.n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  Vector sum = Vector::Zero(p.d);
  for (Index i : order) sum += GradComponent(p, i, x);
  EXPECT_LE(MaxAbs(sum / static_cast<double>(p.n) - GradFull(p, x)), 1e-10);
}

TEST(ObjectiveTest, GapBracketedByCurvature) {
  const Problem p = GenerateLeastSquares(30, 6, 1.0, 12);
  EXPECT_NEAR(ObjectiveGap(p, p.x_star), 0.0, 1e-10);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const Vector x = p.x_star + RandomVector(rng, p.d);
    const double dist = DistSq(p, x);
    const double gap = ObjectiveGap(p, x);
    EXPECT_GE(gap, 0.5 * p.mu * dist * (1 - 1e-9));
    EXPECT_LE(gap, 0.5 * p.L_f * dist * (1 + 1e-9));
  }
}

TEST(ObjectiveTest, StrongConvexityAndCocoercivity) {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Problem p = GenerateLeastSquares(24, 8, 1.0, seed);
    for (int t = 0; t < 100; ++t) {
      const Vector x = p.x_star + RandomVector(rng, p.d);
      const Vector y = x - p.x_star;
      const double inner = y.dot(GradFull(p, x));
      double lhs = 0.0;
      for (Index i = 0; i < p.n; ++i) {
        lhs += (GradComponent(p, i, x) - GradComponent(p, i, p.x_star)).squaredNorm();
      }
      lhs /= static_cast<double>(p.n);
      EXPECT_LE(lhs, p.L * inner * (1 + 1e-9));
      EXPECT_LE(p.mu * y.squaredNorm(), inner * (1 + 1e-9));
    }
  }
}

TEST(PartitionTest, SmallCases) {
  const Partition part = MakePartition(6, 3, 1);
  ASSERT_EQ(part.machines(), 3);
  std::set<Index> seen;
  for (const auto& s : part.sets) {
    EXPECT_EQ(s.size(), 2u);
    for (Index i : s) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen, (std::set<Index>{0, 1, 2, 3, 4, 5}));
  for (Index i = 0; i < 6; ++i) EXPECT_EQ(part.sets[part.owner[i]][part.slot[i]], i);

  const Partition singles = MakePartition(4, 4, 2);
  for (const auto& s : singles.sets) EXPECT_EQ(s.size(), 1u);
}

TEST(PartitionTest, DeterministicAndRejectsUneven) {
  EXPECT_EQ(MakePartition(120, 10, 5).sets, MakePartition(120, 10, 5).sets);
  EXPECT_NE(MakePartition(120, 10, 5).sets, MakePartition(120, 10, 6).sets);
  EXPECT_THROW(MakePartition(10, 3, 1), std::invalid_argument);
}

TEST(BlockTest, IdentityBlock) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  const Problem q = Block(p, 1);
  std::mt19937_64 rng(2);
  const Vector x = RandomVector(rng, p.d);
  for (Index i = 0; i < p.n; ++i) {
    EXPECT_LE(MaxAbs(GradComponent(p, i, x) - GradComponent(q, i, x)), 1e-12);
  }
}

TEST(BlockTest, SingleBlockIsScaledObjective) {
  const Problem p = GenerateLeastSquares(12, 3, 1.0, 1);
  const Problem q = Block(p, 12);
  ASSERT_EQ(q.n, 1);
  std::mt19937_64 rng(2);
  const Vector x = RandomVector(rng, p.d);
  EXPECT_LE(MaxAbs(GradComponent(q, 0, x) - 12.0 * GradFull(p, x)), 1e-10);
  EXPECT_NEAR(ComponentValue(q, 0, x), 12.0 * Objective(p, x), 1e-10 * Objective(p, x) * 12);
}

TEST(BlockTest, BlockedFullGradient) {
  const Problem p = GenerateLeastSquares(2000, 20, 1.0, 3);
  const Problem q = Block(p, 200);
  ASSERT_EQ(q.n, 10);
  EXPECT_EQ(q.x_star, p.x_star);
  std::mt19937_64 rng(4);
  const Vector x = RandomVector(rng, p.d);
  // Each blocked component sums 200 originals, so the blocked average is 200x.
  const Vector blocked = GradFull(q, x) / 200.0;
  EXPECT_LE(MaxAbs(blocked - GradFull(p, x)), 1e-10);
  // Blocked L is the largest block spectral norm, at most the sum of row norms.
  EXPECT_GE(q.L, p.L);
  EXPECT_THROW(Block(p, 3), std::invalid_argument);
}

TEST(SerializationTest, RoundTrip) {
  const Problem p = GenerateLeastSquares(15, 4, 0.7, 19);
  std::stringstream buf;
  WriteProblem(p, buf);
  const Problem q = ReadProblem(buf);
  EXPECT_EQ(q.n, p.n);
  EXPECT_EQ(q.d, p.d);
  EXPECT_EQ(q.rows, p.rows);
  EXPECT_EQ(q.targets, p.targets);
  EXPECT_EQ(q.x_star, p.x_star);
  EXPECT_EQ(q.L, p.L);
  EXPECT_EQ(q.L_f, p.L_f);
  EXPECT_EQ(q.mu, p.mu);
  EXPECT_EQ(q.sigma_sq, p.sigma_sq);
  EXPECT_EQ(q.sigma, p.sigma);
  EXPECT_EQ(q.seed, p.seed);
}

TEST(SerializationTest, HeaderLayout) {
  const Problem p = GenerateLeastSquares(5, 2, 1.0, 1);
  std::stringstream buf;
  WriteProblem(p, buf);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 4), "AVRP");
  // header 4+4+8+8+8+8, rows 5*2, targets 5, x_star 2, four constants.
  EXPECT_EQ(bytes.size(), 40u + 8u * (10 + 5 + 2 + 4));
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 5u);  // n, little-endian
}

TEST(SerializationTest, RejectsGarbage) {
  std::stringstream bad("NOPE0000000000000000000000000000000000000000");
  EXPECT_THROW(ReadProblem(bad), std::runtime_error);
  const Problem p = GenerateLeastSquares(5, 2, 1.0, 1);
  std::stringstream buf;
  WriteProblem(p, buf);
  std::stringstream truncated(buf.str().substr(0, 60));
  EXPECT_THROW(ReadProblem(truncated), std::runtime_error);
  std::stringstream out;
  EXPECT_THROW(WriteProblem(Block(GenerateLeastSquares(4, 2, 1.0, 1), 2), out),
               std::invalid_argument);
}

TEST(SerializationTest, MetadataSidecar) {
  const Problem p = GenerateLeastSquares(6, 2, 1.0, 1);
  const auto j = nlohmann::json::parse(ProblemMetadataJson(p));
  EXPECT_EQ(j.at("n"), 6);
  EXPECT_EQ(j.at("d"), 2);
  EXPECT_EQ(j.at("L").get<double>(), p.L);
  EXPECT_EQ(j.at("L_f").get<double>(), p.L_f);
  EXPECT_EQ(j.at("mu").get<double>(), p.mu);
  EXPECT_EQ(j.at("sigma_sq").get<double>(), p.sigma_sq);
}

}  // namespace
}  // namespace adsaga
