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

#include "adsaga/problem.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "Eigen/Cholesky"
#include "Eigen/Eigenvalues"
#include "adsaga/rng.h"
#include "json.hpp"

namespace adsaga {
namespace {

constexpr std::array<char, 4> kMagic = {'A', 'V', 'R', 'P'};
constexpr std::uint32_t kVersion = 1;

// Residual a_r^T x - b_r of a single data row. Generation and every gradient
// go through this so that zero-noise instances have exactly zero residuals.
inline double RowResidual(const Problem& p, Index row, const Vector& x) {
  return p.rows.row(row).dot(x.transpose()) - p.targets[row];
}

void PutU64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> buf;
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(buf.data(), buf.size());
}

void PutU32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> buf;
  for (int k = 0; k < 4; ++k) buf[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(buf.data(), buf.size());
}

void PutF64(std::ostream& out, double v) { PutU64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t GetU64(std::istream& in) {
  std::array<unsigned char, 8> buf;
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw std::runtime_error("problem file truncated");
  }
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return v;
}

std::uint32_t GetU32(std::istream& in) {
  std::array<unsigned char, 4> buf;
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw std::runtime_error("problem file truncated");
  }
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(buf[k]) << (8 * k);
  return v;
}

double GetF64(std::istream& in) { return std::bit_cast<double>(GetU64(in)); }

}  // namespace

Problem GenerateLeastSquares(Index n, Index d, double sigma, std::uint64_t seed) {
  if (d < 1 || n < d) {
    throw std::invalid_argument("GenerateLeastSquares: need n >= d >= 1");
  }
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("GenerateLeastSquares: sigma must be >= 0");
  }
  Problem p;
  p.n = n;
  p.d = d;
  p.sigma = sigma;
  p.seed = seed;

  Rng rng = MakeStream(seed, stream::kProblem);
  std::normal_distribution<double> row_dist(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  std::normal_distribution<double> unit(0.0, 1.0);

  p.rows.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) p.rows(i, k) = row_dist(rng);
  }
  Vector truth(d);
  for (Index k = 0; k < d; ++k) truth[k] = unit(rng);
  p.targets.setZero(n);
  for (Index i = 0; i < n; ++i) p.targets[i] = RowResidual(p, i, truth);  // a_i^T x
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Index i = 0; i < n; ++i) p.targets[i] += noise(rng);
  }

  ComputeConstants(p);
  if (sigma == 0.0) {
    // The system is consistent and the Gram matrix is nonsingular, so the
    // ground truth is the unique minimizer and every residual is exactly 0.
    p.x_star = truth;
    p.sigma_sq = 0.0;
  }
  return p;
}

void ComputeConstants(Problem& p) {
  const Index total_rows = p.rows.rows();
  const double n = static_cast<double>(p.n);
  Eigen::MatrixXd gram = p.rows.transpose() * p.rows;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram / n, Eigen::EigenvaluesOnly);
  p.L_f = eig.eigenvalues().maxCoeff();
  p.mu = eig.eigenvalues().minCoeff();
  if (!(p.mu > 1e-12 * p.L_f)) {
    throw std::runtime_error("degenerate instance: Gram matrix is numerically singular; reseed");
  }

  Vector rhs = p.rows.transpose() * p.targets;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  Vector x = llt.solve(rhs);
  // One step of iterative refinement on the normal equations.
  x += llt.solve(rhs - gram * x);
  p.x_star = x;

  p.L = 0.0;
  if (p.rows_per_component == 1) {
    for (Index i = 0; i < total_rows; ++i) p.L = std::max(p.L, p.rows.row(i).squaredNorm());
  } else {
    const Index b = p.rows_per_component;
    for (Index i = 0; i < p.n; ++i) {
      Eigen::MatrixXd block = p.rows.middleRows(i * b, b);
      Eigen::MatrixXd small = block * block.transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> be(small, Eigen::EigenvaluesOnly);
      p.L = std::max(p.L, be.eigenvalues().maxCoeff());
    }
  }

  double acc = 0.0;
  Vector g(p.d);
  for (Index i = 0; i < p.n; ++i) {
    GradComponent(p, i, p.x_star, g);
    acc += g.squaredNorm();
  }
  p.sigma_sq = acc / n;
}

void GradComponent(const Problem& p, Index i, const Vector& x, Eigen::Ref<Vector> out) {
  const Index b = p.rows_per_component;
  if (b == 1) {
    out.noalias() = RowResidual(p, i, x) * p.rows.row(i).transpose();
    return;
  }
  out.setZero();
  for (Index r = i * b; r < (i + 1) * b; ++r) {
    out.noalias() += RowResidual(p, r, x) * p.rows.row(r).transpose();
  }
}

Vector GradComponent(const Problem& p, Index i, const Vector& x) {
  Vector g(p.d);
  GradComponent(p, i, x, g);
  return g;
}

Vector GradFull(const Problem& p, const Vector& x) {
  Vector sum = Vector::Zero(p.d);
  Vector g(p.d);
  for (Index i = 0; i < p.n; ++i) {
    GradComponent(p, i, x, g);
    sum += g;
  }
  return sum / static_cast<double>(p.n);
}

double ComponentValue(const Problem& p, Index i, const Vector& x) {
  const Index b = p.rows_per_component;
  double acc = 0.0;
  for (Index r = i * b; r < (i + 1) * b; ++r) {
    const double res = RowResidual(p, r, x);
    acc += res * res;
  }
  return 0.5 * acc;
}

double Objective(const Problem& p, const Vector& x) {
  double acc = 0.0;
  for (Index i = 0; i < p.n; ++i) acc += ComponentValue(p, i, x);
  return acc / static_cast<double>(p.n);
}

double ObjectiveGap(const Problem& p, const Vector& x) {
  return Objective(p, x) - Objective(p, p.x_star);
}

Partition MakePartition(Index n, Index m, std::uint64_t seed) {
  if (m < 1 || n < 1 || n % m != 0) {
    throw std::invalid_argument("MakePartition: m must divide n (block the data first)");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng = MakeStream(seed, stream::kPartition);
  // Fisher-Yates with the portable UniformIndex draw.
  for (Index k = n - 1; k > 0; --k) {
    std::swap(perm[k], perm[UniformIndex(rng, k + 1)]);
  }
  const Index size = n / m;
  Partition part;
  part.sets.resize(static_cast<std::size_t>(m));
  part.owner.resize(static_cast<std::size_t>(n));
  part.slot.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < m; ++j) {
    auto& set = part.sets[j];
    set.assign(perm.begin() + j * size, perm.begin() + (j + 1) * size);
    std::sort(set.begin(), set.end());
    for (Index s = 0; s < size; ++s) {
      part.owner[set[s]] = j;
      part.slot[set[s]] = s;
    }
  }
  return part;
}

Problem Block(const Problem& p, Index b) {
  if (b < 1 || p.n % b != 0) {
    throw std::invalid_argument("Block: block size must divide n");
  }
  if (b == 1) return p;
  Problem out = p;
  out.n = p.n / b;
  out.rows_per_component = p.rows_per_component * b;
  const Vector x_star = p.x_star;
  ComputeConstants(out);
  // The minimizer does not depend on blocking; keep the original solve.
  out.x_star = x_star;
  double acc = 0.0;
  Vector g(out.d);
  for (Index i = 0; i < out.n; ++i) {
    GradComponent(out, i, out.x_star, g);
    acc += g.squaredNorm();
  }
  out.sigma_sq = acc / static_cast<double>(out.n);
  return out;
}

void WriteProblem(const Problem& p, std::ostream& out) {
  if (p.rows_per_component != 1) {
    throw std::invalid_argument("WriteProblem: blocked problems are not serializable");
  }
  out.write(kMagic.data(), kMagic.size());
  PutU32(out, kVersion);
  PutU64(out, static_cast<std::uint64_t>(p.n));
  PutU64(out, static_cast<std::uint64_t>(p.d));
  PutF64(out, p.sigma);
  PutU64(out, p.seed);
  for (Index i = 0; i < p.n; ++i) {
    for (Index k = 0; k < p.d; ++k) PutF64(out, p.rows(i, k));
  }
  for (Index i = 0; i < p.n; ++i) PutF64(out, p.targets[i]);
  for (Index k = 0; k < p.d; ++k) PutF64(out, p.x_star[k]);
  PutF64(out, p.L);
  PutF64(out, p.L_f);
  PutF64(out, p.mu);
  PutF64(out, p.sigma_sq);
}

Problem ReadProblem(std::istream& in) {
  std::array<char, 4> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("not a problem file (bad magic)");
  }
  const std::uint32_t version = GetU32(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported problem file version " + std::to_string(version));
  }
  Problem p;
  p.n = static_cast<Index>(GetU64(in));
  p.d = static_cast<Index>(GetU64(in));
  if (p.n < 1 || p.d < 1 || p.n > (Index{1} << 32) || p.d > (Index{1} << 24)) {
    throw std::runtime_error("problem file has implausible dimensions");
  }
  p.sigma = GetF64(in);
  p.seed = GetU64(in);
  p.rows.resize(p.n, p.d);
  for (Index i = 0; i < p.n; ++i) {
    for (Index k = 0; k < p.d; ++k) p.rows(i, k) = GetF64(in);
  }
  p.targets.resize(p.n);
  for (Index i = 0; i < p.n; ++i) p.targets[i] = GetF64(in);
  p.x_star.resize(p.d);
  for (Index k = 0; k < p.d; ++k) p.x_star[k] = GetF64(in);
  p.L = GetF64(in);
  p.L_f = GetF64(in);
  p.mu = GetF64(in);
  p.sigma_sq = GetF64(in);
  return p;
}

void SaveProblem(const Problem& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  WriteProblem(p, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Problem LoadProblem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ReadProblem(in);
}

std::string ProblemMetadataJson(const Problem& p) {
  nlohmann::ordered_json j;
  j["n"] = p.n;
  j["d"] = p.d;
  j["L"] = p.L;
  j["L_f"] = p.L_f;
  j["mu"] = p.mu;
  j["sigma_sq"] = p.sigma_sq;
  return j.dump(2);
}

}  // namespace adsaga
