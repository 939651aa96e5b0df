#pragma once

// Random sparse-recovery instances and dual certificates for them.

#include "itreg/core.hpp"
#include "itreg/linops.hpp"
#include "itreg/problem.hpp"
#include "itreg/rng.hpp"

#include <Eigen/Cholesky>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace itreg {

struct SparseInstanceConfig {
  Index rows = 400;
  Index cols = 600;
  Index sparsity = 60;
  /// Entries of u in b_delta = b + ||b|| u are uniform on [-noise_amp, noise_amp].
  double noise_amp = 0.2;
  std::uint64_t seed = 1;

  void validate() const {
    if (rows < 1 || cols < 1) throw DimensionError("sparse instance: dimensions must be positive");
    if (sparsity < 0 || sparsity > cols) throw DimensionError("sparse instance: sparsity out of range");
    if (!(noise_amp >= 0.0)) throw std::invalid_argument("sparse instance: negative noise amplitude");
  }
};

/// Gaussian matrix with unit columns (entries drawn in row-major order),
/// ground truth with `sparsity` random coordinates uniform on [0, 1].
inline ProblemSpec gen_sparse_instance(const SparseInstanceConfig& cfg) {
  cfg.validate();
  Xoshiro256 mrng(cfg.seed, Stream::matrix);
  Matrix a(cfg.rows, cfg.cols);
  for (Index i = 0; i < cfg.rows; ++i) {
    for (Index j = 0; j < cfg.cols; ++j) a(i, j) = mrng.normal();
  }
  for (Index j = 0; j < cfg.cols; ++j) {
    const double n = a.col(j).norm();
    if (n == 0.0) throw DegenerateOperator("sparse instance: zero column");
    a.col(j) /= n;
  }

  Xoshiro256 srng(cfg.seed, Stream::support);
  const auto perm = random_permutation(static_cast<int>(cfg.cols), srng);
  Vector x = Vector::Zero(cfg.cols);
  for (Index t = 0; t < cfg.sparsity; ++t) x[perm[static_cast<std::size_t>(t)]] = srng.uniform();

  const Vector b = a * x;
  Xoshiro256 nrng(cfg.seed, Stream::noise);
  Vector u(cfg.rows);
  for (Index i = 0; i < cfg.rows; ++i) u[i] = nrng.uniform(-cfg.noise_amp, cfg.noise_amp);
  Vector bd = b + b.norm() * u;

  ProblemSpec prob;
  prob.reg = Regularizer::l1();
  prob.a = std::make_shared<DenseMap>(std::move(a));
  prob.delta = (bd - b).norm();
  prob.b_delta = std::move(bd);
  prob.b_exact = b;
  prob.ground_truth = std::move(x);
  return prob;
}

/// Dual certificate for x in min ||x||_1 s.t. Ax = Ax: the least-norm u with
/// (A^T u)_S = -sign(x_S) on the support S. Returns nothing unless
/// |A^T u| <= 1 - margin off the support, i.e. unless (x, u) is a saddle point.
inline std::optional<SaddlePoint> l1_saddle_certificate(const Matrix& a, const Vector& x,
                                                        double margin = 1e-9) {
  require_size(x.size(), a.cols(), "l1_saddle_certificate");
  std::vector<Index> support;
  for (Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) support.push_back(j);
  }
  if (support.empty()) return SaddlePoint{x, Vector::Zero(a.rows())};
  const auto s = static_cast<Index>(support.size());
  if (s > a.rows()) return std::nullopt;

  Matrix as(a.rows(), s);
  Vector sign(s);
  for (Index t = 0; t < s; ++t) {
    as.col(t) = a.col(support[static_cast<std::size_t>(t)]);
    sign[t] = x[support[static_cast<std::size_t>(t)]] > 0.0 ? 1.0 : -1.0;
  }
  const Eigen::LDLT<Matrix> gram(as.transpose() * as);
  if (gram.info() != Eigen::Success || !gram.isPositive()) return std::nullopt;
  const Vector u = -as * gram.solve(sign);

  const Vector corr = a.transpose() * u;
  std::vector<bool> on(static_cast<std::size_t>(x.size()), false);
  for (Index j : support) on[static_cast<std::size_t>(j)] = true;
  for (Index j = 0; j < x.size(); ++j) {
    if (on[static_cast<std::size_t>(j)]) {
      const double want = x[j] > 0.0 ? -1.0 : 1.0;
      if (std::abs(corr[j] - want) > 1e-8) return std::nullopt;
    } else if (std::abs(corr[j]) > 1.0 - margin) {
      return std::nullopt;
    }
  }
  return SaddlePoint{x, u};
}

/// First instance at seeds cfg.seed, cfg.seed + 1, ... whose ground truth
/// admits a dual certificate; the saddle point is attached to the result.
inline ProblemSpec find_certified_instance(SparseInstanceConfig cfg, int max_tries = 1000) {
  for (int t = 0; t < max_tries; ++t, ++cfg.seed) {
    ProblemSpec prob = gen_sparse_instance(cfg);
    const auto& a = dynamic_cast<const DenseMap&>(prob.op()).matrix();
    if (auto z = l1_saddle_certificate(a, *prob.ground_truth)) {
      prob.saddle = std::move(*z);
      return prob;
    }
  }
  throw std::runtime_error("find_certified_instance: no certified instance found");
}

}  // namespace itreg
