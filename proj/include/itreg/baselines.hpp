#pragma once

// Reference methods for the l1 experiment: a warm-started forward-backward
// sweep over a Tikhonov grid, and Douglas-Rachford on ||x||_1 + i_{Ax=b}.

#include "itreg/core.hpp"
#include "itreg/linops.hpp"
#include "itreg/problem.hpp"
#include "itreg/prox.hpp"
#include "itreg/solvers.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <limits>
#include <vector>

namespace itreg {

namespace detail {
inline const DenseMap& require_dense(const LinearMap& a, const char* who) {
  const auto* d = dynamic_cast<const DenseMap*>(&a);
  if (!d) throw UnsupportedOperation(std::string(who) + ": needs a dense operator");
  return *d;
}

inline Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double z) {
    const double s = std::abs(z) - t;
    return s > 0.0 ? std::copysign(s, z) : 0.0;
  });
}
}  // namespace detail

/// Penalties (1 - (l-1)/5) * 10^(1-d) * scale for l = 1..5, d = 1..6, largest first.
inline std::vector<double> tikhonov_grid(double scale) {
  std::vector<double> g;
  g.reserve(30);
  for (int d = 1; d <= 6; ++d) {
    for (int l = 1; l <= 5; ++l) g.push_back((1.0 - (l - 1) / 5.0) * std::pow(10.0, 1 - d) * scale);
  }
  std::sort(g.begin(), g.end(), std::greater<>());
  return g;
}

struct TikhonovOptions {
  int max_iters_per_lambda = 300;
  double step_tol = 1e-3;
};

struct TikhonovPath {
  std::vector<double> lambdas;
  std::vector<Vector> solutions;
  /// Forward-backward iterations spent on each penalty.
  std::vector<int> iterations;
  /// Wall time per penalty.
  std::vector<double> seconds;
  std::vector<double> recon_errors;
  /// Index of the smallest recon error, or -1 without ground truth.
  int best = -1;

  int total_iterations() const {
    int n = 0;
    for (int k : iterations) n += k;
    return n;
  }
};

/// Solves lambda ||x||_1 + ||Ax - b_delta||^2 / 2 along the grid by
/// forward-backward with step 1/||A||^2, each penalty warm-started from
/// the previous solution.
inline TikhonovPath fb_tikhonov_path(const ProblemSpec& prob, const TikhonovOptions& opts = {}) {
  if (prob.reg.kind != RegularizerKind::l1) throw std::invalid_argument("tikhonov path: l1 only");
  const LinearMap& a = prob.op();
  const double lip = std::pow(op_norm_est(a).value, 2);
  if (!(lip > 0.0)) throw DegenerateOperator("tikhonov path: zero operator");
  const double step = 1.0 / lip;

  TikhonovPath path;
  path.lambdas = tikhonov_grid(a.apply_adjoint(prob.b_delta).lpNorm<Eigen::Infinity>());
  Vector x = Vector::Zero(a.cols());
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : path.lambdas) {
    const auto t0 = std::chrono::steady_clock::now();
    int k = 0;
    while (k < opts.max_iters_per_lambda) {
      ++k;
      const Vector next =
          detail::soft_threshold(x - step * a.apply_adjoint(Vector(a.apply(x) - prob.b_delta)), step * lambda);
      const double moved = (next - x).norm();
      x = next;
      if (moved <= opts.step_tol) break;
    }
    path.seconds.push_back(detail::seconds_since(t0));
    path.iterations.push_back(k);
    path.solutions.push_back(x);
    if (prob.ground_truth) {
      const double err = (x - *prob.ground_truth).norm();
      path.recon_errors.push_back(err);
      if (err < best) {
        best = err;
        path.best = static_cast<int>(path.solutions.size() - 1);
      }
    }
  }
  return path;
}

/// One row per penalty, `iter` counting cumulative forward-backward steps.
inline RunRecord to_run_record(const TikhonovPath& path, const ProblemSpec& prob) {
  RunRecord rec;
  rec.method = "tik";
  rec.feasibility_exact = prob.b_exact.has_value();
  const Vector& b_ref = prob.feasibility_reference();
  int iters = 0;
  double elapsed = 0.0;
  for (std::size_t i = 0; i < path.solutions.size(); ++i) {
    iters += path.iterations[i];
    elapsed += path.seconds[i];
    MetricRow row;
    row.iter = iters;
    row.time_s = elapsed;
    row.feasibility = (prob.op().apply(path.solutions[i]) - b_ref).norm();
    if (i < path.recon_errors.size()) row.recon_error = path.recon_errors[i];
    rec.rows.push_back(row);
  }
  rec.early_stop.rule = "oracle";
  if (path.best >= 0) {
    const auto b = static_cast<std::size_t>(path.best);
    rec.early_stop.stop_iter = rec.rows[b].iter;
    rec.early_stop.value = path.recon_errors[b];
    rec.best_x = path.solutions[b];
  } else if (!path.solutions.empty()) {
    rec.early_stop.stop_iter = rec.rows.back().iter;
    rec.best_x = path.solutions.back();
  }
  if (!path.solutions.empty()) rec.last_x = path.solutions.back();
  return rec;
}

/// Orthogonal projection onto {x : Ax = b}: x - A^T w with A A^T w = Ax - b
/// solved by conjugate gradients. When b is outside ran(A), w is the
/// minimum-residual solution CG converges to.
class AffineProjector {
 public:
  AffineProjector(const DenseMap& a, Vector b, double tol = 1e-10)
      : a_(a.matrix()), b_(std::move(b)), gram_(a_ * a_.transpose()) {
    require_size(b_.size(), a_.rows(), "AffineProjector");
    cg_.setTolerance(tol);
    cg_.setMaxIterations(static_cast<Index>(10 * std::max<Index>(a_.rows(), 10)));
    cg_.compute(gram_);
  }

  Vector operator()(const Vector& x) const {
    require_size(x.size(), a_.cols(), "AffineProjector");
    const Vector rhs = a_ * x - b_;
    const Vector w = cg_.solve(rhs);
    if (cg_.info() != Eigen::Success) ++failures_;
    return x - a_.transpose() * w;
  }

  /// Number of solves that did not reach the tolerance.
  int failures() const { return failures_; }

 private:
  Matrix a_;
  Vector b_;
  Matrix gram_;
  Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> cg_;
  mutable int failures_ = 0;
};

/// Douglas-Rachford with unit step for min ||x||_1 s.t. Ax = b_delta:
///   x = prox_{||.||_1}(y),  z = P(2x - y),  y += z - x.
/// Metrics are taken at the feasible point z.
inline RunRecord douglas_rachford(const ProblemSpec& prob, const StopRule& stop,
                                  const RunOptions& opts = {}, double cg_tol = 1e-10) {
  if (prob.reg.kind != RegularizerKind::l1) throw std::invalid_argument("douglas-rachford: l1 only");
  const DenseMap& a = detail::require_dense(prob.op(), "douglas-rachford");
  const AffineProjector project(a, prob.b_delta, cg_tol);

  RunRecord rec;
  rec.method = "dr";
  rec.feasibility_exact = prob.b_exact.has_value();
  const Vector& b_ref = prob.feasibility_reference();
  const bool oracle = stop.kind == StopKind::oracle_recon_min;
  if (oracle && !prob.ground_truth) throw std::invalid_argument("oracle stop needs ground truth");
  const int budget = stop.budget(prob.delta);
  const int stride = std::max(1, opts.metric_stride);

  Vector y = Vector::Zero(a.cols());
  Vector z = y;
  Vector sum = Vector::Zero(a.cols());
  double elapsed = 0.0;
  double best = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  int k = 0;
  while (k < budget) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    const Vector x = detail::soft_threshold(y, 1.0);
    z = project(Vector(2.0 * x - y));
    y += z - x;
    elapsed += detail::seconds_since(t0);
    sum += z;
    if (opts.keep_iterates) rec.iterates.push_back(z);
    if (!z.allFinite() || z.norm() > opts.divergence_factor) {
      rec.status = RunStatus::diverged;
      rec.rows.push_back({k, elapsed});
      break;
    }
    if (k % stride != 0 && k != budget) continue;

    MetricRow row;
    row.iter = k;
    row.time_s = elapsed;
    row.feasibility = (a.apply(Vector(sum / k)) - b_ref).norm();
    if (prob.ground_truth) row.recon_error = (z - *prob.ground_truth).norm();
    rec.rows.push_back(row);
    if (opts.observer) opts.observer(k, z);
    if (oracle) {
      if (row.recon_error < best) {
        best = row.recon_error;
        best_iter = k;
        rec.best_x = z;
      } else if (k - best_iter >= stop.patience) {
        break;
      }
    }
  }
  if (project.failures() > 0 && rec.status == RunStatus::ok) rec.status = RunStatus::solver_failure;
  if (k > 0) rec.averaged_x = sum / k;
  rec.last_x = z;
  rec.early_stop.rule = to_string(stop.kind);
  if (oracle && best_iter > 0) {
    rec.early_stop.stop_iter = best_iter;
    rec.early_stop.value = best;
  } else {
    rec.early_stop.stop_iter = k;
    rec.early_stop.value = rec.rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : rec.rows.back().recon_error;
    rec.best_x = z;
  }
  return rec;
}

}  // namespace itreg
