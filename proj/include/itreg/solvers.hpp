#pragma once

// Primal-dual (PDA) and dual-primal (DPA) splittings with activation
// operators, stopping rules, and the per-iteration metric recorder.

#include "itreg/activators.hpp"
#include "itreg/bounds.hpp"
#include "itreg/core.hpp"
#include "itreg/linops.hpp"
#include "itreg/problem.hpp"
#include "itreg/rng.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace itreg {

enum class Scheme { primal_dual, dual_primal };

/// Iterate tuple. For PDA `act`/`act_bar` are the activated primal variable
/// p and its extrapolation; for DPA they are the activated dual q and its
/// extrapolation.
struct SaddleState {
  Vector x;
  Vector u;
  Vector act;
  Vector act_bar;
  int iter = 0;
};

/// p0 = p_bar0 = x0.
inline SaddleState pda_init(const Vector& x0, const Vector& u0) {
  return {x0, u0, x0, x0, 0};
}

/// q0 = q_bar0 = u0.
inline SaddleState dpa_init(const Vector& x0, const Vector& u0) {
  return {x0, u0, u0, u0, 0};
}

/// One PDA iteration:
///   u+ = u + Gamma (A p_bar - b_delta)
///   x+ = prox^Sigma_J (p - Sigma A* u+)
///   p+ = T x+
///   p_bar+ = p+ + x+ - p
inline SaddleState pda_step(const SaddleState& s, const ProblemSpec& prob, const DiagMetric& sigma,
                            const DiagMetric& gamma, const Activator& t,
                            std::span<const int> order = {}) {
  const LinearMap& a = prob.op();
  SaddleState n;
  n.iter = s.iter + 1;
  n.u = s.u + gamma.apply(Vector(a.apply(s.act_bar) - prob.b_delta));
  n.x = prob.reg.prox(Vector(s.act - sigma.apply(a.apply_adjoint(n.u))), sigma);
  n.act = apply_activator(t, n.x, a, prob.b_delta, order);
  n.act_bar = n.act + n.x - s.act;
  return n;
}

/// One DPA iteration:
///   x+ = prox^Sigma_J (x - Sigma A* q_bar)
///   u+ = q + Gamma (A x+ - b_delta)
///   q+ = T u+
///   q_bar+ = q+ + u+ - q
inline SaddleState dpa_step(const SaddleState& s, const ProblemSpec& prob, const DiagMetric& sigma,
                            const DiagMetric& gamma, const Activator& t,
                            std::span<const int> order = {}) {
  const LinearMap& a = prob.op();
  SaddleState n;
  n.iter = s.iter + 1;
  n.x = prob.reg.prox(Vector(s.x - sigma.apply(a.apply_adjoint(s.act_bar))), sigma);
  n.u = s.act + gamma.apply(Vector(a.apply(n.x) - prob.b_delta));
  n.act = apply_activator(t, n.u, a, prob.b_delta, order);
  n.act_bar = n.act + n.u - s.act;
  return n;
}

/// DPA start whose primal sequence coincides with the PDA started at
/// (p0 = p_bar0, u0) when both use T = Id: q0 = u0, and x0 chosen so that
/// the first primal iterates agree.
inline SaddleState dpa_start_matching(const SaddleState& pda0, const ProblemSpec& prob,
                                      const DiagMetric& sigma, const DiagMetric& gamma) {
  const LinearMap& a = prob.op();
  const Vector x0 =
      pda0.act - sigma.apply(a.apply_adjoint(gamma.apply(Vector(a.apply(pda0.act) - prob.b_delta))));
  return dpa_init(x0, pda0.u);
}

enum class StopKind { max_iter, oracle_recon_min, c_over_delta };

inline const char* to_string(StopKind k) {
  switch (k) {
    case StopKind::max_iter: return "max";
    case StopKind::oracle_recon_min: return "oracle";
    case StopKind::c_over_delta: return "c-over-delta";
  }
  return "?";
}

struct StopRule {
  StopKind kind = StopKind::max_iter;
  /// Iteration cap (the only budget for max_iter; a safety cap for oracle).
  int max_iters = 1000;
  /// Constant of N = ceil(c / delta).
  double c = 1.0;
  /// Oracle rule: stop after this many iterations without a new best.
  int patience = 50;

  static StopRule max_iter(int n) { return {StopKind::max_iter, n, 1.0, 0}; }
  static StopRule oracle(int cap, int patience = 50) {
    return {StopKind::oracle_recon_min, cap, 1.0, patience};
  }
  static StopRule c_over_delta(double c) { return {StopKind::c_over_delta, 0, c, 0}; }

  /// ceil(c / delta), at least 1.
  static int c_over_delta_iters(double c, double delta) {
    if (!(c > 0.0)) throw std::invalid_argument("c-over-delta: c must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("c-over-delta: needs delta > 0");
    const double n = std::ceil(c / delta);
    if (n > static_cast<double>(std::numeric_limits<int>::max())) {
      throw std::invalid_argument("c-over-delta: iteration count overflows");
    }
    return std::max(1, static_cast<int>(n));
  }

  int budget(double delta) const {
    return kind == StopKind::c_over_delta ? c_over_delta_iters(c, delta) : max_iters;
  }
};

struct MethodConfig {
  std::string name = "pd";
  Scheme scheme = Scheme::primal_dual;
  Activator activator;
  DiagMetric sigma;
  DiagMetric gamma;
  /// Starting points; zero when absent.
  std::optional<Vector> x0;
  std::optional<Vector> u0;
  /// Precomputed 1 - ||Gamma^{1/2} A Sigma^{1/2}||^2; estimated when absent.
  std::optional<double> alpha;
};

struct MetricRow {
  int iter = 0;
  double time_s = 0.0;
  double lagrangian_gap = std::numeric_limits<double>::quiet_NaN();
  double feasibility = std::numeric_limits<double>::quiet_NaN();
  double recon_error = std::numeric_limits<double>::quiet_NaN();
};

struct EarlyStop {
  std::string rule;
  int stop_iter = 0;
  double value = std::numeric_limits<double>::quiet_NaN();
};

enum class RunStatus { ok, diverged, solver_failure };

struct RunRecord {
  std::string method;
  std::vector<MetricRow> rows;
  EarlyStop early_stop;
  RunStatus status = RunStatus::ok;
  /// Feasibility column measured against the exact datum.
  bool feasibility_exact = false;

  double alpha = std::numeric_limits<double>::quiet_NaN();
  double error_constant = 0.0;
  /// V(z0 - z) for the reference saddle point, when one is known.
  double v0 = std::numeric_limits<double>::quiet_NaN();

  /// Running means (1/N) sum_{k=1}^N of x^k and u^k.
  Vector averaged_x;
  Vector averaged_u;
  Vector last_x;
  /// Iterate at early_stop.stop_iter.
  Vector best_x;
  /// x^1, ..., x^N when RunOptions::keep_iterates is set.
  std::vector<Vector> iterates;

  int iterations() const { return rows.empty() ? 0 : rows.back().iter; }

  const MetricRow* row_at(int iter) const {
    for (const auto& r : rows) {
      if (r.iter == iter) return &r;
    }
    return nullptr;
  }
};

struct RunOptions {
  /// Metrics are recorded every `metric_stride` iterations and at the last one.
  int metric_stride = 1;
  bool keep_iterates = false;
  /// Divergence guard: abort when ||x^k|| > factor * (1 + ||x^0||).
  double divergence_factor = 1e12;
  /// Called on every recorded iteration with the primal iterate.
  std::function<void(int, const Vector&)> observer;
};

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

/// Runs one splitting until the stop rule fires, recording metrics.
///
/// Deterministic given `seed` (which only drives the projection shuffles).
inline RunRecord run(const ProblemSpec& prob, const MethodConfig& method, const StopRule& stop,
                     std::uint64_t seed, const RunOptions& opts = {}) {
  const LinearMap& a = prob.op();
  require_size(method.sigma.size(), a.cols(), "run: Sigma");
  require_size(method.gamma.size(), a.rows(), "run: Gamma");
  require_size(prob.b_delta.size(), a.rows(), "run: data");
  if (method.activator.acts_on_dual() != (method.scheme == Scheme::dual_primal) &&
      method.activator.kind != ActivatorKind::identity) {
    throw std::invalid_argument("run: activator acts on the wrong space for this scheme");
  }

  RunRecord rec;
  rec.method = method.name;
  rec.alpha = method.alpha ? *method.alpha : check_step_condition(method.sigma, method.gamma, a);
  if (!(rec.alpha > 0.0)) {
    throw InvalidStep("run: step condition violated, alpha = " + std::to_string(rec.alpha));
  }
  rec.error_constant = error_constant(method.activator, a, method.sigma);
  rec.feasibility_exact = prob.b_exact.has_value();

  const Vector x0 = method.x0 ? *method.x0 : Vector::Zero(a.cols());
  const Vector u0 = method.u0 ? *method.u0 : Vector::Zero(a.rows());
  SaddleState s = method.scheme == Scheme::primal_dual ? pda_init(x0, u0) : dpa_init(x0, u0);
  if (prob.saddle) {
    rec.v0 = v_norm(Vector(x0 - prob.saddle->x), Vector(u0 - prob.saddle->u), method.sigma,
                    method.gamma);
  }

  const int budget = stop.budget(prob.delta);
  const bool oracle = stop.kind == StopKind::oracle_recon_min;
  if (oracle && !prob.ground_truth) throw std::invalid_argument("oracle stop needs ground truth");
  const Vector& b_ref = prob.feasibility_reference();
  const double blowup = opts.divergence_factor * (1.0 + x0.norm());
  const int stride = std::max(1, opts.metric_stride);

  Xoshiro256 shuffle_rng(seed, Stream::shuffle);
  std::vector<int> order;
  const bool reshuffle = method.activator.reshuffle && !method.activator.indices.empty();

  Vector sum_x = Vector::Zero(a.cols());
  Vector sum_u = Vector::Zero(a.rows());
  double elapsed = 0.0;
  double best = std::numeric_limits<double>::infinity();
  int best_iter = 0;

  for (int k = 1; k <= budget; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    if (reshuffle) order = random_permutation(static_cast<int>(method.activator.indices.size()), shuffle_rng);
    s = method.scheme == Scheme::primal_dual
            ? pda_step(s, prob, method.sigma, method.gamma, method.activator, order)
            : dpa_step(s, prob, method.sigma, method.gamma, method.activator, order);
    elapsed += detail::seconds_since(t0);

    sum_x += s.x;
    sum_u += s.u;
    if (opts.keep_iterates) rec.iterates.push_back(s.x);

    const double xn = s.x.norm();
    if (!std::isfinite(xn) || xn > blowup) {
      rec.status = RunStatus::diverged;
      rec.rows.push_back({k, elapsed});
      break;
    }

    if (k % stride != 0 && k != budget) continue;

    MetricRow row;
    row.iter = k;
    row.time_s = elapsed;
    const Vector x_avg = sum_x / k;
    const Vector u_avg = sum_u / k;
    if (prob.saddle && prob.b_exact) row.lagrangian_gap = lagrangian_gap(x_avg, u_avg, *prob.saddle, prob);
    row.feasibility = (a.apply(x_avg) - b_ref).norm();
    if (prob.ground_truth) {
      const Index m = prob.ground_truth->size();
      row.recon_error = (s.x.head(m) - *prob.ground_truth).norm();
    }
    rec.rows.push_back(row);
    if (opts.observer) opts.observer(k, s.x);

    if (oracle) {
      if (row.recon_error < best) {
        best = row.recon_error;
        best_iter = k;
        rec.best_x = s.x;
      } else if (k - best_iter >= stop.patience) {
        break;
      }
    }
  }

  const int n = s.iter;
  if (n > 0) {
    rec.averaged_x = sum_x / n;
    rec.averaged_u = sum_u / n;
  }
  rec.last_x = s.x;

  rec.early_stop.rule = to_string(stop.kind);
  if (oracle && best_iter > 0) {
    rec.early_stop.stop_iter = best_iter;
    rec.early_stop.value = best;
  } else {
    rec.early_stop.stop_iter = n;
    rec.early_stop.value = rec.rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : rec.rows.back().recon_error;
    rec.best_x = s.x;
  }
  return rec;
}

}  // namespace itreg
