#pragma once

// Optimality measures and the computable right-hand sides of the stability
// bounds for the two splittings.

#include "itreg/core.hpp"
#include "itreg/linops.hpp"
#include "itreg/problem.hpp"

#include <cmath>

namespace itreg {

/// L(x, u) = J(x) + <u, Ax - b> with the exact datum b.
inline double lagrangian(const ProblemSpec& prob, const Vector& x, const Vector& u) {
  if (!prob.b_exact) throw std::invalid_argument("lagrangian: exact datum required");
  return prob.reg.value(x) + u.dot(prob.op().apply(x) - *prob.b_exact);
}

/// L(X, u*) - L(x*, U) for averaged iterates (X, U) and a saddle point z = (x*, u*).
inline double lagrangian_gap(const Vector& x_avg, const Vector& u_avg, const SaddlePoint& z,
                             const ProblemSpec& prob) {
  return lagrangian(prob, x_avg, z.u) - lagrangian(prob, z.x, u_avg);
}

/// V(x, u) = ||x||^2_{Sigma^{-1}} / 2 + ||u||^2_{Gamma^{-1}} / 2.
inline double v_norm(const Vector& x, const Vector& u, const DiagMetric& sigma,
                     const DiagMetric& gamma) {
  return 0.5 * sigma.inv_weighted_sq_norm(x) + 0.5 * gamma.inv_weighted_sq_norm(u);
}

/// The three spectral norms of Gamma the bounds need.
struct GammaNorms {
  double sqrt_norm = 1.0;  // ||Gamma^{1/2}||
  double norm = 1.0;       // ||Gamma||
  double inv_norm = 1.0;   // ||Gamma^{-1}||

  static GammaNorms of(const DiagMetric& g) { return {g.sqrt_norm(), g.norm(), g.inverse_norm()}; }
};

struct GapBounds {
  double lagrangian = 0.0;
  /// Bound on ||A X_N - b||^2.
  double feasibility = 0.0;
};

/// Right-hand sides for the primal-dual splitting with primal activations.
inline GapBounds theorem_bound_pda(int n_iter, double delta, const GammaNorms& g, double alpha,
                                   double e, double v0) {
  if (!(alpha > 0.0)) throw InvalidStep("theorem_bound_pda: alpha must be positive");
  if (n_iter < 1) throw std::invalid_argument("theorem_bound_pda: N must be positive");
  const double n = n_iter;
  const double d2 = delta * delta;
  const double a3 = alpha * alpha * alpha;
  GapBounds b;
  b.lagrangian = v0 / n + 2.0 * n * g.sqrt_norm * g.sqrt_norm * d2 / alpha +
                 delta * g.sqrt_norm * std::sqrt(2.0 * v0 / alpha) +
                 delta * g.sqrt_norm * std::sqrt(n * e * d2 / alpha) + e * d2 / 2.0;
  b.feasibility = 16.0 * n * g.norm * g.inv_norm * d2 / (alpha * alpha) +
                  8.0 * delta * g.inv_norm * std::sqrt(2.0 * g.norm * v0 / a3) +
                  8.0 * d2 * g.inv_norm * std::sqrt(g.norm * e * n / a3) +
                  8.0 * g.inv_norm * v0 / (n * alpha) + 2.0 * d2 +
                  4.0 * g.inv_norm * e * d2 / alpha;
  return b;
}

inline GapBounds theorem_bound_pda(int n_iter, double delta, const DiagMetric& gamma,
                                   double alpha, double e, double v0) {
  return theorem_bound_pda(n_iter, delta, GammaNorms::of(gamma), alpha, e, v0);
}

/// Right-hand sides for the dual-primal splitting with dual activations.
inline GapBounds theorem_bound_dpa(int n_iter, double delta, const GammaNorms& g, double alpha,
                                   double v0) {
  if (!(alpha > 0.0)) throw InvalidStep("theorem_bound_dpa: alpha must be positive");
  if (n_iter < 1) throw std::invalid_argument("theorem_bound_dpa: N must be positive");
  const double n = n_iter;
  const double d2 = delta * delta;
  const double s2 = g.sqrt_norm * g.sqrt_norm;
  GapBounds b;
  b.lagrangian = v0 / n + 2.0 * s2 * n * d2 + g.sqrt_norm * delta * std::sqrt(2.0 * v0);
  b.feasibility = 8.0 * s2 * g.inv_norm * n * d2 / alpha +
                  4.0 * g.sqrt_norm * g.inv_norm * delta * std::sqrt(2.0 * v0) / alpha +
                  4.0 * g.inv_norm * v0 / (n * alpha) + 2.0 * d2;
  return b;
}

inline GapBounds theorem_bound_dpa(int n_iter, double delta, const DiagMetric& gamma,
                                   double alpha, double v0) {
  return theorem_bound_dpa(n_iter, delta, GammaNorms::of(gamma), alpha, v0);
}

}  // namespace itreg
