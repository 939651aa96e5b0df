#pragma once

#include "itreg/core.hpp"
#include "itreg/linops.hpp"
#include "itreg/prox.hpp"

#include <optional>

namespace itreg {

/// A pair (x, u) with 0 in dJ(x) + A*u and Ax = b for the exact datum b.
struct SaddlePoint {
  Vector x;
  Vector u;
};

/// min J(x) s.t. Ax = b, observed through the noisy datum b_delta.
struct ProblemSpec {
  Regularizer reg;
  MapPtr a;
  Vector b_delta;
  /// ||b_delta - b||.
  double delta = 0.0;
  std::optional<Vector> b_exact;
  /// Ground truth for the leading ground_truth->size() coordinates of x.
  std::optional<Vector> ground_truth;
  /// Reference saddle point for the exact problem.
  std::optional<SaddlePoint> saddle;

  const LinearMap& op() const { return *a; }
  Index primal_dim() const { return a->cols(); }
  Index dual_dim() const { return a->rows(); }

  /// Datum used to measure feasibility: exact when known, noisy otherwise.
  const Vector& feasibility_reference() const { return b_exact ? *b_exact : b_delta; }
};

}  // namespace itreg
