#pragma once

#include "itreg/core.hpp"
#include "itreg/linops.hpp"

#include <cmath>
#include <limits>

namespace itreg {

/// Componentwise soft threshold sign(v_i) * max(|v_i| - sigma_i, 0), the
/// proximity operator of ||.||_1 in the metric Sigma^{-1}. Ties map to 0.
inline Vector prox_l1_diag(const Vector& v, const DiagMetric& sigma) {
  require_size(v.size(), sigma.size(), "prox_l1_diag");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double shrunk = std::abs(v[i]) - sigma[i];
    out[i] = shrunk > 0.0 ? std::copysign(shrunk, v[i]) : 0.0;
  }
  return out;
}

/// Block shrinkage (1 - sigma / max(sigma, ||v_i||)) v_i over consecutive 2-blocks.
inline Vector prox_group_l12(const Vector& v, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("prox_group_l12: sigma must be positive");
  if (v.size() % 2 != 0) throw DimensionError("prox_group_l12: odd length");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); i += 2) {
    const double n = std::hypot(v[i], v[i + 1]);
    const double f = 1.0 - sigma / std::max(sigma, n);
    out[i] = f * v[i];
    out[i + 1] = f * v[i + 1];
  }
  return out;
}

/// Same shrinkage with one step per 2-block. Both entries of a block must
/// carry the same weight, otherwise the prox has no closed form.
inline Vector prox_group_l12(const Vector& v, const Vector& sigma) {
  require_size(sigma.size(), v.size(), "prox_group_l12");
  if (v.size() % 2 != 0) throw DimensionError("prox_group_l12: odd length");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); i += 2) {
    const double s = sigma[i];
    if (!(s > 0.0) || sigma[i + 1] != s) {
      throw InvalidStep("prox_group_l12: block weights must be positive and equal within a pair");
    }
    const double n = std::hypot(v[i], v[i + 1]);
    const double f = 1.0 - s / std::max(s, n);
    out[i] = f * v[i];
    out[i + 1] = f * v[i + 1];
  }
  return out;
}

inline Vector project_box01(const Vector& u) { return u.cwiseMax(0.0).cwiseMin(1.0); }

enum class RegularizerKind { l1, group_l12_plus_box, zero };

/// The function J in min J(x) s.t. Ax = b.
///
/// For group_l12_plus_box the variable is x = (u, v) with u in R^{N^2}
/// (pixels, constrained to [0,1]) and v in R^{2N^2} (pairs, penalized by
/// the sum of their Euclidean norms).
struct Regularizer {
  RegularizerKind kind = RegularizerKind::l1;
  Index side = 0;

  static Regularizer l1() { return {RegularizerKind::l1, 0}; }
  static Regularizer zero() { return {RegularizerKind::zero, 0}; }
  static Regularizer tv(Index n) { return {RegularizerKind::group_l12_plus_box, n}; }

  Index pixel_count() const { return side * side; }

  /// J(x); +infinity outside the box for the TV kind (tolerance `box_tol`).
  double value(const Vector& x, double box_tol = 1e-12) const {
    switch (kind) {
      case RegularizerKind::l1: return x.lpNorm<1>();
      case RegularizerKind::zero: return 0.0;
      case RegularizerKind::group_l12_plus_box: {
        const Index n2 = pixel_count();
        require_size(x.size(), 3 * n2, "Regularizer::value");
        const auto u = x.head(n2);
        if (u.minCoeff() < -box_tol || u.maxCoeff() > 1.0 + box_tol) {
          return std::numeric_limits<double>::infinity();
        }
        double s = 0.0;
        for (Index i = n2; i < 3 * n2; i += 2) s += std::hypot(x[i], x[i + 1]);
        return s;
      }
    }
    return 0.0;
  }

  /// prox^Sigma_J(v) = (Id + Sigma dJ)^{-1} v.
  Vector prox(const Vector& v, const DiagMetric& sigma) const {
    require_size(v.size(), sigma.size(), "Regularizer::prox");
    switch (kind) {
      case RegularizerKind::l1: return prox_l1_diag(v, sigma);
      case RegularizerKind::zero: return v;
      case RegularizerKind::group_l12_plus_box: {
        const Index n2 = pixel_count();
        require_size(v.size(), 3 * n2, "Regularizer::prox");
        Vector out(v.size());
        out.head(n2) = project_box01(v.head(n2));
        if (sigma.is_scalar()) {
          out.tail(2 * n2) = prox_group_l12(Vector(v.tail(2 * n2)), sigma.scalar());
        } else {
          out.tail(2 * n2) =
              prox_group_l12(Vector(v.tail(2 * n2)), Vector(sigma.diagonal().tail(2 * n2)));
        }
        return out;
      }
    }
    return v;
  }
};

}  // namespace itreg
