#pragma once

// Activation operators T: cheap maps whose fixed-point sets contain the
// (noisy) primal solution set, or the dual feasible set, and that are
// applied once per iteration to reuse the data constraints.

#include "itreg/core.hpp"
#include "itreg/linops.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace itreg {

/// Projection of x onto the hyperplane <a, x> = b.
inline Vector row_project(const Vector& x, const Vector& a, double b) {
  require_size(a.size(), x.size(), "row_project");
  const double nsq = a.squaredNorm();
  if (nsq == 0.0) throw DegenerateOperator("row_project: zero row");
  return x + ((b - a.dot(x)) / nsq) * a;
}

enum class ActivatorKind {
  identity,
  serial_projection,
  parallel_projection,
  landweber,
  landweber_adaptive,
  dual_box_projection,
};

inline const char* to_string(ActivatorKind k) {
  switch (k) {
    case ActivatorKind::identity: return "identity";
    case ActivatorKind::serial_projection: return "serial-projection";
    case ActivatorKind::parallel_projection: return "parallel-projection";
    case ActivatorKind::landweber: return "landweber";
    case ActivatorKind::landweber_adaptive: return "landweber-adaptive";
    case ActivatorKind::dual_box_projection: return "dual-box-projection";
  }
  return "?";
}

struct Activator {
  ActivatorKind kind = ActivatorKind::identity;
  /// Row indices (primal projections) or column indices (dual box), in application order.
  std::vector<int> indices;
  /// Convex weights of a parallel projection, aligned with `indices`.
  std::vector<double> weights;
  /// Squared norms of the rows/columns named in `indices`.
  std::vector<double> norms_sq;
  /// Landweber step.
  double step = 0.0;
  /// Step cap M of the adaptive Landweber operator.
  double cap = 1e6;
  /// ||A||, used by the adaptive operator's zero-gradient guard.
  double op_norm = 0.0;
  /// Serial kinds: the driver draws a fresh order every iteration.
  bool reshuffle = false;

  bool acts_on_dual() const { return kind == ActivatorKind::dual_box_projection; }

  static Activator identity() { return {}; }

  static Activator serial(const DenseMap& a, std::vector<int> rows, bool reshuffle = false) {
    Activator t;
    t.kind = ActivatorKind::serial_projection;
    t.norms_sq = row_norms(a, rows);
    t.indices = std::move(rows);
    t.reshuffle = reshuffle;
    return t;
  }

  /// Serial projection over every row of A.
  static Activator serial_all(const DenseMap& a, bool reshuffle = true) {
    return serial(a, iota(static_cast<int>(a.rows())), reshuffle);
  }

  static Activator parallel(const DenseMap& a, std::vector<int> rows, std::vector<double> weights) {
    if (rows.size() != weights.size() || rows.empty()) {
      throw std::invalid_argument("parallel projection: need one weight per row");
    }
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0 || w > 1.0) throw std::invalid_argument("parallel projection: weight outside [0,1]");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("parallel projection: weights must sum to 1");
    }
    Activator t;
    t.kind = ActivatorKind::parallel_projection;
    t.norms_sq = row_norms(a, rows);
    t.indices = std::move(rows);
    t.weights = std::move(weights);
    return t;
  }

  /// Parallel projection over all rows with weights ||a_j||^2 / ||A||_F^2.
  static Activator parallel_frobenius(const DenseMap& a) {
    const auto rows = iota(static_cast<int>(a.rows()));
    const double fro = a.matrix().squaredNorm();
    std::vector<double> w(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) w[j] = a.matrix().row(rows[j]).squaredNorm() / fro;
    return parallel(a, rows, std::move(w));
  }

  static Activator landweber(double step) {
    if (!(step > 0.0)) throw InvalidStep("landweber: step must be positive");
    Activator t;
    t.kind = ActivatorKind::landweber;
    t.step = step;
    return t;
  }

  static Activator landweber_adaptive(double op_norm, double cap = 1e6) {
    if (!(cap > 0.0)) throw InvalidStep("adaptive landweber: cap must be positive");
    Activator t;
    t.kind = ActivatorKind::landweber_adaptive;
    t.cap = cap;
    t.op_norm = op_norm;
    return t;
  }

  /// Projections onto the slabs |<A_i, u>| <= 1, one per listed column.
  static Activator dual_box(const DenseMap& a, std::vector<int> cols, bool reshuffle = false) {
    Activator t;
    t.kind = ActivatorKind::dual_box_projection;
    t.norms_sq.reserve(cols.size());
    for (int i : cols) {
      check_index(i, a.cols(), "dual box");
      const double n = a.matrix().col(i).squaredNorm();
      if (n == 0.0) throw DegenerateOperator("dual box: zero column " + std::to_string(i));
      t.norms_sq.push_back(n);
    }
    t.indices = std::move(cols);
    t.reshuffle = reshuffle;
    return t;
  }

  static Activator dual_box_all(const DenseMap& a, bool reshuffle = true) {
    return dual_box(a, iota(static_cast<int>(a.cols())), reshuffle);
  }

  static std::vector<int> iota(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
  }

 private:
  static void check_index(int i, Index n, const char* what) {
    if (i < 0 || i >= n) throw DimensionError(std::string(what) + ": index out of range");
  }
  static std::vector<double> row_norms(const DenseMap& a, const std::vector<int>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (int j : rows) {
      check_index(j, a.rows(), "row projection");
      const double n = a.matrix().row(j).squaredNorm();
      if (n == 0.0) throw DegenerateOperator("row projection: zero row " + std::to_string(j));
      out.push_back(n);
    }
    return out;
  }
};

namespace detail {
inline const DenseMap& dense_of(const LinearMap& a, ActivatorKind k) {
  const auto* d = dynamic_cast<const DenseMap*>(&a);
  if (!d) {
    throw UnsupportedOperation(std::string(to_string(k)) + " needs a dense operator, got " +
                               to_string(a.kind()));
  }
  return *d;
}
}  // namespace detail

/// T(z). For serial kinds `order` (positions into T.indices) overrides the
/// stored application order; an empty span keeps it.
inline Vector apply_activator(const Activator& t, const Vector& z, const LinearMap& a,
                              const Vector& b_delta, std::span<const int> order = {}) {
  require_size(b_delta.size(), a.rows(), "apply_activator: data");
  // The identity serves either space.
  if (t.kind == ActivatorKind::identity) {
    if (z.size() != a.rows()) require_size(z.size(), a.cols(), "apply_activator: argument");
    return z;
  }
  require_size(z.size(), t.acts_on_dual() ? a.rows() : a.cols(), "apply_activator: argument");

  auto position = [&](std::size_t k) {
    return order.empty() ? k : static_cast<std::size_t>(order[k]);
  };

  switch (t.kind) {
    case ActivatorKind::identity: return z;

    case ActivatorKind::serial_projection: {
      const Matrix& m = detail::dense_of(a, t.kind).matrix();
      Vector x = z;
      for (std::size_t k = 0; k < t.indices.size(); ++k) {
        const std::size_t pos = position(k);
        const int j = t.indices[pos];
        const double r = (b_delta[j] - m.row(j).dot(x)) / t.norms_sq[pos];
        x.noalias() += r * m.row(j).transpose();
      }
      return x;
    }

    case ActivatorKind::parallel_projection: {
      const Matrix& m = detail::dense_of(a, t.kind).matrix();
      const Vector res = b_delta - m * z;
      Vector coeff = Vector::Zero(a.rows());
      for (std::size_t k = 0; k < t.indices.size(); ++k) {
        const int j = t.indices[k];
        coeff[j] += t.weights[k] * res[j] / t.norms_sq[k];
      }
      return z + m.transpose() * coeff;
    }

    case ActivatorKind::landweber: {
      const Vector g = a.apply_adjoint(Vector(a.apply(z) - b_delta));
      return z - t.step * g;
    }

    case ActivatorKind::landweber_adaptive: {
      const Vector r = a.apply(z) - b_delta;
      const Vector g = a.apply_adjoint(r);
      const double gn = g.norm();
      if (gn <= 1e-14 * (t.op_norm * z.norm() + b_delta.norm())) return z;
      const double beta = std::min(r.squaredNorm() / (gn * gn), t.cap);
      return z - beta * g;
    }

    case ActivatorKind::dual_box_projection: {
      const Matrix& m = detail::dense_of(a, t.kind).matrix();
      Vector u = z;
      for (std::size_t k = 0; k < t.indices.size(); ++k) {
        const std::size_t pos = position(k);
        const int i = t.indices[pos];
        const double s = m.col(i).dot(u);
        if (std::abs(s) <= 1.0) continue;
        u.noalias() -= ((s - std::copysign(1.0, s)) / t.norms_sq[pos]) * m.col(i);
      }
      return u;
    }
  }
  return z;
}

/// Error constant e_T in ||Tx - x*||^2 <= ||x - x*||^2 + e_T delta^2.
///
/// Row norms and ||A|| are recomputed from `a`, not taken from the cached
/// fields of `t`.
inline double error_constant(const Activator& t, const LinearMap& a) {
  switch (t.kind) {
    case ActivatorKind::identity:
    case ActivatorKind::dual_box_projection: return 0.0;

    case ActivatorKind::serial_projection:
    case ActivatorKind::parallel_projection: {
      const Matrix& m = detail::dense_of(a, t.kind).matrix();
      double e = 0.0;
      for (std::size_t k = 0; k < t.indices.size(); ++k) {
        const double w = t.kind == ActivatorKind::serial_projection ? 1.0 : t.weights[k];
        e += w / m.row(t.indices[k]).squaredNorm();
      }
      return e;
    }

    case ActivatorKind::landweber: {
      const double n = op_norm_est(a).value;
      const double denom = 2.0 - t.step * n * n;
      // ||A|| is an estimate from below, so reject steps within its accuracy of the limit.
      if (!(t.step > 0.0) || denom <= 1e-8) {
        throw InvalidStep("landweber: step must lie in (0, 2/||A||^2)");
      }
      return t.step / denom;
    }

    case ActivatorKind::landweber_adaptive: return t.cap;
  }
  return 0.0;
}

/// e_T for the same inequality measured in the Sigma^{-1} metric. A scalar
/// Sigma = c Id divides the Euclidean constant by c; any other metric has no
/// finite constant unless e_T = 0.
inline double error_constant(const Activator& t, const LinearMap& a, const DiagMetric& sigma) {
  const double e = error_constant(t, a);
  if (e == 0.0) return 0.0;
  if (!sigma.is_scalar()) return std::numeric_limits<double>::infinity();
  return e / sigma.scalar();
}

}  // namespace itreg
