#pragma once

#include "itreg/core.hpp"
#include "itreg/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <string>
#include <utility>

namespace itreg {

enum class MapKind { dense_matrix, blur, gradient, block_2x2, scaled_identity };

inline const char* to_string(MapKind k) {
  switch (k) {
    case MapKind::dense_matrix: return "dense-matrix";
    case MapKind::blur: return "blur";
    case MapKind::gradient: return "gradient";
    case MapKind::block_2x2: return "block-2x2";
    case MapKind::scaled_identity: return "scaled-identity";
  }
  return "?";
}

/// Real linear operator R^cols -> R^rows with an adjoint.
///
/// Implementations are immutable after construction; `apply_into` and
/// `apply_adjoint_into` are pure and may be called concurrently.
class LinearMap {
 public:
  using In = Eigen::Ref<const Vector>;
  using Out = Eigen::Ref<Vector>;

  virtual ~LinearMap() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual MapKind kind() const = 0;

  /// y = A x. `y` must already have length rows().
  virtual void apply_into(In x, Out y) const = 0;
  /// x = A* y. `x` must already have length cols().
  virtual void apply_adjoint_into(In y, Out x) const = 0;

  /// Row sums of |A_ij|, length rows().
  virtual Vector abs_row_sums() const = 0;
  /// Column sums of |A_ij|, length cols().
  virtual Vector abs_col_sums() const = 0;

  Vector apply(const Vector& x) const {
    require_size(x.size(), cols(), "LinearMap::apply");
    Vector y(rows());
    apply_into(x, y);
    return y;
  }

  Vector apply_adjoint(const Vector& y) const {
    require_size(y.size(), rows(), "LinearMap::apply_adjoint");
    Vector x(cols());
    apply_adjoint_into(y, x);
    return x;
  }
};

using MapPtr = std::shared_ptr<const LinearMap>;

template <class Op>
concept LinearOperator = requires(const Op& op, const Vector& v) {
  { op.rows() } -> std::convertible_to<Index>;
  { op.cols() } -> std::convertible_to<Index>;
  { op.apply(v) } -> std::convertible_to<Vector>;
  { op.apply_adjoint(v) } -> std::convertible_to<Vector>;
};

class DenseMap final : public LinearMap {
 public:
  explicit DenseMap(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.cols() < 1) throw DimensionError("DenseMap: empty matrix");
  }

  Index rows() const override { return m_.rows(); }
  Index cols() const override { return m_.cols(); }
  MapKind kind() const override { return MapKind::dense_matrix; }

  void apply_into(In x, Out y) const override { y.noalias() = m_ * x; }
  void apply_adjoint_into(In y, Out x) const override { x.noalias() = m_.transpose() * y; }

  Vector abs_row_sums() const override { return m_.cwiseAbs().rowwise().sum(); }
  Vector abs_col_sums() const override { return m_.cwiseAbs().colwise().sum().transpose(); }

  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// c * Id on R^n.
class ScaledIdentityMap final : public LinearMap {
 public:
  ScaledIdentityMap(Index n, double c) : n_(n), c_(c) {
    if (n < 1) throw DimensionError("ScaledIdentityMap: n must be positive");
  }

  Index rows() const override { return n_; }
  Index cols() const override { return n_; }
  MapKind kind() const override { return MapKind::scaled_identity; }

  void apply_into(In x, Out y) const override { y = c_ * x; }
  void apply_adjoint_into(In y, Out x) const override { x = c_ * y; }

  Vector abs_row_sums() const override { return Vector::Constant(n_, std::abs(c_)); }
  Vector abs_col_sums() const override { return Vector::Constant(n_, std::abs(c_)); }

  double scale() const { return c_; }

 private:
  Index n_;
  double c_;
};

/// [[A11, A12], [A21, A22]] over a product space; null blocks are zero.
///
/// The blocks are never materialized, so a blur/gradient composition stays
/// matrix-free.
class BlockMap2x2 final : public LinearMap {
 public:
  BlockMap2x2(MapPtr a11, MapPtr a12, MapPtr a21, MapPtr a22)
      : b_{std::move(a11), std::move(a12), std::move(a21), std::move(a22)} {
    r0_ = pick(b_[0], b_[1], true);
    r1_ = pick(b_[2], b_[3], true);
    c0_ = pick(b_[0], b_[2], false);
    c1_ = pick(b_[1], b_[3], false);
    check(b_[0], r0_, c0_);
    check(b_[1], r0_, c1_);
    check(b_[2], r1_, c0_);
    check(b_[3], r1_, c1_);
  }

  Index rows() const override { return r0_ + r1_; }
  Index cols() const override { return c0_ + c1_; }
  MapKind kind() const override { return MapKind::block_2x2; }

  void apply_into(In x, Out y) const override {
    y.setZero();
    Vector tmp;
    auto acc = [&](const MapPtr& blk, Index xoff, Index xlen, Index yoff, Index ylen) {
      if (!blk) return;
      tmp.resize(ylen);
      blk->apply_into(x.segment(xoff, xlen), tmp);
      y.segment(yoff, ylen) += tmp;
    };
    acc(b_[0], 0, c0_, 0, r0_);
    acc(b_[1], c0_, c1_, 0, r0_);
    acc(b_[2], 0, c0_, r0_, r1_);
    acc(b_[3], c0_, c1_, r0_, r1_);
  }

  void apply_adjoint_into(In y, Out x) const override {
    x.setZero();
    Vector tmp;
    auto acc = [&](const MapPtr& blk, Index yoff, Index ylen, Index xoff, Index xlen) {
      if (!blk) return;
      tmp.resize(xlen);
      blk->apply_adjoint_into(y.segment(yoff, ylen), tmp);
      x.segment(xoff, xlen) += tmp;
    };
    acc(b_[0], 0, r0_, 0, c0_);
    acc(b_[1], 0, r0_, c0_, c1_);
    acc(b_[2], r0_, r1_, 0, c0_);
    acc(b_[3], r0_, r1_, c0_, c1_);
  }

  Vector abs_row_sums() const override {
    Vector s = Vector::Zero(rows());
    if (b_[0]) s.head(r0_) += b_[0]->abs_row_sums();
    if (b_[1]) s.head(r0_) += b_[1]->abs_row_sums();
    if (b_[2]) s.tail(r1_) += b_[2]->abs_row_sums();
    if (b_[3]) s.tail(r1_) += b_[3]->abs_row_sums();
    return s;
  }

  Vector abs_col_sums() const override {
    Vector s = Vector::Zero(cols());
    if (b_[0]) s.head(c0_) += b_[0]->abs_col_sums();
    if (b_[2]) s.head(c0_) += b_[2]->abs_col_sums();
    if (b_[1]) s.tail(c1_) += b_[1]->abs_col_sums();
    if (b_[3]) s.tail(c1_) += b_[3]->abs_col_sums();
    return s;
  }

  const MapPtr& block(int i, int j) const { return b_[static_cast<std::size_t>(2 * i + j)]; }

 private:
  static Index pick(const MapPtr& a, const MapPtr& b, bool want_rows) {
    const MapPtr& m = a ? a : b;
    if (!m) throw DimensionError("BlockMap2x2: a block row/column is entirely zero");
    return want_rows ? m->rows() : m->cols();
  }
  static void check(const MapPtr& m, Index r, Index c) {
    if (m && (m->rows() != r || m->cols() != c)) {
      throw DimensionError("BlockMap2x2: inconsistent block shapes");
    }
  }

  std::array<MapPtr, 4> b_;
  Index r0_ = 0, r1_ = 0, c0_ = 0, c1_ = 0;
};

/// Diagonal positive-definite metric (the preconditioners Sigma and Gamma).
///
/// A scaled identity is stored as a single scalar.
class DiagMetric {
 public:
  DiagMetric() = default;

  explicit DiagMetric(Vector entries) : n_(entries.size()), d_(std::move(entries)) {
    if (n_ < 1) throw DimensionError("DiagMetric: empty");
    if ((d_.array() <= 0.0).any() || !d_.allFinite()) {
      throw InvalidStep("DiagMetric: entries must be finite and strictly positive");
    }
  }

  static DiagMetric scaled_identity(Index n, double c) {
    if (n < 1) throw DimensionError("DiagMetric: empty");
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidStep("DiagMetric: scale must be positive");
    DiagMetric m;
    m.n_ = n;
    m.c_ = c;
    m.scalar_ = true;
    return m;
  }

  Index size() const { return n_; }
  bool is_scalar() const { return scalar_; }
  double scalar() const { return c_; }

  double operator[](Index i) const { return scalar_ ? c_ : d_[i]; }

  Vector diagonal() const { return scalar_ ? Vector::Constant(n_, c_) : d_; }

  Vector apply(const Vector& v) const {
    require_size(v.size(), n_, "DiagMetric::apply");
    return scalar_ ? Vector(c_ * v) : Vector(d_.cwiseProduct(v));
  }
  Vector apply_inverse(const Vector& v) const {
    require_size(v.size(), n_, "DiagMetric::apply_inverse");
    return scalar_ ? Vector(v / c_) : Vector(v.cwiseQuotient(d_));
  }
  Vector apply_sqrt(const Vector& v) const {
    require_size(v.size(), n_, "DiagMetric::apply_sqrt");
    return scalar_ ? Vector(std::sqrt(c_) * v) : Vector(d_.cwiseSqrt().cwiseProduct(v));
  }
  Vector apply_inv_sqrt(const Vector& v) const {
    require_size(v.size(), n_, "DiagMetric::apply_inv_sqrt");
    return scalar_ ? Vector(v / std::sqrt(c_)) : Vector(v.cwiseQuotient(d_.cwiseSqrt()));
  }

  double max_entry() const { return scalar_ ? c_ : d_.maxCoeff(); }
  double min_entry() const { return scalar_ ? c_ : d_.minCoeff(); }

  /// ||M||, ||M^{1/2}|| and ||M^{-1}|| in the spectral norm.
  double norm() const { return max_entry(); }
  double sqrt_norm() const { return std::sqrt(max_entry()); }
  double inverse_norm() const { return 1.0 / min_entry(); }

  /// ||v||^2_{M^{-1}} = sum v_i^2 / m_i.
  double inv_weighted_sq_norm(const Vector& v) const {
    require_size(v.size(), n_, "DiagMetric::inv_weighted_sq_norm");
    return scalar_ ? v.squaredNorm() / c_ : v.cwiseAbs2().cwiseQuotient(d_).sum();
  }

  DiagMetric scaled(double f) const {
    return scalar_ ? scaled_identity(n_, c_ * f) : DiagMetric(Vector(d_ * f));
  }

 private:
  Index n_ = 0;
  Vector d_;
  double c_ = 1.0;
  bool scalar_ = false;
};

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest singular value by power iteration on A*A from a seeded random start.
///
/// Stops when the relative change of the estimate drops below `tol`; the
/// estimate approaches ||A|| from below.
template <LinearOperator Op>
NormEstimate op_norm_est(const Op& a, double tol = 1e-10, int max_iter = 200,
                         std::uint64_t seed = 0) {
  if (!(tol > 0.0)) throw std::invalid_argument("op_norm_est: tol must be positive");
  Xoshiro256 rng(seed, Stream::power);
  Vector v(a.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();

  NormEstimate out;
  double prev = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    const Vector w = a.apply(v);
    Vector z = a.apply_adjoint(w);
    const double zn = z.norm();
    out.iterations = k;
    if (zn == 0.0) {
      out.value = w.norm();
      out.converged = true;
      return out;
    }
    out.value = std::sqrt(zn);
    if (std::abs(out.value - prev) <= tol * out.value) {
      out.converged = true;
      return out;
    }
    prev = out.value;
    v = z / zn;
  }
  return out;
}

/// ||A||_F^2 = sum of squared row norms. Dense maps only.
inline double frobenius_norm_sq(const LinearMap& a) {
  const auto* dense = dynamic_cast<const DenseMap*>(&a);
  if (!dense) {
    throw UnsupportedOperation(std::string("frobenius_norm_sq: not available for ") +
                               to_string(a.kind()));
  }
  return dense->matrix().squaredNorm();
}

namespace detail {
// Gamma^{1/2} A Sigma^{1/2}, applied on the fly.
struct ScaledComposite {
  const LinearMap& a;
  const DiagMetric& sigma;
  const DiagMetric& gamma;
  Index rows() const { return a.rows(); }
  Index cols() const { return a.cols(); }
  Vector apply(const Vector& x) const { return gamma.apply_sqrt(a.apply(sigma.apply_sqrt(x))); }
  Vector apply_adjoint(const Vector& y) const {
    return sigma.apply_sqrt(a.apply_adjoint(gamma.apply_sqrt(y)));
  }
};
}  // namespace detail

/// alpha = 1 - ||Gamma^{1/2} A Sigma^{1/2}||^2. alpha <= 0 means the pair is inadmissible.
inline double check_step_condition(const DiagMetric& sigma, const DiagMetric& gamma,
                                   const LinearMap& a, double tol = 1e-10, int max_iter = 200,
                                   std::uint64_t seed = 0) {
  require_size(sigma.size(), a.cols(), "check_step_condition: Sigma");
  require_size(gamma.size(), a.rows(), "check_step_condition: Gamma");
  const double n = op_norm_est(detail::ScaledComposite{a, sigma, gamma}, tol, max_iter, seed).value;
  return 1.0 - n * n;
}

struct Preconditioners {
  DiagMetric sigma;
  DiagMetric gamma;
};

/// Diagonal preconditioners Sigma_jj = 1 / sum_i |A_ij|, Gamma_ii = 1 / sum_j |A_ij|.
inline Preconditioners pock_chambolle_diagonals(const LinearMap& a) {
  const Vector col = a.abs_col_sums();
  const Vector row = a.abs_row_sums();
  if ((col.array() <= 0.0).any()) throw DegenerateOperator("pock_chambolle_diagonals: zero column");
  if ((row.array() <= 0.0).any()) throw DegenerateOperator("pock_chambolle_diagonals: zero row");
  return {DiagMetric(col.cwiseInverse()), DiagMetric(row.cwiseInverse())};
}

/// Plain-text dense matrix: "rows cols" then rows*cols values in row-major order.
inline Matrix read_dense_matrix(std::istream& in) {
  long r = 0, c = 0;
  if (!(in >> r >> c) || r < 1 || c < 1) throw FormatError("dense matrix: bad header");
  Matrix m(r, c);
  for (long i = 0; i < r; ++i) {
    for (long j = 0; j < c; ++j) {
      if (!(in >> m(i, j))) throw FormatError("dense matrix: truncated data");
    }
  }
  std::string extra;
  if (in >> extra) throw FormatError("dense matrix: trailing data");
  return m;
}

inline Matrix load_dense_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_dense_matrix(in);
}

}  // namespace itreg
