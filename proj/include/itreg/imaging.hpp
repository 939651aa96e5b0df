#pragma once

// Discrete image calculus on N x N grids, the box-blur forward model, the
// TV restoration problem over the product space (u, v), and quality metrics.
//
// Pixels are stored row-major: index i * N + j, i the row, j the column.
// A gradient field stores one pair per pixel, interleaved: entry 2(iN + j)
// is the difference along j and entry 2(iN + j) + 1 the difference along i.

#include "itreg/core.hpp"
#include "itreg/linops.hpp"
#include "itreg/problem.hpp"
#include "itreg/prox.hpp"
#include "itreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace itreg {

struct Image {
  Index side = 0;
  Vector pixels;

  Image() = default;
  Image(Index n, Vector px) : side(n), pixels(std::move(px)) {
    require_size(pixels.size(), n * n, "Image");
  }
  static Image zeros(Index n) { return {n, Vector::Zero(n * n)}; }

  double& at(Index i, Index j) { return pixels[i * side + j]; }
  double at(Index i, Index j) const { return pixels[i * side + j]; }
};

/// Forward differences with zero at the last row/column.
inline Vector grad(const Vector& u, Index n) {
  require_size(u.size(), n * n, "grad");
  Vector g(2 * n * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Index k = i * n + j;
      g[2 * k] = j + 1 < n ? u[k + 1] - u[k] : 0.0;
      g[2 * k + 1] = i + 1 < n ? u[k + n] - u[k] : 0.0;
    }
  }
  return g;
}

/// div = -grad^*.
inline Vector div(const Vector& p, Index n) {
  require_size(p.size(), 2 * n * n, "div");
  Vector d(n * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Index k = i * n + j;
      double along_j = 0.0;
      if (j + 1 < n) along_j += p[2 * k];
      if (j > 0) along_j -= p[2 * (k - 1)];
      double along_i = 0.0;
      if (i + 1 < n) along_i += p[2 * k + 1];
      if (i > 0) along_i -= p[2 * (k - n) + 1];
      d[k] = along_j + along_i;
    }
  }
  return d;
}

class GradientMap final : public LinearMap {
 public:
  explicit GradientMap(Index n) : n_(n) {
    if (n < 1) throw DimensionError("GradientMap: side must be positive");
  }

  Index rows() const override { return 2 * n_ * n_; }
  Index cols() const override { return n_ * n_; }
  MapKind kind() const override { return MapKind::gradient; }

  void apply_into(In x, Out y) const override { y = grad(Vector(x), n_); }
  void apply_adjoint_into(In y, Out x) const override { x = -div(Vector(y), n_); }

  Vector abs_row_sums() const override {
    Vector s(rows());
    for (Index i = 0; i < n_; ++i) {
      for (Index j = 0; j < n_; ++j) {
        const Index k = i * n_ + j;
        s[2 * k] = j + 1 < n_ ? 2.0 : 0.0;
        s[2 * k + 1] = i + 1 < n_ ? 2.0 : 0.0;
      }
    }
    return s;
  }

  Vector abs_col_sums() const override {
    Vector s(cols());
    for (Index i = 0; i < n_; ++i) {
      for (Index j = 0; j < n_; ++j) {
        const auto links = [&](Index t) { return (t + 1 < n_ ? 1.0 : 0.0) + (t > 0 ? 1.0 : 0.0); };
        s[i * n_ + j] = links(i) + links(j);
      }
    }
    return s;
  }

  Index side() const { return n_; }

 private:
  Index n_;
};

namespace detail {
// Windowed sums of width 2r+1 along one axis, zero outside [0, n).
inline void box_sum_1d(const double* in, double* out, Index n, Index stride, Index r) {
  std::vector<double> prefix(static_cast<std::size_t>(n + 1), 0.0);
  for (Index t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + in[t * stride];
  for (Index t = 0; t < n; ++t) {
    const Index lo = std::max<Index>(0, t - r);
    const Index hi = std::min<Index>(n, t + r + 1);
    out[t * stride] = prefix[hi] - prefix[lo];
  }
}
}  // namespace detail

/// Mean over the (2r+1) x (2r+1) window, zero padded, always divided by the
/// full window size. Symmetric, so K* = K.
inline Vector blur_apply(const Vector& u, Index n, Index radius) {
  require_size(u.size(), n * n, "blur_apply");
  if (radius < 0) throw std::invalid_argument("blur_apply: negative radius");
  if (radius == 0) return u;
  Vector tmp(n * n);
  Vector out(n * n);
  for (Index i = 0; i < n; ++i) detail::box_sum_1d(u.data() + i * n, tmp.data() + i * n, n, 1, radius);
  for (Index j = 0; j < n; ++j) detail::box_sum_1d(tmp.data() + j, out.data() + j, n, n, radius);
  const double w = static_cast<double>(2 * radius + 1);
  return out / (w * w);
}

class BlurMap final : public LinearMap {
 public:
  BlurMap(Index n, Index radius) : n_(n), r_(radius) {
    if (n < 1) throw DimensionError("BlurMap: side must be positive");
    if (radius < 0) throw std::invalid_argument("BlurMap: negative radius");
  }

  Index rows() const override { return n_ * n_; }
  Index cols() const override { return n_ * n_; }
  MapKind kind() const override { return MapKind::blur; }

  void apply_into(In x, Out y) const override { y = blur_apply(Vector(x), n_, r_); }
  void apply_adjoint_into(In y, Out x) const override { x = blur_apply(Vector(y), n_, r_); }

  Vector abs_row_sums() const override {
    const double w = static_cast<double>(2 * r_ + 1);
    Vector s(n_ * n_);
    for (Index i = 0; i < n_; ++i) {
      for (Index j = 0; j < n_; ++j) s[i * n_ + j] = static_cast<double>(span(i) * span(j)) / (w * w);
    }
    return s;
  }
  Vector abs_col_sums() const override { return abs_row_sums(); }

  Index side() const { return n_; }
  Index radius() const { return r_; }

 private:
  Index span(Index t) const { return std::min(n_, t + r_ + 1) - std::max<Index>(0, t - r_); }

  Index n_;
  Index r_;
};

/// min ||v||_{1,2} + i_[0,1](u) s.t. Ku = y, Du - v = 0, posed on x = (u, v)
/// with A = [[K, 0], [D, -Id]] and b_delta = (y, 0).
///
/// With `clean` the exact datum (K clean, 0), the pixel ground truth and
/// delta = ||y - K clean|| are filled in as well.
inline ProblemSpec assemble_tv_problem(const Image& y, Index radius,
                                       const std::optional<Image>& clean = std::nullopt) {
  const Index n = y.side;
  const Index n2 = n * n;
  auto k = std::make_shared<BlurMap>(n, radius);
  auto d = std::make_shared<GradientMap>(n);
  auto neg_id = std::make_shared<ScaledIdentityMap>(2 * n2, -1.0);

  ProblemSpec prob;
  prob.reg = Regularizer::tv(n);
  prob.a = std::make_shared<BlockMap2x2>(k, nullptr, d, neg_id);
  prob.b_delta = Vector::Zero(3 * n2);
  prob.b_delta.head(n2) = y.pixels;
  if (clean) {
    require_size(clean->side, n, "assemble_tv_problem: clean image");
    Vector b = Vector::Zero(3 * n2);
    b.head(n2) = k->apply(clean->pixels);
    prob.delta = (b - prob.b_delta).norm();
    prob.b_exact = std::move(b);
    prob.ground_truth = clean->pixels;
  }
  return prob;
}

struct ImageQuality {
  double mse = 0.0;
  /// +infinity when mse is 0.
  double psnr = 0.0;
  double ssim = 1.0;
};

/// Mean SSIM over all w x w windows at stride 1 (w = min(8, N)), dynamic
/// range 1, constants K1 = 0.01, K2 = 0.03, sample covariances.
inline double ssim(const Image& x, const Image& ref) {
  require_size(x.side, ref.side, "ssim");
  const Index n = x.side;
  const Index w = std::min<Index>(8, n);
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  const double cnt = static_cast<double>(w * w);
  double total = 0.0;
  Index windows = 0;
  for (Index i0 = 0; i0 + w <= n; ++i0) {
    for (Index j0 = 0; j0 + w <= n; ++j0) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (Index i = i0; i < i0 + w; ++i) {
        for (Index j = j0; j < j0 + w; ++j) {
          const double a = x.at(i, j);
          const double b = ref.at(i, j);
          sx += a;
          sy += b;
          sxx += a * a;
          syy += b * b;
          sxy += a * b;
        }
      }
      const double mx = sx / cnt;
      const double my = sy / cnt;
      const double denom = cnt > 1 ? cnt - 1 : 1.0;
      const double vx = (sxx - cnt * mx * mx) / denom;
      const double vy = (syy - cnt * my * my) / denom;
      const double cxy = (sxy - cnt * mx * my) / denom;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

inline ImageQuality image_metrics(const Image& x, const Image& ref) {
  require_size(x.side, ref.side, "image_metrics");
  ImageQuality q;
  q.mse = (x.pixels - ref.pixels).squaredNorm() / static_cast<double>(x.pixels.size());
  q.psnr = q.mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / q.mse);
  q.ssim = ssim(x, ref);
  return q;
}

/// Test scene on [0,1]: dark background, horizontal ramp in the lower band,
/// a bright rectangle and a mid-gray disc.
inline Image synthetic_image(Index n) {
  if (n < 1) throw DimensionError("synthetic_image: side must be positive");
  Image img = Image::zeros(n);
  const double s = static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double y = (static_cast<double>(i) + 0.5) / s;
      const double x = (static_cast<double>(j) + 0.5) / s;
      double v = 0.1;
      if (y > 0.75) v = 0.2 + 0.7 * x;
      if (x > 0.15 && x < 0.5 && y > 0.15 && y < 0.6) v = 0.9;
      const double dx = x - 0.7;
      const double dy = y - 0.4;
      if (dx * dx + dy * dy < 0.18 * 0.18) v = 0.55;
      img.at(i, j) = v;
    }
  }
  return img;
}

/// y = K clean + e with e uniform on [-amp, amp] per pixel.
inline Image degrade(const Image& clean, Index radius, double amp, std::uint64_t seed) {
  Xoshiro256 rng(seed, Stream::image);
  Vector y = blur_apply(clean.pixels, clean.side, radius);
  for (Index i = 0; i < y.size(); ++i) y[i] += rng.uniform(-amp, amp);
  return {clean.side, std::move(y)};
}

}  // namespace itreg
