#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "cstv/error.hpp"
#include "cstv/image.hpp"
#include "cstv/planar.hpp"

namespace cstv {

// Periodic backward differences. "x" runs along the row index i and "y" along
// the column index j:
//   (Dx w)(i,j) = w(i,j) - w(i-1,j),   (Dy w)(i,j) = w(i,j) - w(i,j-1).

inline Plane diff_x(const Plane& in, std::size_t width, std::size_t height) {
  Plane out(in.size());
  for (std::size_t i = 0; i < height; ++i) {
    const std::size_t ip = (i + height - 1) % height;
    for (std::size_t j = 0; j < width; ++j) out[i * width + j] = in[i * width + j] - in[ip * width + j];
  }
  return out;
}

inline Plane diff_y(const Plane& in, std::size_t width, std::size_t height) {
  Plane out(in.size());
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t jp = (j + width - 1) % width;
      out[i * width + j] = in[i * width + j] - in[i * width + jp];
    }
  return out;
}

// Adjoints: negative forward differences.
inline Plane diff_x_adjoint(const Plane& in, std::size_t width, std::size_t height) {
  Plane out(in.size());
  for (std::size_t i = 0; i < height; ++i) {
    const std::size_t in_ = (i + 1) % height;
    for (std::size_t j = 0; j < width; ++j) out[i * width + j] = in[i * width + j] - in[in_ * width + j];
  }
  return out;
}

inline Plane diff_y_adjoint(const Plane& in, std::size_t width, std::size_t height) {
  Plane out(in.size());
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t jn = (j + 1) % width;
      out[i * width + j] = in[i * width + j] - in[i * width + jn];
    }
  return out;
}

struct GradientPair {
  Plane gx, gy;
};

inline GradientPair grad(const Plane& channel, std::size_t width, std::size_t height) {
  return {diff_x(channel, width, height), diff_y(channel, width, height)};
}

/// Dx^T gx + Dy^T gy (minus the discrete divergence).
inline Plane grad_adjoint(const GradientPair& g, std::size_t width, std::size_t height) {
  Plane out = diff_x_adjoint(g.gx, width, height);
  const Plane oy = diff_y_adjoint(g.gy, width, height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += oy[i];
  return out;
}

// ---------------------------------------------------------------------------
// Orthogonal colour transform: rows span the two chromatic directions and the
// gray axis.

inline const std::array<std::array<double, 3>, 3>& p_matrix() {
  static const double a = 1.0 / std::sqrt(2.0), b = 1.0 / std::sqrt(6.0), c = 1.0 / std::sqrt(3.0);
  static const std::array<std::array<double, 3>, 3> p{{{a, -a, 0.0}, {b, b, -2.0 * b}, {c, c, c}}};
  return p;
}

inline ColorImage apply_p(const ColorImage& img) {
  const auto& p = p_matrix();
  ColorImage out(img.width(), img.height());
  for (std::size_t n = 0; n < img.pixels(); ++n)
    for (int r = 0; r < 3; ++r)
      out.plane(r)[n] = p[r][0] * img.plane(0)[n] + p[r][1] * img.plane(1)[n] + p[r][2] * img.plane(2)[n];
  return out;
}

inline ColorImage apply_p_inverse(const ColorImage& img) {
  const auto& p = p_matrix();
  ColorImage out(img.width(), img.height());
  for (std::size_t n = 0; n < img.pixels(); ++n)
    for (int r = 0; r < 3; ++r)
      out.plane(r)[n] = p[0][r] * img.plane(0)[n] + p[1][r] * img.plane(1)[n] + p[2][r] * img.plane(2)[n];
  return out;
}

// ---------------------------------------------------------------------------
// Saturation and value magnitudes of a colour vector. The saturation part is
// the length of the projection off the gray axis, (1/3)||C u|| with
// C = 3I - 11^T; the value part is |u1 + u2 + u3| / sqrt(3).

inline double saturation_magnitude(double u1, double u2, double u3) {
  const double m = (u1 + u2 + u3) / 3.0;
  const double a = u1 - m, b = u2 - m, c = u3 - m;
  return std::sqrt(a * a + b * b + c * c);
}

inline double value_magnitude(double u1, double u2, double u3) { return std::abs(u1 + u2 + u3) / std::sqrt(3.0); }

struct SVComponents {
  Plane saturation, value;
};

inline SVComponents sv_components(const ColorImage& img) {
  SVComponents out{Plane(img.pixels()), Plane(img.pixels())};
  for (std::size_t n = 0; n < img.pixels(); ++n) {
    const double r = img.plane(0)[n], g = img.plane(1)[n], b = img.plane(2)[n];
    out.saturation[n] = saturation_magnitude(r, g, b);
    out.value[n] = value_magnitude(r, g, b);
  }
  return out;
}

namespace detail {

inline std::array<GradientPair, 3> channel_gradients(const ColorImage& img) {
  return {grad(img.plane(0), img.width(), img.height()), grad(img.plane(1), img.width(), img.height()),
          grad(img.plane(2), img.width(), img.height())};
}

}  // namespace detail

/// Saturation-value total variation evaluated from the saturation/value
/// magnitudes of the per-pixel gradient vectors.
inline double svtv_value(const ColorImage& img, double alpha) {
  if (alpha < 0.0) throw ConfigError("svtv: alpha must be nonnegative");
  const auto g = detail::channel_gradients(img);
  double sat = 0.0, val = 0.0;
  for (std::size_t n = 0; n < img.pixels(); ++n) {
    const double sx = saturation_magnitude(g[0].gx[n], g[1].gx[n], g[2].gx[n]);
    const double sy = saturation_magnitude(g[0].gy[n], g[1].gy[n], g[2].gy[n]);
    const double vx = value_magnitude(g[0].gx[n], g[1].gx[n], g[2].gx[n]);
    const double vy = value_magnitude(g[0].gy[n], g[1].gy[n], g[2].gy[n]);
    sat += std::sqrt(sx * sx + sy * sy);
    val += std::sqrt(vx * vx + vy * vy);
  }
  return sat + alpha * val;
}

/// The same functional in transformed coordinates s = P u.
inline double svtv_value_transformed(const ColorImage& img, double alpha) {
  const ColorImage s = apply_p(img);
  const auto g = detail::channel_gradients(s);
  double sat = 0.0, val = 0.0;
  for (std::size_t n = 0; n < img.pixels(); ++n) {
    sat += std::sqrt(g[0].gx[n] * g[0].gx[n] + g[0].gy[n] * g[0].gy[n] + g[1].gx[n] * g[1].gx[n] +
                     g[1].gy[n] * g[1].gy[n]);
    val += std::sqrt(g[2].gx[n] * g[2].gx[n] + g[2].gy[n] * g[2].gy[n]);
  }
  return sat + alpha * val;
}

/// Colour TV with a pixel-wise root over all channels and both directions.
inline double ctv2_value(const ColorImage& img) {
  const auto g = detail::channel_gradients(img);
  double s = 0.0;
  for (std::size_t n = 0; n < img.pixels(); ++n) {
    double m = 0.0;
    for (const auto& c : g) m += c.gx[n] * c.gx[n] + c.gy[n] * c.gy[n];
    s += std::sqrt(m);
  }
  return s;
}

/// Root of the squared per-channel isotropic TV totals.
inline double ctv1_value(const ColorImage& img) {
  const auto g = detail::channel_gradients(img);
  double s = 0.0;
  for (const auto& c : g) {
    double tv = 0.0;
    for (std::size_t n = 0; n < img.pixels(); ++n) tv += std::sqrt(c.gx[n] * c.gx[n] + c.gy[n] * c.gy[n]);
    s += tv * tv;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Grouped soft thresholding: the prox of thr * ||.||_2 applied per pixel to
// the vector formed by the planes in `group`.

inline void shrink_group(std::span<Plane* const> group, double thr) {
  if (thr < 0.0) throw ConfigError("shrinkage threshold must be nonnegative");
  if (group.empty()) return;
  const std::size_t n = group[0]->size();
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (Plane* p : group) m += (*p)[i] * (*p)[i];
    m = std::sqrt(m);
    const double scale = m > thr ? (m - thr) / m : 0.0;
    for (Plane* p : group) (*p)[i] *= scale;
  }
}

/// Prox of thr * ||.||_2 on a single vector.
inline std::vector<double> shrink(std::span<const double> z, double thr) {
  std::vector<double> out(z.begin(), z.end());
  double m = 0.0;
  for (double v : z) m += v * v;
  m = std::sqrt(m);
  const double scale = m > thr ? (m - thr) / m : 0.0;
  for (double& v : out) v *= scale;
  return out;
}

/// Saturation group: (tx1, ty1, tx2, ty2) shrunk jointly.
inline void shrink_sv(Plane& tx1, Plane& ty1, Plane& tx2, Plane& ty2, double thr) {
  std::array<Plane*, 4> g{&tx1, &ty1, &tx2, &ty2};
  shrink_group(g, thr);
}

/// Value group: (tx3, ty3).
inline void shrink_v(Plane& tx3, Plane& ty3, double thr) {
  std::array<Plane*, 2> g{&tx3, &ty3};
  shrink_group(g, thr);
}

}  // namespace cstv
