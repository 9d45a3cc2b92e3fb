#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "cstv/error.hpp"
#include "cstv/image.hpp"

namespace cstv {

namespace detail {

inline void require_same_shape(const ColorImage& a, const ColorImage& b, const char* what) {
  if (!a.same_shape(b) || a.empty()) throw ConfigError(std::string(what) + ": image dimensions differ or are empty");
}

}  // namespace detail

/// Mean squared difference over all samples on the [0,1] scale.
inline double mse(const ColorImage& restored, const ColorImage& reference) {
  detail::require_same_shape(restored, reference, "mse");
  double s = 0.0;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < restored.pixels(); ++i) {
      const double d = restored.plane(c)[i] - reference.plane(c)[i];
      s += d * d;
    }
  return s / static_cast<double>(3 * restored.pixels());
}

/// 10 log10(255^2 N / ||255 (x - y)||^2); +inf for identical images.
inline double psnr(const ColorImage& restored, const ColorImage& reference) {
  const double m = mse(restored, reference);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

namespace detail {

constexpr double kSsimC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kSsimC2 = (0.03 * 255.0) * (0.03 * 255.0);

inline double ssim_global_plane(const Plane& x, const Plane& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += 255.0 * x[i];
    my += 255.0 * y[i];
  }
  mx /= n;
  my /= n;
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = 255.0 * x[i] - mx, dy = 255.0 * y[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cxy += dx * dy;
  }
  vx /= n;
  vy /= n;
  cxy /= n;
  return (2.0 * mx * my + kSsimC1) * (2.0 * cxy + kSsimC2) / ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
}

// Mean SSIM map over all fully contained 11x11 Gaussian (sigma 1.5) windows.
inline double ssim_windowed_plane(const Plane& x, const Plane& y, std::size_t w, std::size_t h) {
  constexpr int r = 5;
  double g[2 * r + 1];
  double gs = 0.0;
  for (int i = -r; i <= r; ++i) gs += g[i + r] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
  for (double& v : g) v /= gs;
  if (w < 2 * r + 1 || h < 2 * r + 1) throw ConfigError("windowed ssim needs images of at least 11x11");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t row = r; row + r < h; ++row)
    for (std::size_t col = r; col + r < w; ++col) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int dr = -r; dr <= r; ++dr)
        for (int dc = -r; dc <= r; ++dc) {
          const double wt = g[dr + r] * g[dc + r];
          const std::size_t k = (row + dr) * w + (col + dc);
          const double a = 255.0 * x[k], b = 255.0 * y[k];
          mx += wt * a;
          my += wt * b;
          xx += wt * a * a;
          yy += wt * b * b;
          xy += wt * a * b;
        }
      const double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
      total += (2 * mx * my + kSsimC1) * (2 * cxy + kSsimC2) / ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
      ++count;
    }
  return total / static_cast<double>(count);
}

}  // namespace detail

enum class SsimMode { global, windowed };

/// Per-channel SSIM averaged over R, G, B. Global mode treats each channel as
/// one vectorised signal; windowed mode averages the usual local map.
inline double ssim(const ColorImage& restored, const ColorImage& reference, SsimMode mode = SsimMode::global) {
  detail::require_same_shape(restored, reference, "ssim");
  double s = 0.0;
  for (std::size_t c = 0; c < 3; ++c)
    s += mode == SsimMode::global
             ? detail::ssim_global_plane(restored.plane(c), reference.plane(c))
             : detail::ssim_windowed_plane(restored.plane(c), reference.plane(c), restored.width(), restored.height());
  return s / 3.0;
}

/// CIEDE2000 colour difference with kL = kC = kH = 1.
inline double ciede2000(double l1, double a1, double b1, double l2, double a2, double b2) {
  constexpr double pi = std::numbers::pi;
  constexpr double deg = pi / 180.0;
  const double c1 = std::hypot(a1, b1), c2 = std::hypot(a2, b2);
  const double cbar = 0.5 * (c1 + c2);
  const double cbar7 = std::pow(cbar, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(cbar7 / (cbar7 + std::pow(25.0, 7.0))));
  const double a1p = (1.0 + g) * a1, a2p = (1.0 + g) * a2;
  const double c1p = std::hypot(a1p, b1), c2p = std::hypot(a2p, b2);
  auto hue = [&](double b, double ap) {
    if (b == 0.0 && ap == 0.0) return 0.0;
    double h = std::atan2(b, ap);
    if (h < 0.0) h += 2.0 * pi;
    return h;
  };
  const double h1p = hue(b1, a1p), h2p = hue(b2, a2p);

  const double dl = l2 - l1;
  const double dc = c2p - c1p;
  double dh = 0.0;
  if (c1p * c2p != 0.0) {
    dh = h2p - h1p;
    if (dh > pi) dh -= 2.0 * pi;
    else if (dh < -pi) dh += 2.0 * pi;
  }
  const double dH = 2.0 * std::sqrt(c1p * c2p) * std::sin(dh / 2.0);

  const double lbar = 0.5 * (l1 + l2);
  const double cbarp = 0.5 * (c1p + c2p);
  double hbar = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::abs(h1p - h2p) <= pi) hbar = 0.5 * (h1p + h2p);
    else if (h1p + h2p < 2.0 * pi) hbar = 0.5 * (h1p + h2p + 2.0 * pi);
    else hbar = 0.5 * (h1p + h2p - 2.0 * pi);
  }
  const double t = 1.0 - 0.17 * std::cos(hbar - 30.0 * deg) + 0.24 * std::cos(2.0 * hbar) +
                   0.32 * std::cos(3.0 * hbar + 6.0 * deg) - 0.20 * std::cos(4.0 * hbar - 63.0 * deg);
  const double dtheta = 30.0 * deg * std::exp(-std::pow((hbar / deg - 275.0) / 25.0, 2.0));
  const double cbarp7 = std::pow(cbarp, 7.0);
  const double rc = 2.0 * std::sqrt(cbarp7 / (cbarp7 + std::pow(25.0, 7.0)));
  const double lb50 = (lbar - 50.0) * (lbar - 50.0);
  const double sl = 1.0 + 0.015 * lb50 / std::sqrt(20.0 + lb50);
  const double sc = 1.0 + 0.045 * cbarp;
  const double sh = 1.0 + 0.015 * cbarp * t;
  const double rt = -std::sin(2.0 * dtheta) * rc;
  const double x = dl / sl, y = dc / sc, z = dH / sh;
  return std::sqrt(x * x + y * y + z * z + rt * y * z);
}

/// Mean per-pixel CIEDE2000 after sRGB -> CIELAB conversion.
inline double ciede2000(const ColorImage& restored, const ColorImage& reference) {
  detail::require_same_shape(restored, reference, "ciede2000");
  const LabImage a = rgb_to_lab(restored), b = rgb_to_lab(reference);
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels(); ++i)
    s += ciede2000(a.plane(0)[i], a.plane(1)[i], a.plane(2)[i], b.plane(0)[i], b.plane(1)[i], b.plane(2)[i]);
  return s / static_cast<double>(a.pixels());
}

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double mse = 0.0;
  double ciede2000 = 0.0;
};

inline MetricReport evaluate(const ColorImage& restored, const ColorImage& reference,
                             SsimMode mode = SsimMode::global) {
  MetricReport r;
  r.mse = mse(restored, reference);
  r.psnr = r.mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / r.mse);
  r.ssim = ssim(restored, reference, mode);
  r.ciede2000 = ciede2000(restored, reference);
  return r;
}

}  // namespace cstv
