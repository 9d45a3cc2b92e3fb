#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cstv/error.hpp"
#include "cstv/planar.hpp"

namespace cstv {

/// Real convolution kernel with an explicit centre. Tap (r, c) sits at spatial
/// offset (r - center_row, c - center_col).
struct Kernel {
  int rows = 1;
  int cols = 1;
  int center_row = 0;
  int center_col = 0;
  std::vector<double> taps{0.0};

  static Kernel zero() { return {}; }
  static Kernel delta() { return {1, 1, 0, 0, {1.0}}; }

  double at(int r, int c) const { return taps[static_cast<std::size_t>(r * cols + c)]; }
  double& at(int r, int c) { return taps[static_cast<std::size_t>(r * cols + c)]; }

  // Tap at spatial offset (dr, dc); zero outside the support.
  double at_offset(int dr, int dc) const {
    const int r = dr + center_row, c = dc + center_col;
    if (r < 0 || c < 0 || r >= rows || c >= cols) return 0.0;
    return at(r, c);
  }

  int min_row_offset() const { return -center_row; }
  int max_row_offset() const { return rows - 1 - center_row; }
  int min_col_offset() const { return -center_col; }
  int max_col_offset() const { return cols - 1 - center_col; }

  double sum() const {
    double s = 0.0;
    for (double t : taps) s += t;
    return s;
  }
  double squared_norm() const {
    double s = 0.0;
    for (double t : taps) s += t * t;
    return s;
  }
  bool is_zero() const {
    return std::all_of(taps.begin(), taps.end(), [](double t) { return t == 0.0; });
  }
};

/// Spatial reflection k(-x): the adjoint of convolution under periodic boundaries.
inline Kernel reflected(const Kernel& k) {
  Kernel out{k.rows, k.cols, k.rows - 1 - k.center_row, k.cols - 1 - k.center_col,
             std::vector<double>(k.taps.size())};
  for (int r = 0; r < k.rows; ++r)
    for (int c = 0; c < k.cols; ++c) out.at(k.rows - 1 - r, k.cols - 1 - c) = k.at(r, c);
  return out;
}

/// Sum of coef_i * k_i over the union of the supports.
inline Kernel linear_combination(const std::vector<std::pair<double, const Kernel*>>& terms) {
  int rmin = 0, rmax = 0, cmin = 0, cmax = 0;
  for (const auto& [coef, k] : terms) {
    rmin = std::min(rmin, k->min_row_offset());
    rmax = std::max(rmax, k->max_row_offset());
    cmin = std::min(cmin, k->min_col_offset());
    cmax = std::max(cmax, k->max_col_offset());
  }
  Kernel out{rmax - rmin + 1, cmax - cmin + 1, -rmin, -cmin, {}};
  out.taps.assign(static_cast<std::size_t>(out.rows * out.cols), 0.0);
  for (const auto& [coef, k] : terms) {
    if (coef == 0.0) continue;
    for (int r = 0; r < k->rows; ++r)
      for (int c = 0; c < k->cols; ++c)
        out.at(r - k->center_row + out.center_row, c - k->center_col + out.center_col) += coef * k->at(r, c);
  }
  return out;
}

inline Kernel operator*(double s, const Kernel& k) {
  Kernel out = k;
  for (double& t : out.taps) t *= s;
  return out;
}

inline Kernel operator+(const Kernel& a, const Kernel& b) { return linear_combination({{1.0, &a}, {1.0, &b}}); }
inline Kernel operator-(const Kernel& a, const Kernel& b) { return linear_combination({{1.0, &a}, {-1.0, &b}}); }

/// Point-spread function description.
struct KernelSpec {
  enum class Kind { gaussian, average, motion, delta, custom };
  Kind kind = Kind::delta;
  int size = 1;        // gaussian / average support (square)
  double sigma = 1.0;  // gaussian
  double length = 1;   // motion, pixels
  double angle = 0.0;  // motion, degrees counter-clockwise from the +column axis
  Kernel custom;       // custom taps

  static KernelSpec delta() { return {}; }
  static KernelSpec gaussian(int size, double sigma) { return {Kind::gaussian, size, sigma, 1, 0.0, {}}; }
  static KernelSpec average(int size) { return {Kind::average, size, 1.0, 1, 0.0, {}}; }
  static KernelSpec motion(double length, double angle) { return {Kind::motion, 1, 1.0, length, angle, {}}; }
  static KernelSpec custom_taps(Kernel k) { return {Kind::custom, 1, 1.0, 1, 0.0, std::move(k)}; }
};

inline std::string to_string(KernelSpec::Kind k) {
  switch (k) {
    case KernelSpec::Kind::gaussian: return "gaussian";
    case KernelSpec::Kind::average: return "average";
    case KernelSpec::Kind::motion: return "motion";
    case KernelSpec::Kind::delta: return "delta";
    case KernelSpec::Kind::custom: return "custom";
  }
  return "unknown";
}

namespace detail {

inline void normalize(Kernel& k) {
  const double s = k.sum();
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("kernel taps must have a positive finite sum");
  for (double& t : k.taps) t /= s;
}

// Nearest-pixel rasterisation of a centred segment, equal weights.
inline Kernel motion_kernel(double length, double angle_deg) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double half = (length - 1.0) / 2.0;
  const int samples = static_cast<int>(std::ceil(length)) * 16 + 1;
  std::set<std::pair<int, int>> cells;
  for (int s = 0; s < samples; ++s) {
    const double t = samples == 1 ? 0.0 : -half + 2.0 * half * s / (samples - 1);
    // Image rows grow downwards, so a positive angle moves up (negative row).
    const int dr = static_cast<int>(std::lround(-t * std::sin(theta)));
    const int dc = static_cast<int>(std::lround(t * std::cos(theta)));
    cells.insert({dr, dc});
  }
  int hr = 0, hc = 0;
  for (const auto& [dr, dc] : cells) {
    hr = std::max(hr, std::abs(dr));
    hc = std::max(hc, std::abs(dc));
  }
  Kernel k{2 * hr + 1, 2 * hc + 1, hr, hc, {}};
  k.taps.assign(static_cast<std::size_t>(k.rows * k.cols), 0.0);
  for (const auto& [dr, dc] : cells) k.at(dr + hr, dc + hc) = 1.0;
  normalize(k);
  return k;
}

}  // namespace detail

/// Normalised taps (sum 1) for a point-spread function.
inline Kernel make_kernel(const KernelSpec& spec) {
  using Kind = KernelSpec::Kind;
  switch (spec.kind) {
    case Kind::delta:
      return Kernel::delta();
    case Kind::average: {
      if (spec.size < 1) throw ConfigError("average kernel size must be positive");
      const int n = spec.size;
      return Kernel{n, n, n / 2, n / 2, std::vector<double>(static_cast<std::size_t>(n * n), 1.0 / (n * n))};
    }
    case Kind::gaussian: {
      if (spec.size < 1) throw ConfigError("gaussian kernel size must be positive");
      if (!(spec.sigma > 0.0)) throw ConfigError("gaussian sigma must be positive");
      const int n = spec.size;
      Kernel k{n, n, n / 2, n / 2, std::vector<double>(static_cast<std::size_t>(n * n))};
      const double mid = (n - 1) / 2.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          const double y = r - mid, x = c - mid;
          k.at(r, c) = std::exp(-(x * x + y * y) / (2.0 * spec.sigma * spec.sigma));
        }
      detail::normalize(k);
      return k;
    }
    case Kind::motion:
      if (!(spec.length >= 1.0)) throw ConfigError("motion length must be at least 1");
      if (!std::isfinite(spec.angle)) throw ConfigError("motion angle must be finite");
      return detail::motion_kernel(spec.length, spec.angle);
    case Kind::custom: {
      const Kernel& k = spec.custom;
      if (k.rows < 1 || k.cols < 1 || k.taps.size() != static_cast<std::size_t>(k.rows * k.cols))
        throw ConfigError("custom kernel taps do not match its dimensions");
      if (k.center_row < 0 || k.center_row >= k.rows || k.center_col < 0 || k.center_col >= k.cols)
        throw ConfigError("custom kernel centre lies outside its support");
      for (double t : k.taps)
        if (!std::isfinite(t)) throw ConfigError("custom kernel taps must be finite");
      if (std::abs(k.sum() - 1.0) > 1e-9) throw ConfigError("custom kernel taps must sum to 1");
      return k;
    }
  }
  throw ConfigError("unknown kernel kind");
}

/// Direct periodic convolution: out(y, x) = sum k(dy, dx) in(y - dy, x - dx).
/// Quadratic in kernel size; used as the reference for the FFT path.
inline Plane convolve_direct(const Plane& in, std::size_t width, std::size_t height, const Kernel& k) {
  Plane out(in.size(), 0.0);
  const auto h = static_cast<long>(height), w = static_cast<long>(width);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      double s = 0.0;
      for (int r = 0; r < k.rows; ++r)
        for (int c = 0; c < k.cols; ++c) {
          const double t = k.at(r, c);
          if (t == 0.0) continue;
          const long sy = ((y - (r - k.center_row)) % h + h) % h;
          const long sx = ((x - (c - k.center_col)) % w + w) % w;
          s += t * in[static_cast<std::size_t>(sy * w + sx)];
        }
      out[static_cast<std::size_t>(y * w + x)] = s;
    }
  return out;
}

}  // namespace cstv
