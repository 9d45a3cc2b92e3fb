#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cstv/error.hpp"

namespace cstv {

using Plane = std::vector<double>;

// Row-major grid of N real planes. Quaternion fields (N = 4) and RGB images
// (N = 3) share this storage; pixel (row, col) lives at index row * width + col.
template <std::size_t N>
class PlanarImage {
 public:
  static constexpr std::size_t channels = N;

  PlanarImage() = default;
  PlanarImage(std::size_t width, std::size_t height) : width_(width), height_(height) {
    for (auto& p : planes_) p.assign(width * height, 0.0);
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixels() const { return width_ * height_; }
  bool empty() const { return pixels() == 0; }

  Plane& plane(std::size_t c) { return planes_[c]; }
  const Plane& plane(std::size_t c) const { return planes_[c]; }
  std::array<Plane, N>& planes() { return planes_; }
  const std::array<Plane, N>& planes() const { return planes_; }

  double& at(std::size_t c, std::size_t row, std::size_t col) { return planes_[c][row * width_ + col]; }
  double at(std::size_t c, std::size_t row, std::size_t col) const { return planes_[c][row * width_ + col]; }

  bool same_shape(const PlanarImage& o) const { return width_ == o.width_ && height_ == o.height_; }

  bool all_finite() const {
    for (const auto& p : planes_)
      for (double v : p)
        if (!std::isfinite(v)) return false;
    return true;
  }

  PlanarImage& operator+=(const PlanarImage& o) {
    require_same(o);
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t i = 0; i < planes_[c].size(); ++i) planes_[c][i] += o.planes_[c][i];
    return *this;
  }
  PlanarImage& operator-=(const PlanarImage& o) {
    require_same(o);
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t i = 0; i < planes_[c].size(); ++i) planes_[c][i] -= o.planes_[c][i];
    return *this;
  }
  PlanarImage& operator*=(double s) {
    for (auto& p : planes_)
      for (double& v : p) v *= s;
    return *this;
  }
  // this += s * o
  PlanarImage& axpy(double s, const PlanarImage& o) {
    require_same(o);
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t i = 0; i < planes_[c].size(); ++i) planes_[c][i] += s * o.planes_[c][i];
    return *this;
  }

  friend PlanarImage operator+(PlanarImage a, const PlanarImage& b) { return a += b; }
  friend PlanarImage operator-(PlanarImage a, const PlanarImage& b) { return a -= b; }
  friend PlanarImage operator*(double s, PlanarImage a) { return a *= s; }
  friend bool operator==(const PlanarImage& a, const PlanarImage& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.planes_ == b.planes_;
  }

 private:
  void require_same(const PlanarImage& o) const {
    if (!same_shape(o)) throw ConfigError("image dimensions differ");
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::array<Plane, N> planes_;
};

// Sum over all samples of a*b, accumulated in a fixed order.
template <std::size_t N>
double dot(const PlanarImage<N>& a, const PlanarImage<N>& b) {
  if (!a.same_shape(b)) throw ConfigError("dot: dimensions differ");
  double s = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    const Plane& x = a.plane(c);
    const Plane& y = b.plane(c);
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  }
  return s;
}

template <std::size_t N>
double squared_norm(const PlanarImage<N>& a) {
  return dot(a, a);
}

template <std::size_t N>
double frobenius_norm(const PlanarImage<N>& a) {
  return std::sqrt(squared_norm(a));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace cstv
