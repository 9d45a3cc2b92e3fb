#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "cstv/error.hpp"
#include "cstv/kernel.hpp"
#include "cstv/planar.hpp"

namespace cstv {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

namespace detail {

struct FftPlan {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Planning is not thread-safe in FFTW; execution with the new-array interface is.
inline const FftPlan& fft_plan(std::size_t height, std::size_t width) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, FftPlan> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({height, width});
  if (it != cache.end()) return it->second;
  const auto h = static_cast<int>(height), w = static_cast<int>(width);
  std::vector<double> real(height * width);
  std::vector<Complex> spec(height * (width / 2 + 1));
  auto* cs = reinterpret_cast<fftw_complex*>(spec.data());
  FftPlan p;
  p.forward = fftw_plan_dft_r2c_2d(h, w, real.data(), cs, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inverse = fftw_plan_dft_c2r_2d(h, w, cs, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.forward || !p.inverse) throw NumericalError("FFTW planning failed");
  return cache.emplace(std::make_pair(height, width), p).first->second;
}

}  // namespace detail

inline std::size_t spectrum_size(std::size_t height, std::size_t width) { return height * (width / 2 + 1); }

inline Spectrum fft_forward(const Plane& in, std::size_t width, std::size_t height) {
  const auto& plan = detail::fft_plan(height, width);
  Spectrum out(spectrum_size(height, width));
  // r2c leaves its input intact; the cast only satisfies the C signature.
  fftw_execute_dft_r2c(plan.forward, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

/// Inverse transform, normalised so that fft_inverse(fft_forward(x)) == x.
inline Plane fft_inverse(Spectrum in, std::size_t width, std::size_t height) {
  const auto& plan = detail::fft_plan(height, width);
  Plane out(width * height);
  fftw_execute_dft_c2r(plan.inverse, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(width * height);
  for (double& v : out) v *= scale;
  return out;
}

/// Weights for the r2c half spectrum such that sum_f weight[f] * Re(conj(X_f) Y_f)
/// equals the real inner product of the two signals.
inline std::vector<double> parseval_weights(std::size_t width, std::size_t height) {
  const std::size_t wc = width / 2 + 1;
  std::vector<double> out(spectrum_size(height, width));
  const double n = static_cast<double>(width * height);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < wc; ++c) {
      const bool self_conjugate = c == 0 || (width % 2 == 0 && c == width / 2);
      out[r * wc + c] = (self_conjugate ? 1.0 : 2.0) / n;
    }
  return out;
}

/// N planes held as half spectra.
template <std::size_t N>
struct SpectralField {
  std::array<Spectrum, N> part;

  SpectralField() = default;
  explicit SpectralField(std::size_t frequencies) {
    for (auto& p : part) p.assign(frequencies, Complex(0.0));
  }

  std::size_t frequencies() const { return part[0].size(); }

  SpectralField& axpy(double s, const SpectralField& o) {
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t f = 0; f < part[c].size(); ++f) part[c][f] += s * o.part[c][f];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& p : part)
      for (auto& v : p) v *= s;
    return *this;
  }
};

template <std::size_t N>
double spectral_dot(const SpectralField<N>& a, const SpectralField<N>& b, const std::vector<double>& weights) {
  double s = 0.0;
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t f = 0; f < weights.size(); ++f)
      s += weights[f] * (a.part[c][f].real() * b.part[c][f].real() + a.part[c][f].imag() * b.part[c][f].imag());
  return s;
}

template <std::size_t N>
SpectralField<N> to_spectral(const PlanarImage<N>& img) {
  SpectralField<N> out;
  for (std::size_t c = 0; c < N; ++c) out.part[c] = fft_forward(img.plane(c), img.width(), img.height());
  return out;
}

template <std::size_t N>
PlanarImage<N> from_spectral(const SpectralField<N>& s, std::size_t width, std::size_t height) {
  PlanarImage<N> out(width, height);
  for (std::size_t c = 0; c < N; ++c) out.plane(c) = fft_inverse(s.part[c], width, height);
  return out;
}

/// Transfer function of periodic convolution with `k` on a height x width grid.
inline Spectrum kernel_spectrum(const Kernel& k, std::size_t width, std::size_t height) {
  if (static_cast<std::size_t>(k.rows) > height || static_cast<std::size_t>(k.cols) > width)
    throw ConfigError("kernel support exceeds image dimensions");
  Plane psf(width * height, 0.0);
  const auto h = static_cast<long>(height), w = static_cast<long>(width);
  for (int r = 0; r < k.rows; ++r)
    for (int c = 0; c < k.cols; ++c) {
      const long y = ((r - k.center_row) % h + h) % h;
      const long x = ((c - k.center_col) % w + w) % w;
      psf[static_cast<std::size_t>(y * w + x)] += k.at(r, c);
    }
  return fft_forward(psf, width, height);
}

/// Block operator whose blocks are periodic convolutions, held as transfer
/// functions on a fixed grid. Empty blocks are structural zeros.
class SpectralBlock {
 public:
  SpectralBlock() = default;
  SpectralBlock(std::size_t rows, std::size_t cols, std::size_t width, std::size_t height)
      : rows_(rows), cols_(cols), width_(width), height_(height), blocks_(rows * cols) {}

  static SpectralBlock from_kernels(const std::vector<std::vector<Kernel>>& grid, std::size_t width,
                                    std::size_t height) {
    SpectralBlock op(grid.size(), grid.empty() ? 0 : grid[0].size(), width, height);
    for (std::size_t r = 0; r < op.rows_; ++r)
      for (std::size_t c = 0; c < op.cols_; ++c)
        if (!grid[r][c].is_zero()) op.blocks_[r * op.cols_ + c] = kernel_spectrum(grid[r][c], width, height);
    return op;
  }

  static SpectralBlock identity(std::size_t n, std::size_t width, std::size_t height, double scale = 1.0) {
    SpectralBlock op(n, n, width, height);
    for (std::size_t i = 0; i < n; ++i) op.blocks_[i * n + i].assign(spectrum_size(height, width), Complex(scale));
    return op;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t frequencies() const { return spectrum_size(height_, width_); }

  bool is_zero(std::size_t r, std::size_t c) const { return blocks_[r * cols_ + c].empty(); }
  const Spectrum& block(std::size_t r, std::size_t c) const { return blocks_[r * cols_ + c]; }
  Spectrum& block(std::size_t r, std::size_t c) { return blocks_[r * cols_ + c]; }

  // Transfer value of block (r, c) at frequency f (zero for structural zeros).
  Complex at(std::size_t r, std::size_t c, std::size_t f) const {
    const Spectrum& b = blocks_[r * cols_ + c];
    return b.empty() ? Complex(0.0) : b[f];
  }

  /// Conjugate transpose: adjoint under periodic boundaries for real kernels.
  SpectralBlock adjoint() const {
    SpectralBlock out(cols_, rows_, width_, height_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) {
        const Spectrum& b = block(r, c);
        if (b.empty()) continue;
        Spectrum& o = out.block(c, r);
        o.resize(b.size());
        for (std::size_t f = 0; f < b.size(); ++f) o[f] = std::conj(b[f]);
      }
    return out;
  }

  /// Composition (a * b)(x) = a(b(x)).
  friend SpectralBlock operator*(const SpectralBlock& a, const SpectralBlock& b) {
    if (a.cols_ != b.rows_ || !a.same_grid(b)) throw ConfigError("spectral composition: shape mismatch");
    SpectralBlock out(a.rows_, b.cols_, a.width_, a.height_);
    const std::size_t nf = a.frequencies();
    for (std::size_t r = 0; r < a.rows_; ++r)
      for (std::size_t c = 0; c < b.cols_; ++c)
        for (std::size_t k = 0; k < a.cols_; ++k) {
          if (a.is_zero(r, k) || b.is_zero(k, c)) continue;
          Spectrum& o = out.block(r, c);
          if (o.empty()) o.assign(nf, Complex(0.0));
          const Spectrum& x = a.block(r, k);
          const Spectrum& y = b.block(k, c);
          for (std::size_t f = 0; f < nf; ++f) o[f] += x[f] * y[f];
        }
    return out;
  }

  friend SpectralBlock operator+(const SpectralBlock& a, const SpectralBlock& b) { return combine(a, b, 1.0); }
  friend SpectralBlock operator-(const SpectralBlock& a, const SpectralBlock& b) { return combine(a, b, -1.0); }

  /// Applies the operator to N input planes, producing rows() output planes.
  std::vector<Plane> apply(const std::vector<const Plane*>& in) const {
    if (in.size() != cols_) throw ConfigError("spectral apply: channel count mismatch");
    const std::size_t nf = frequencies();
    std::vector<Spectrum> fin(cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
      bool used = false;
      for (std::size_t r = 0; r < rows_; ++r) used = used || !is_zero(r, c);
      if (used) fin[c] = fft_forward(*in[c], width_, height_);
    }
    std::vector<Plane> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      Spectrum acc;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (is_zero(r, c)) continue;
        if (acc.empty()) acc.assign(nf, Complex(0.0));
        const Spectrum& b = block(r, c);
        const Spectrum& x = fin[c];
        for (std::size_t f = 0; f < nf; ++f) acc[f] += b[f] * x[f];
      }
      out[r] = acc.empty() ? Plane(width_ * height_, 0.0) : fft_inverse(std::move(acc), width_, height_);
    }
    return out;
  }

  /// Frequency-domain application to spectra of matching grid.
  template <std::size_t NOut, std::size_t NIn>
  SpectralField<NOut> multiply(const SpectralField<NIn>& x) const {
    if (NOut != rows_ || NIn != cols_) throw ConfigError("spectral multiply: operator shape mismatch");
    const std::size_t nf = frequencies();
    SpectralField<NOut> out(nf);
    for (std::size_t r = 0; r < NOut; ++r)
      for (std::size_t c = 0; c < NIn; ++c) {
        if (is_zero(r, c)) continue;
        const Spectrum& b = block(r, c);
        const Spectrum& xs = x.part[c];
        Spectrum& o = out.part[r];
        for (std::size_t f = 0; f < nf; ++f) o[f] += b[f] * xs[f];
      }
    return out;
  }

  template <std::size_t NOut, std::size_t NIn>
  PlanarImage<NOut> apply(const PlanarImage<NIn>& img) const {
    if (NOut != rows_ || NIn != cols_) throw ConfigError("spectral apply: operator shape mismatch");
    if (img.width() != width_ || img.height() != height_) throw ConfigError("spectral apply: grid size mismatch");
    std::vector<const Plane*> in;
    for (std::size_t c = 0; c < NIn; ++c) in.push_back(&img.plane(c));
    auto planes = apply(in);
    PlanarImage<NOut> out(width_, height_);
    for (std::size_t r = 0; r < NOut; ++r) out.plane(r) = std::move(planes[r]);
    return out;
  }

 private:
  bool same_grid(const SpectralBlock& o) const { return width_ == o.width_ && height_ == o.height_; }

  static SpectralBlock combine(const SpectralBlock& a, const SpectralBlock& b, double sb) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || !a.same_grid(b)) throw ConfigError("spectral sum: shape mismatch");
    SpectralBlock out = a;
    for (std::size_t i = 0; i < out.blocks_.size(); ++i) {
      const Spectrum& y = b.blocks_[i];
      if (y.empty()) continue;
      Spectrum& o = out.blocks_[i];
      if (o.empty()) o.assign(y.size(), Complex(0.0));
      for (std::size_t f = 0; f < y.size(); ++f) o[f] += sb * y[f];
    }
    return out;
  }

  std::size_t rows_ = 0, cols_ = 0, width_ = 0, height_ = 0;
  std::vector<Spectrum> blocks_;
};

}  // namespace cstv
