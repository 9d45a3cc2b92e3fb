#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cstv/error.hpp"
#include "cstv/image.hpp"
#include "cstv/kernel.hpp"
#include "cstv/quaternion.hpp"
#include "cstv/spectral.hpp"

namespace cstv {

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Cross-channel blur: output channel i = sum_j w_ij (K_ij * u_j).
struct CrossChannelBlur {
  std::array<std::array<KernelSpec, 3>, 3> kernels;
  Matrix3 weights{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  /// Weights in [0,1] with unit row sums; every kernel spec must build.
  void validate() const {
    for (int i = 0; i < 3; ++i) {
      double row = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double w = weights[i][j];
        if (!std::isfinite(w) || w < 0.0 || w > 1.0)
          throw ConfigError("blur weight w" + std::to_string(i + 1) + std::to_string(j + 1) + " outside [0,1]");
        row += w;
        (void)make_kernel(kernels[i][j]);
      }
      if (std::abs(row - 1.0) > 1e-9)
        throw ConfigError("blur weights are not row-stochastic (row " + std::to_string(i + 1) + " sums to " +
                          std::to_string(row) + ")");
    }
  }

  /// w_ij * K_ij
  Kernel weighted_kernel(int i, int j) const { return weights[i][j] * make_kernel(kernels[i][j]); }

  static CrossChannelBlur uniform(const KernelSpec& k, const Matrix3& w) {
    CrossChannelBlur b;
    for (auto& row : b.kernels) row.fill(k);
    b.weights = w;
    return b;
  }
};

inline std::vector<std::vector<Kernel>> weighted_kernel_grid(const CrossChannelBlur& blur) {
  std::vector<std::vector<Kernel>> grid(3, std::vector<Kernel>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) grid[i][j] = blur.weighted_kernel(i, j);
  return grid;
}

/// Periodic cross-channel blur evaluated with FFTs.
inline ColorImage apply_cross_channel(const CrossChannelBlur& blur, const ColorImage& img) {
  blur.validate();
  const auto op = SpectralBlock::from_kernels(weighted_kernel_grid(blur), img.width(), img.height());
  return op.apply<3, 3>(img);
}

/// Same operator by direct spatial summation.
inline ColorImage apply_cross_channel_direct(const CrossChannelBlur& blur, const ColorImage& img) {
  ColorImage out(img.width(), img.height());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Plane p = convolve_direct(img.plane(j), img.width(), img.height(), blur.weighted_kernel(i, j));
      for (std::size_t n = 0; n < p.size(); ++n) out.plane(i)[n] += p[n];
    }
  return out;
}

using KernelGrid4 = std::array<std::array<Kernel, 4>, 4>;

inline std::vector<std::vector<Kernel>> to_vector_grid(const KernelGrid4& g) {
  std::vector<std::vector<Kernel>> out(4, std::vector<Kernel>(4));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r][c] = g[r][c];
  return out;
}

inline double grid_squared_norm(const KernelGrid4& g) {
  double s = 0.0;
  for (const auto& row : g)
    for (const auto& k : row) s += k.squared_norm();
  return s;
}

/// Extended 4x4 blur acting on (u0, u1, u2, u3); the lower-right 3x3 is W (.) K.
struct ExtendedOperator {
  KernelGrid4 blocks;

  /// B_12 = B_13 = B_14 = 0, so the real output channel ignores colour input.
  bool satisfies_first_row_constraint() const {
    for (int c = 1; c < 4; ++c)
      if (!blocks[0][c].is_zero()) return false;
    return true;
  }
};

/// Zero first row and first column; lower-right block W (.) K.
inline ExtendedOperator choose_b_blocks(const CrossChannelBlur& blur) {
  blur.validate();
  ExtendedOperator b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b.blocks[i + 1][j + 1] = blur.weighted_kernel(i, j);
  return b;
}

/// Quaternion kernel Q0 + Q1 i + Q2 j + Q3 k.
struct QuaternionKernel {
  std::array<Kernel, 4> part;

  static QuaternionKernel delta() {
    QuaternionKernel q;
    q.part[0] = Kernel::delta();
    return q;
  }
};

/// 4x4 real-counterpart layout of a quaternion kernel.
inline KernelGrid4 real_counterpart(const QuaternionKernel& q) {
  KernelGrid4 g;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const auto [comp, sign] = kRealCounterpartPattern[r][c];
      g[r][c] = sign * q.part[static_cast<std::size_t>(comp)];
    }
  return g;
}

struct JrsSplit {
  QuaternionKernel q;
  KernelGrid4 residual;
};

/// B = Q + R with Q the projection of B onto real counterparts of quaternion
/// operators (the average of B under conjugation by the J, R, S structure
/// matrices). Component c of Q is 1/4 of the signed sum of the blocks that the
/// real-counterpart pattern assigns to c.
inline JrsSplit jrs_split(const ExtendedOperator& ext) {
  JrsSplit out;
  for (int comp = 0; comp < 4; ++comp) {
    std::vector<std::pair<double, const Kernel*>> terms;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        const auto [pc, sign] = kRealCounterpartPattern[r][c];
        if (pc == comp) terms.emplace_back(0.25 * sign, &ext.blocks[r][c]);
      }
    out.q.part[static_cast<std::size_t>(comp)] = linear_combination(terms);
  }
  const KernelGrid4 qr = real_counterpart(out.q);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.residual[r][c] = ext.blocks[r][c] - qr[r][c];
  return out;
}

enum class Boundary { periodic };

class BoundBlurOperator;

/// Extended blur B together with its quaternion part Q and residual R.
class QuaternionBlurOperator {
 public:
  QuaternionBlurOperator() : QuaternionBlurOperator(ExtendedOperator{}) {}
  explicit QuaternionBlurOperator(ExtendedOperator b, Boundary boundary = Boundary::periodic)
      : b_(std::move(b)), boundary_(boundary) {
    auto split = jrs_split(b_);
    q_ = std::move(split.q);
    r_ = std::move(split.residual);
  }

  static QuaternionBlurOperator from_blur(const CrossChannelBlur& blur) {
    return QuaternionBlurOperator(choose_b_blocks(blur));
  }

  const ExtendedOperator& extended() const { return b_; }
  const QuaternionKernel& q() const { return q_; }
  const KernelGrid4& residual() const { return r_; }
  Boundary boundary() const { return boundary_; }

  bool residual_is_zero() const {
    for (const auto& row : r_)
      for (const auto& k : row)
        if (!k.is_zero()) return false;
    return true;
  }

  /// ||R||_F / ||B||_F over the kernel taps.
  double residual_ratio() const {
    const double nb = grid_squared_norm(b_.blocks);
    return nb > 0.0 ? std::sqrt(grid_squared_norm(r_) / nb) : 0.0;
  }

  BoundBlurOperator bind(std::size_t width, std::size_t height) const;

 private:
  ExtendedOperator b_;
  QuaternionKernel q_;
  KernelGrid4 r_;
  Boundary boundary_;
};

/// Spectral form of a QuaternionBlurOperator on a fixed grid.
class BoundBlurOperator {
 public:
  BoundBlurOperator(const QuaternionBlurOperator& op, std::size_t width, std::size_t height)
      : b_(SpectralBlock::from_kernels(to_vector_grid(op.extended().blocks), width, height)),
        q_(SpectralBlock::from_kernels(to_vector_grid(real_counterpart(op.q())), width, height)),
        r_(SpectralBlock::from_kernels(to_vector_grid(op.residual()), width, height)),
        residual_zero_(op.residual_is_zero()) {}

  const SpectralBlock& b() const { return b_; }
  const SpectralBlock& q() const { return q_; }
  const SpectralBlock& r() const { return r_; }
  bool residual_is_zero() const { return residual_zero_; }

  QuaternionField apply_b(const QuaternionField& f) const { return b_.apply<4, 4>(f); }
  QuaternionField apply_b_adjoint(const QuaternionField& f) const { return b_.adjoint().apply<4, 4>(f); }
  QuaternionField apply_q(const QuaternionField& f) const { return q_.apply<4, 4>(f); }
  QuaternionField apply_q_adjoint(const QuaternionField& f) const { return q_.adjoint().apply<4, 4>(f); }
  QuaternionField apply_r(const QuaternionField& f) const { return r_.apply<4, 4>(f); }
  QuaternionField apply_r_adjoint(const QuaternionField& f) const { return r_.adjoint().apply<4, 4>(f); }

 private:
  SpectralBlock b_, q_, r_;
  bool residual_zero_;
};

inline BoundBlurOperator QuaternionBlurOperator::bind(std::size_t width, std::size_t height) const {
  return BoundBlurOperator(*this, width, height);
}

inline QuaternionField apply_q(const QuaternionBlurOperator& op, const QuaternionField& f) {
  return op.bind(f.width(), f.height()).apply_q(f);
}
inline QuaternionField apply_q_adjoint(const QuaternionBlurOperator& op, const QuaternionField& f) {
  return op.bind(f.width(), f.height()).apply_q_adjoint(f);
}
inline QuaternionField apply_r(const QuaternionBlurOperator& op, const QuaternionField& f) {
  return op.bind(f.width(), f.height()).apply_r(f);
}
inline QuaternionField apply_r_adjoint(const QuaternionBlurOperator& op, const QuaternionField& f) {
  return op.bind(f.width(), f.height()).apply_r_adjoint(f);
}
inline QuaternionField apply_b(const QuaternionBlurOperator& op, const QuaternionField& f) {
  return op.bind(f.width(), f.height()).apply_b(f);
}
inline QuaternionField apply_b_adjoint(const QuaternionBlurOperator& op, const QuaternionField& f) {
  return op.bind(f.width(), f.height()).apply_b_adjoint(f);
}

}  // namespace cstv
