#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "cstv/blur.hpp"
#include "cstv/error.hpp"
#include "cstv/image.hpp"
#include "cstv/quaternion.hpp"
#include "cstv/regularizers.hpp"
#include "cstv/spectral.hpp"

namespace cstv {

struct SolverParams {
  double lambda1 = 8e-4;
  double lambda2 = 2e-4;
  double alpha1 = 0.28;
  double alpha2 = 0.06;
  double alpha_sv = 1.0;  // weight of the value term inside SVTV
  double beta = 1.0;      // ADMM penalty
  double tol = 1e-5;      // outer relative change
  int max_outer = 300;
  int max_inner_u = 50;
  int max_admm = 1;  // ADMM sweeps per outer iteration
  double damping = 1.0;       // used when auto_damping is off
  bool auto_damping = true;   // theta = 2 / (mu_min + mu_max) of the splitting spectrum
  double inner_tol = 1e-5;    // u-step relative change
  double cg_tol = 1e-8;       // relative residual for QCG
  int cg_max_iter = 500;
  bool admm_reset = false;   // zero the multipliers at each outer iteration
  bool strict_stop = false;  // also require u and w to settle

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(lambda1) || lambda1 < 0.0) throw ConfigError("lambda1 must be nonnegative");
    if (!finite(lambda2) || lambda2 < 0.0) throw ConfigError("lambda2 must be nonnegative");
    if (!finite(alpha1) || alpha1 <= 0.0) throw ConfigError("alpha1 must be positive");
    if (!finite(alpha2) || alpha2 <= 0.0) throw ConfigError("alpha2 must be positive");
    if (!finite(alpha_sv) || alpha_sv < 0.0) throw ConfigError("alpha_sv must be nonnegative");
    if (!finite(beta) || beta <= 0.0) throw ConfigError("beta must be positive");
    if (!finite(tol) || tol <= 0.0) throw ConfigError("tol must be positive");
    if (!finite(inner_tol) || inner_tol <= 0.0) throw ConfigError("inner_tol must be positive");
    if (!finite(cg_tol) || cg_tol <= 0.0) throw ConfigError("cg_tol must be positive");
    if (max_outer < 1 || max_inner_u < 1 || max_admm < 1 || cg_max_iter < 1)
      throw ConfigError("iteration caps must be at least 1");
    if (!auto_damping && (!finite(damping) || damping <= 0.0 || damping > 1.0))
      throw ConfigError("damping must lie in (0, 1]");
  }
};

/// Which regularizers are present. Disabling one removes its splitting
/// variable and coupling term altogether.
struct ModelTerms {
  bool svtv = true;
  bool ctv = true;
};

// ---------------------------------------------------------------------------
// Quaternion conjugate gradient.

template <class Vec>
struct QcgResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_norms;  // ||r_k||, starting with the initial residual
};

/// CG for a Hermitian positive-definite operator under a real inner product.
/// Vec needs copy, axpy(s, v) and operator*=(s). Stops once ||r|| <= tol.
template <class Vec, class ApplyA, class Dot>
QcgResult<Vec> qcg_solve(ApplyA&& apply_a, const Vec& b, Vec x0, Dot&& dot, double tol, int max_iter) {
  QcgResult<Vec> res;
  res.x = std::move(x0);
  Vec r = b;
  r.axpy(-1.0, apply_a(res.x));
  double rr = dot(r, r);
  if (!std::isfinite(rr)) throw NumericalError("qcg: non-finite residual");
  res.residual_norms.push_back(std::sqrt(rr));
  Vec p = r;
  while (std::sqrt(rr) > tol && res.iterations < max_iter) {
    const Vec q = apply_a(p);
    const double pq = dot(p, q);
    if (!std::isfinite(pq)) throw NumericalError("qcg: non-finite curvature");
    if (pq <= 0.0) throw NumericalError("qcg: operator is not positive definite");
    const double a = rr / pq;
    res.x.axpy(a, p);
    r.axpy(-a, q);
    const double rr_next = dot(r, r);
    if (!std::isfinite(rr_next)) throw NumericalError("qcg: non-finite residual");
    const double bk = rr_next / rr;
    rr = rr_next;
    p *= bk;
    p.axpy(1.0, r);
    ++res.iterations;
    res.residual_norms.push_back(std::sqrt(rr));
  }
  res.converged = std::sqrt(rr) <= tol;
  return res;
}

/// QCG on quaternion fields with qdot as inner product, starting from zero.
template <class ApplyA>
QcgResult<QuaternionField> qcg(ApplyA&& apply_a, const QuaternionField& b, double tol, int max_iter) {
  return qcg_solve(std::forward<ApplyA>(apply_a), b, QuaternionField(b.width(), b.height()),
                   [](const QuaternionField& x, const QuaternionField& y) { return qdot(x, y); }, tol, max_iter);
}

// ---------------------------------------------------------------------------
// u-subproblem: [Q^T Q + a I] u_{k+1} = -(B^T B - Q^T Q) u_k + B^T z + a1 w + a2 v,
// a = a1 + a2. Every operator is block diagonal in frequency, so the whole
// iteration (QCG included) runs on half spectra; the Parseval-weighted inner
// product equals qdot, so the iterates are those of the spatial method.

using SpectralQField = SpectralField<4>;

class SplittingSystem {
 public:
  SplittingSystem(const QuaternionBlurOperator& op, std::size_t width, std::size_t height, double alpha)
      : width_(width), height_(height), alpha_(alpha), weights_(parseval_weights(width, height)) {
    const BoundBlurOperator bound = op.bind(width, height);
    b_ = bound.b();
    bt_ = b_.adjoint();
    const SpectralBlock qtq = bound.q().adjoint() * bound.q();
    btb_ = bt_ * b_;
    lhs_ = qtq + SpectralBlock::identity(4, width, height, alpha);
    coupling_ = btb_ - qtq;
    residual_zero_ = op.residual_is_zero();
    compute_spectrum();
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& weights() const { return weights_; }
  bool residual_is_zero() const { return residual_zero_; }

  SpectralQField apply_lhs(const SpectralQField& x) const { return lhs_.multiply<4, 4>(x); }
  SpectralQField apply_coupling(const SpectralQField& x) const { return coupling_.multiply<4, 4>(x); }
  SpectralQField apply_b(const SpectralQField& x) const { return b_.multiply<4, 4>(x); }
  SpectralQField apply_bt(const SpectralQField& x) const { return bt_.multiply<4, 4>(x); }
  SpectralQField apply_normal(const SpectralQField& x) const {
    SpectralQField y = btb_.multiply<4, 4>(x);
    y.axpy(alpha_, x);
    return y;
  }

  double dot(const SpectralQField& a, const SpectralQField& b) const { return spectral_dot(a, b, weights_); }

  /// Extreme eigenvalues of the pencil (B^T B + a, Q^T Q + a) over all
  /// frequencies. The damped update u + theta (u_tilde - u) contracts at
  /// max |1 - theta mu|.
  double mu_min() const { return mu_min_; }
  double mu_max() const { return mu_max_; }
  double contraction(double theta) const {
    return std::max(std::abs(1.0 - theta * mu_min_), std::abs(1.0 - theta * mu_max_));
  }
  double optimal_damping() const { return 2.0 / (mu_min_ + mu_max_); }

 private:
  void compute_spectrum() {
    if (residual_zero_) {
      mu_min_ = mu_max_ = 1.0;
      return;
    }
    mu_min_ = std::numeric_limits<double>::infinity();
    mu_max_ = 0.0;
    Eigen::Matrix4cd m1, m2;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix4cd> es;
    for (std::size_t f = 0; f < lhs_.frequencies(); ++f) {
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          m1(r, c) = btb_.at(r, c, f);
          m2(r, c) = lhs_.at(r, c, f);
        }
      for (int i = 0; i < 4; ++i) m1(i, i) += alpha_;
      es.compute(m1, m2, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw NumericalError("splitting spectrum: eigen solver failed");
      mu_min_ = std::min(mu_min_, es.eigenvalues().minCoeff());
      mu_max_ = std::max(mu_max_, es.eigenvalues().maxCoeff());
    }
  }

  std::size_t width_, height_;
  double alpha_;
  std::vector<double> weights_;
  SpectralBlock b_, bt_, btb_, lhs_, coupling_;
  bool residual_zero_ = false;
  double mu_min_ = 1.0, mu_max_ = 1.0;
};

struct UStepInfo {
  int iterations = 0;
  int cg_iterations = 0;
  bool cg_converged = true;
  bool converged = false;
  double err_u = std::numeric_limits<double>::infinity();
};

/// Runs the splitting iteration in place on u_hat. rhs_hat = B^T z + a1 w + a2 v.
inline UStepInfo u_step(SpectralQField& u_hat, const SpectralQField& rhs_hat, const SplittingSystem& sys,
                        const SolverParams& p, double theta) {
  UStepInfo info;
  const auto dot = [&](const SpectralQField& a, const SpectralQField& b) { return sys.dot(a, b); };
  const auto lhs = [&](const SpectralQField& x) { return sys.apply_lhs(x); };
  std::vector<double> changes;
  const int max_iter = sys.residual_is_zero() ? 1 : p.max_inner_u;
  while (info.iterations < max_iter) {
    SpectralQField rhs = rhs_hat;
    if (!sys.residual_is_zero()) rhs.axpy(-1.0, sys.apply_coupling(u_hat));
    const double rhs_norm = std::sqrt(dot(rhs, rhs));
    auto cg = qcg_solve(lhs, rhs, u_hat, dot, p.cg_tol * std::max(rhs_norm, 1e-300), p.cg_max_iter);
    info.cg_iterations += cg.iterations;
    info.cg_converged = info.cg_converged && cg.converged;

    SpectralQField delta = std::move(cg.x);
    delta.axpy(-1.0, u_hat);
    if (theta != 1.0) delta *= theta;
    const double prev = dot(u_hat, u_hat);
    const double change = dot(delta, delta);
    u_hat.axpy(1.0, delta);
    ++info.iterations;
    if (!std::isfinite(change)) throw NumericalError("u-step: non-finite iterate");

    info.err_u = prev > 0.0 ? change / prev : (change > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (info.err_u <= p.inner_tol) {
      info.converged = true;
      break;
    }
    changes.push_back(std::sqrt(change));
    const std::size_t n = changes.size();
    if (n > 5 && changes[n - 1] > 10.0 * changes[n - 6]) {
      bool rising = true;
      for (std::size_t i = n - 5; i < n; ++i) rising = rising && changes[i] > changes[i - 1];
      if (rising)
        throw NumericalError("u-step: splitting iteration diverges (contraction factor " +
                             std::to_string(sys.contraction(theta)) +
                             "); use damping \"auto\" or larger alpha1 + alpha2");
    }
  }
  if (sys.residual_is_zero()) info.converged = true;
  return info;
}

/// Damping factor to use; rejects settings for which the splitting
/// iteration cannot converge.
inline double resolve_damping(const SplittingSystem& sys, const SolverParams& p) {
  const double theta = p.auto_damping ? sys.optimal_damping() : p.damping;
  if (!sys.residual_is_zero() && sys.contraction(theta) >= 1.0)
    throw NumericalError("u-step: splitting iteration diverges for damping " + std::to_string(theta) +
                         " (contraction factor " + std::to_string(sys.contraction(theta)) +
                         "); use damping \"auto\" or larger alpha1 + alpha2");
  return theta;
}

/// Spatial convenience form: one u-step from `u` with fixed w and v.
inline QuaternionField u_step(const QuaternionField& u, const ColorImage& z, const ColorImage& w, const ColorImage& v,
                              const QuaternionBlurOperator& op, const SolverParams& p, UStepInfo* info = nullptr) {
  p.validate();
  const std::size_t wd = z.width(), ht = z.height();
  const SplittingSystem sys(op, wd, ht, p.alpha1 + p.alpha2);
  ColorImage mix = p.alpha1 * w;
  mix.axpy(p.alpha2, v);
  SpectralQField rhs = sys.apply_bt(to_spectral(to_quaternion_field(z)));
  rhs.axpy(1.0, to_spectral(to_quaternion_field(mix)));
  SpectralQField u_hat = to_spectral(u);
  const UStepInfo i = u_step(u_hat, rhs, sys, p, resolve_damping(sys, p));
  if (info) *info = i;
  return from_spectral(u_hat, wd, ht);
}

// ---------------------------------------------------------------------------
// w- and v-subproblems: ADMM on  min_x  g(D x) + 1/2 ||x - q||^2  with the
// splitting t = D x.

struct AdmmState {
  std::array<Plane, 3> tx, ty, taux, tauy;

  AdmmState() = default;
  explicit AdmmState(std::size_t pixels) { reset(pixels); }
  void reset(std::size_t pixels) {
    for (int i = 0; i < 3; ++i) {
      tx[i].assign(pixels, 0.0);
      ty[i].assign(pixels, 0.0);
      taux[i].assign(pixels, 0.0);
      tauy[i].assign(pixels, 0.0);
    }
  }
  bool initialized(std::size_t pixels) const { return tx[0].size() == pixels; }
};

enum class Grouping {
  saturation_value,  // {ch1, ch2} jointly with threshold a, ch3 with threshold b
  joint              // all three channels together with threshold a
};

/// Eigenvalues of I + beta (Dx^T Dx + Dy^T Dy) on the r2c half spectrum.
inline std::vector<double> tv_system_spectrum(std::size_t width, std::size_t height, double beta) {
  const std::size_t wc = width / 2 + 1;
  std::vector<double> out(height * wc);
  for (std::size_t r = 0; r < height; ++r) {
    const double sr = std::sin(std::numbers::pi * static_cast<double>(r) / static_cast<double>(height));
    for (std::size_t c = 0; c < wc; ++c) {
      const double sc = std::sin(std::numbers::pi * static_cast<double>(c) / static_cast<double>(width));
      out[r * wc + c] = 1.0 + beta * 4.0 * (sr * sr + sc * sc);
    }
  }
  return out;
}

/// `sweeps` rounds of shrink / solve / multiplier update on x (in place).
inline void admm_tv_prox(ColorImage& x, const ColorImage& q, AdmmState& st, Grouping grouping, double thr_a,
                         double thr_b, double beta, int sweeps) {
  const std::size_t w = x.width(), h = x.height(), n = x.pixels();
  if (!st.initialized(n)) st.reset(n);
  const std::vector<double> eig = tv_system_spectrum(w, h, beta);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // Step one: shrink D x - tau / beta.
    for (int i = 0; i < 3; ++i) {
      st.tx[i] = diff_x(x.plane(i), w, h);
      st.ty[i] = diff_y(x.plane(i), w, h);
      for (std::size_t k = 0; k < n; ++k) {
        st.tx[i][k] -= st.taux[i][k] / beta;
        st.ty[i][k] -= st.tauy[i][k] / beta;
      }
    }
    if (grouping == Grouping::saturation_value) {
      shrink_sv(st.tx[0], st.ty[0], st.tx[1], st.ty[1], thr_a);
      shrink_v(st.tx[2], st.ty[2], thr_b);
    } else {
      std::array<Plane*, 6> g{&st.tx[0], &st.ty[0], &st.tx[1], &st.ty[1], &st.tx[2], &st.ty[2]};
      shrink_group(g, thr_a);
    }
    // Step two: (I + beta D^T D) x = q + D^T (tau + beta t).
    for (int i = 0; i < 3; ++i) {
      Plane px(n), py(n);
      for (std::size_t k = 0; k < n; ++k) {
        px[k] = st.taux[i][k] + beta * st.tx[i][k];
        py[k] = st.tauy[i][k] + beta * st.ty[i][k];
      }
      Plane rhs = grad_adjoint({std::move(px), std::move(py)}, w, h);
      for (std::size_t k = 0; k < n; ++k) rhs[k] += q.plane(i)[k];
      Spectrum s = fft_forward(rhs, w, h);
      for (std::size_t f = 0; f < s.size(); ++f) s[f] /= eig[f];
      x.plane(i) = fft_inverse(std::move(s), w, h);
    }
    // Step three: tau += beta (t - D x).
    for (int i = 0; i < 3; ++i) {
      const Plane dx = diff_x(x.plane(i), w, h);
      const Plane dy = diff_y(x.plane(i), w, h);
      for (std::size_t k = 0; k < n; ++k) {
        st.taux[i][k] += beta * (st.tx[i][k] - dx[k]);
        st.tauy[i][k] += beta * (st.ty[i][k] - dy[k]);
      }
    }
  }
}

/// argmin_w  lambda1 SVTV(w) + alpha1/2 ||w - u||^2, approached by ADMM in
/// the coordinates s = P w. `w` is the previous iterate.
inline ColorImage w_step(const ColorImage& u, const ColorImage& w, AdmmState& st, const SolverParams& p,
                         int sweeps) {
  if (p.lambda1 == 0.0) {
    st.reset(u.pixels());
    return u;
  }
  const ColorImage q = apply_p(u);
  ColorImage s = apply_p(w);
  const double thr = p.lambda1 / (p.beta * p.alpha1);
  admm_tv_prox(s, q, st, Grouping::saturation_value, thr, p.alpha_sv * thr, p.beta, sweeps);
  return apply_p_inverse(s);
}

/// argmin_v  lambda2 CTV2(v) + alpha2/2 ||v - u||^2 by the same ADMM without P.
inline ColorImage v_step(const ColorImage& u, const ColorImage& v, AdmmState& st, const SolverParams& p,
                         int sweeps) {
  if (p.lambda2 == 0.0) {
    st.reset(u.pixels());
    return u;
  }
  ColorImage x = v;
  const double thr = p.lambda2 / (p.beta * p.alpha2);
  admm_tv_prox(x, u, st, Grouping::joint, thr, thr, p.beta, sweeps);
  return x;
}

/// Objective of the w-subproblem.
inline double w_objective(const ColorImage& w, const ColorImage& u, const SolverParams& p) {
  return p.lambda1 * svtv_value(w, p.alpha_sv) + 0.5 * p.alpha1 * squared_norm(w - u);
}

/// Objective of the v-subproblem.
inline double v_objective(const ColorImage& v, const ColorImage& u, const SolverParams& p) {
  return p.lambda2 * ctv2_value(v) + 0.5 * p.alpha2 * squared_norm(v - u);
}

// ---------------------------------------------------------------------------
// Objective and outer loop.

/// lambda1 SVTV(u) + lambda2 CTV2(u) + 1/2 ||B u - z||^2, with u the colour
/// part of the field and B the extended blur acting on (0, z)'s space.
inline double energy(const QuaternionField& u, const ColorImage& z, const QuaternionBlurOperator& op,
                     const SolverParams& p, ModelTerms terms = {}) {
  if (!u.same_shape(QuaternionField(z.width(), z.height()))) throw ConfigError("energy: dimension mismatch");
  QuaternionField r = apply_b(op, u);
  r -= to_quaternion_field(z);
  const ColorImage rgb = from_quaternion_field(u);
  double e = 0.5 * squared_norm(r);
  if (terms.svtv) e += p.lambda1 * svtv_value(rgb, p.alpha_sv);
  if (terms.ctv) e += p.lambda2 * ctv2_value(rgb);
  return e;
}

inline double energy(const ColorImage& u, const ColorImage& z, const QuaternionBlurOperator& op,
                     const SolverParams& p, ModelTerms terms = {}) {
  return energy(to_quaternion_field(u), z, op, p, terms);
}

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double err = 0.0;    // relative change of v (of w when CTV is disabled)
  double err_u = 0.0;  // last inner relative change
  int inner_iterations = 0;
  int cg_iterations = 0;
};

struct RestorationDiagnostics {
  double real_part_norm = 0.0;
  double residual_ratio = 0.0;
  double damping = 1.0;
  double contraction = 0.0;
  double mu_min = 1.0, mu_max = 1.0;
  bool least_squares = false;
  bool inner_converged = true;
  bool cg_converged = true;
  int total_inner_iterations = 0;
  int total_cg_iterations = 0;
};

struct RestorationReport {
  ColorImage image;
  QuaternionField field;
  int iterations = 0;
  double final_change = 0.0;
  bool converged = false;
  std::vector<IterationRecord> trace;
  RestorationDiagnostics diagnostics;
};

struct SolverState {
  QuaternionField u;
  SpectralQField u_hat;
  ColorImage w, v;
  AdmmState admm_w, admm_v;
  int outer = 0;
  std::vector<IterationRecord> trace;
};

namespace detail {

inline double relative_change(const ColorImage& prev, const ColorImage& next) {
  const double d = squared_norm(next - prev);
  const double n = squared_norm(prev);
  if (n > 0.0) return d / n;
  return d > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace detail

/// Alternating minimisation over u and (w, v), starting from u = 0, w = v = z.
inline RestorationReport restore(const ColorImage& z, const QuaternionBlurOperator& op, const SolverParams& p,
                                 ModelTerms terms = {}) {
  p.validate();
  if (z.empty()) throw ConfigError("restore: empty image");
  if (!z.all_finite()) throw ConfigError("restore: observed image has non-finite samples");
  if (!terms.svtv && !terms.ctv) throw ConfigError("restore: at least one regularizer must be enabled");

  const std::size_t wd = z.width(), ht = z.height();
  const double a1 = terms.svtv ? p.alpha1 : 0.0;
  const double a2 = terms.ctv ? p.alpha2 : 0.0;
  const SplittingSystem sys(op, wd, ht, a1 + a2);
  const double theta = resolve_damping(sys, p);

  RestorationReport rep;
  auto& dg = rep.diagnostics;
  dg.residual_ratio = op.residual_ratio();
  dg.damping = theta;
  dg.contraction = sys.contraction(theta);
  dg.mu_min = sys.mu_min();
  dg.mu_max = sys.mu_max();
  dg.least_squares = (!terms.svtv || p.lambda1 == 0.0) && (!terms.ctv || p.lambda2 == 0.0);

  SolverState st;
  st.u = QuaternionField(wd, ht);
  st.u_hat = SpectralQField(spectrum_size(ht, wd));
  st.w = z;
  st.v = z;
  st.admm_w.reset(z.pixels());
  st.admm_v.reset(z.pixels());
  const SpectralQField btz = sys.apply_bt(to_spectral(to_quaternion_field(z)));

  for (st.outer = 1; st.outer <= p.max_outer; ++st.outer) {
    // u-step
    ColorImage mix(wd, ht);
    if (terms.svtv) mix.axpy(a1, st.w);
    if (terms.ctv) mix.axpy(a2, st.v);
    SpectralQField rhs = btz;
    rhs.axpy(1.0, to_spectral(to_quaternion_field(mix)));
    const ColorImage u_prev = from_quaternion_field(st.u);
    const UStepInfo ui = u_step(st.u_hat, rhs, sys, p, theta);
    st.u = from_spectral(st.u_hat, wd, ht);
    if (!st.u.all_finite()) throw NumericalError("restore: non-finite u");
    const ColorImage u_rgb = from_quaternion_field(st.u);

    // (w, v)-step
    if (p.admm_reset) {
      st.admm_w.reset(z.pixels());
      st.admm_v.reset(z.pixels());
    }
    const ColorImage w_prev = st.w, v_prev = st.v;
    if (terms.svtv) st.w = w_step(u_rgb, st.w, st.admm_w, p, p.max_admm);
    if (terms.ctv) st.v = v_step(u_rgb, st.v, st.admm_v, p, p.max_admm);
    if (!st.w.all_finite() || !st.v.all_finite()) throw NumericalError("restore: non-finite splitting variable");

    IterationRecord rec;
    rec.iteration = st.outer;
    rec.err = terms.ctv ? detail::relative_change(v_prev, st.v) : detail::relative_change(w_prev, st.w);
    rec.err_u = ui.err_u;
    rec.inner_iterations = ui.iterations;
    rec.cg_iterations = ui.cg_iterations;
    rec.energy = energy(st.u, z, op, p, terms);
    st.trace.push_back(rec);

    dg.total_inner_iterations += ui.iterations;
    dg.total_cg_iterations += ui.cg_iterations;
    dg.inner_converged = dg.inner_converged && ui.converged;
    dg.cg_converged = dg.cg_converged && ui.cg_converged;

    double gate = rec.err;
    if (p.strict_stop) {
      gate = std::max(gate, detail::relative_change(u_prev, u_rgb));
      if (terms.svtv && terms.ctv) gate = std::max(gate, detail::relative_change(w_prev, st.w));
    }
    rep.final_change = gate;
    if (gate <= p.tol) {
      rep.converged = true;
      break;
    }
  }

  rep.iterations = std::min(st.outer, p.max_outer);
  rep.trace = std::move(st.trace);
  RealPartDiagnostics rd;
  rep.image = from_quaternion_field(st.u, RealPartPolicy::discard, &rd);
  dg.real_part_norm = rd.real_part_norm;
  rep.field = std::move(st.u);
  return rep;
}

inline RestorationReport restore(const ColorImage& z, const CrossChannelBlur& blur, const SolverParams& p,
                                 ModelTerms terms = {}) {
  return restore(z, QuaternionBlurOperator::from_blur(blur), p, terms);
}

}  // namespace cstv
