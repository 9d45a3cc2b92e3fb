#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "cstv/error.hpp"
#include "cstv/metrics.hpp"
#include "cstv/solver.hpp"

namespace cstv {

/// Upper end of the regularization-parameter range: 2 sqrt(N sigma^2) 1e-3.
inline double lambda_bound(double n, double sigma) {
  if (!(n >= 0.0) || !(sigma >= 0.0)) throw ConfigError("lambda_bound: n and sigma must be nonnegative");
  return 2.0 * std::sqrt(n * sigma * sigma) * 1e-3;
}

/// `count` equally spaced values on (0, bound].
inline std::vector<double> uniform_axis(double bound, int count) {
  if (count < 1 || !(bound > 0.0)) throw ConfigError("uniform_axis: need count >= 1 and bound > 0");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = bound * (i + 1) / count;
  return v;
}

/// Sets the SolverParams field named by a sweep axis.
inline void set_param(SolverParams& p, const std::string& name, double value) {
  if (name == "lambda1") p.lambda1 = value;
  else if (name == "lambda2") p.lambda2 = value;
  else if (name == "alpha1") p.alpha1 = value;
  else if (name == "alpha2") p.alpha2 = value;
  else if (name == "alpha_sv") p.alpha_sv = value;
  else if (name == "beta") p.beta = value;
  else throw ConfigError("unknown sweep axis '" + name + "'");
}

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepCell {
  double x1 = 0.0, x2 = 0.0;
  bool ok = false;
  std::string error;
  MetricReport metrics;
  int iterations = 0;
};

struct SweepGrid {
  SweepAxis axis1, axis2;
  std::vector<SweepCell> cells;  // axis1-major

  const SweepCell& at(std::size_t i1, std::size_t i2) const { return cells[i1 * axis2.values.size() + i2]; }
};

namespace detail {

inline void check_axis(const SweepAxis& a) {
  if (a.values.empty()) throw ConfigError("sweep axis '" + a.name + "' is empty");
  for (std::size_t i = 1; i < a.values.size(); ++i)
    if (!(a.values[i] > a.values[i - 1])) throw ConfigError("sweep axis '" + a.name + "' is not strictly increasing");
  SolverParams probe;
  set_param(probe, a.name, 0.0);
}

}  // namespace detail

/// Restores z at every grid point and scores it against `reference`. Cells
/// run on `threads` workers; a failing cell is recorded and the sweep goes on.
inline SweepGrid sweep(const ColorImage& z, const ColorImage& reference, const QuaternionBlurOperator& op,
                       const SolverParams& base, const SweepAxis& axis1, const SweepAxis& axis2,
                       ModelTerms terms = {}, int threads = 1) {
  detail::check_axis(axis1);
  detail::check_axis(axis2);
  if (axis1.name == axis2.name) throw ConfigError("sweep axes must differ");
  if (!z.same_shape(reference)) throw ConfigError("sweep: observed and reference images differ in size");

  SweepGrid grid{axis1, axis2, {}};
  grid.cells.resize(axis1.values.size() * axis2.values.size());
  for (std::size_t i = 0; i < axis1.values.size(); ++i)
    for (std::size_t j = 0; j < axis2.values.size(); ++j) {
      auto& c = grid.cells[i * axis2.values.size() + j];
      c.x1 = axis1.values[i];
      c.x2 = axis2.values[j];
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < grid.cells.size(); k = next++) {
      SweepCell& c = grid.cells[k];
      try {
        SolverParams p = base;
        set_param(p, axis1.name, c.x1);
        set_param(p, axis2.name, c.x2);
        const RestorationReport r = restore(z, op, p, terms);
        c.metrics = evaluate(r.image, reference);
        c.iterations = r.iterations;
        c.ok = true;
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(grid.cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return grid;
}

struct MetricWeights {
  double psnr = 0.5;
  double ssim = 0.5;
  double mse = 0.0;
  double ciede2000 = 0.0;
};

struct SweetSpot {
  double x1 = 0.0, x2 = 0.0;
  std::size_t index = 0;
  double score = 0.0;
};

/// Argmax of the weighted sum of min-max normalised metric surfaces (MSE and
/// CIEDE2000 enter negated). Ties go to the smaller axis1, then axis2 value.
inline SweetSpot sweet_spot(const SweepGrid& grid, const MetricWeights& weights = {}) {
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < grid.cells.size(); ++i)
    if (grid.cells[i].ok) live.push_back(i);
  if (live.empty()) throw ConfigError("sweet_spot: no evaluated cells");

  const double big = std::numeric_limits<double>::max();
  auto finite_or_cap = [big](double v) { return std::isfinite(v) ? v : (v > 0 ? big : -big); };
  auto surface = [&](auto get, bool negate, double w, std::vector<double>& score) {
    if (w == 0.0) return;
    double lo = big, hi = -big;
    for (std::size_t i : live) {
      const double v = finite_or_cap(get(grid.cells[i].metrics));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) return;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const double v = finite_or_cap(get(grid.cells[live[k]].metrics));
      const double t = (v - lo) / (hi - lo);
      score[k] += w * (negate ? 1.0 - t : t);
    }
  };
  std::vector<double> score(live.size(), 0.0);
  surface([](const MetricReport& m) { return m.psnr; }, false, weights.psnr, score);
  surface([](const MetricReport& m) { return m.ssim; }, false, weights.ssim, score);
  surface([](const MetricReport& m) { return m.mse; }, true, weights.mse, score);
  surface([](const MetricReport& m) { return m.ciede2000; }, true, weights.ciede2000, score);

  std::size_t best = 0;
  for (std::size_t k = 1; k < live.size(); ++k)
    if (score[k] > score[best]) best = k;
  const SweepCell& c = grid.cells[live[best]];
  return {c.x1, c.x2, live[best], score[best]};
}

}  // namespace cstv
