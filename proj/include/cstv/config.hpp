#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "cstv/blur.hpp"
#include "cstv/degrade.hpp"
#include "cstv/error.hpp"
#include "cstv/metrics.hpp"
#include "cstv/solver.hpp"
#include "cstv/tune.hpp"

namespace cstv {

using Json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + what);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

// Finite values as numbers; infinities and NaN as strings.
inline Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kernels and blur

inline Json to_json(const KernelSpec& k) {
  Json j;
  j["kind"] = to_string(k.kind);
  switch (k.kind) {
    case KernelSpec::Kind::gaussian: j["size"] = k.size; j["sigma"] = k.sigma; break;
    case KernelSpec::Kind::average: j["size"] = k.size; break;
    case KernelSpec::Kind::motion: j["length"] = k.length; j["angle"] = k.angle; break;
    case KernelSpec::Kind::delta: break;
    case KernelSpec::Kind::custom:
      j["rows"] = k.custom.rows;
      j["cols"] = k.custom.cols;
      j["center_row"] = k.custom.center_row;
      j["center_col"] = k.custom.center_col;
      j["taps"] = k.custom.taps;
      break;
  }
  return j;
}

inline KernelSpec kernel_spec_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"kind", "size", "sigma", "length", "angle", "rows", "cols", "center_row",
                                  "center_col", "taps"},
                              "kernel");
  const std::string kind = detail::get_or<std::string>(j, "kind", "");
  KernelSpec k;
  if (kind == "gaussian") {
    k = KernelSpec::gaussian(detail::get_or(j, "size", 5), detail::get_or(j, "sigma", 1.0));
  } else if (kind == "average") {
    k = KernelSpec::average(detail::get_or(j, "size", 3));
  } else if (kind == "motion") {
    k = KernelSpec::motion(detail::get_or(j, "length", 1.0), detail::get_or(j, "angle", 0.0));
  } else if (kind == "delta") {
    k = KernelSpec::delta();
  } else if (kind == "custom") {
    Kernel c;
    c.rows = detail::get_or(j, "rows", 0);
    c.cols = detail::get_or(j, "cols", 0);
    c.center_row = detail::get_or(j, "center_row", c.rows / 2);
    c.center_col = detail::get_or(j, "center_col", c.cols / 2);
    c.taps = detail::get_or(j, "taps", std::vector<double>{});
    k = KernelSpec::custom_taps(std::move(c));
  } else {
    throw ConfigError("unknown kernel kind '" + kind + "'");
  }
  (void)make_kernel(k);
  return k;
}

inline Json to_json(const CrossChannelBlur& b) {
  Json j;
  j["kernels"] = Json::array();
  for (const auto& row : b.kernels) {
    Json r = Json::array();
    for (const auto& k : row) r.push_back(to_json(k));
    j["kernels"].push_back(r);
  }
  j["weights"] = b.weights;
  return j;
}

inline CrossChannelBlur blur_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"kernels", "weights"}, "blur");
  if (!j.contains("kernels") || !j.contains("weights")) throw ConfigError("blur needs 'kernels' and 'weights'");
  const Json& k = j.at("kernels");
  const Json& w = j.at("weights");
  auto is3x3 = [](const Json& a) {
    if (!a.is_array() || a.size() != 3) return false;
    for (const auto& r : a)
      if (!r.is_array() || r.size() != 3) return false;
    return true;
  };
  if (!is3x3(k) || !is3x3(w)) throw ConfigError("blur 'kernels' and 'weights' must be 3x3 arrays");
  CrossChannelBlur b;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      b.kernels[r][c] = kernel_spec_from_json(k[r][c]);
      if (!w[r][c].is_number()) throw ConfigError("blur weights must be numbers");
      b.weights[r][c] = w[r][c].get<double>();
    }
  b.validate();
  return b;
}

// ---------------------------------------------------------------------------
// Noise and solver parameters

inline Json to_json(const NoiseSpec& n) { return Json{{"kind", "gaussian"}, {"sigma", n.sigma}, {"seed", n.seed}}; }

inline NoiseSpec noise_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"kind", "sigma", "seed"}, "noise");
  if (detail::get_or<std::string>(j, "kind", "gaussian") != "gaussian") throw ConfigError("noise kind must be gaussian");
  NoiseSpec n;
  n.sigma = detail::get_or(j, "sigma", 0.0);
  n.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  n.validate();
  return n;
}

inline Json to_json(const SolverParams& p) {
  Json j;
  j["lambda1"] = p.lambda1;
  j["lambda2"] = p.lambda2;
  j["alpha1"] = p.alpha1;
  j["alpha2"] = p.alpha2;
  j["alpha_sv"] = p.alpha_sv;
  j["beta"] = p.beta;
  j["tol"] = p.tol;
  j["max_outer"] = p.max_outer;
  j["max_inner_u"] = p.max_inner_u;
  j["max_admm"] = p.max_admm;
  j["damping"] = p.auto_damping ? Json("auto") : Json(p.damping);
  j["inner_tol"] = p.inner_tol;
  j["cg_tol"] = p.cg_tol;
  j["cg_max_iter"] = p.cg_max_iter;
  j["admm_reset"] = p.admm_reset;
  j["strict_stop"] = p.strict_stop;
  return j;
}

/// Missing keys keep the values of `base`.
inline SolverParams params_from_json(const Json& j, SolverParams base = {}) {
  detail::reject_unknown_keys(j, {"lambda1", "lambda2", "alpha1", "alpha2", "alpha_sv", "beta", "tol", "max_outer",
                                  "max_inner_u", "max_admm", "damping", "inner_tol", "cg_tol", "cg_max_iter",
                                  "admm_reset", "strict_stop"},
                              "solver parameters");
  SolverParams p = base;
  p.lambda1 = detail::get_or(j, "lambda1", p.lambda1);
  p.lambda2 = detail::get_or(j, "lambda2", p.lambda2);
  p.alpha1 = detail::get_or(j, "alpha1", p.alpha1);
  p.alpha2 = detail::get_or(j, "alpha2", p.alpha2);
  p.alpha_sv = detail::get_or(j, "alpha_sv", p.alpha_sv);
  p.beta = detail::get_or(j, "beta", p.beta);
  p.tol = detail::get_or(j, "tol", p.tol);
  p.max_outer = detail::get_or(j, "max_outer", p.max_outer);
  p.max_inner_u = detail::get_or(j, "max_inner_u", p.max_inner_u);
  p.max_admm = detail::get_or(j, "max_admm", p.max_admm);
  p.inner_tol = detail::get_or(j, "inner_tol", p.inner_tol);
  p.cg_tol = detail::get_or(j, "cg_tol", p.cg_tol);
  p.cg_max_iter = detail::get_or(j, "cg_max_iter", p.cg_max_iter);
  p.admm_reset = detail::get_or(j, "admm_reset", p.admm_reset);
  p.strict_stop = detail::get_or(j, "strict_stop", p.strict_stop);
  if (j.contains("damping")) {
    const Json& d = j.at("damping");
    if (d.is_string() && d.get<std::string>() == "auto") {
      p.auto_damping = true;
    } else if (d.is_number()) {
      p.auto_damping = false;
      p.damping = d.get<double>();
    } else {
      throw ConfigError("damping must be a number or \"auto\"");
    }
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const MetricReport& m) {
  return Json{{"psnr", detail::number(m.psnr)},
              {"ssim", detail::number(m.ssim)},
              {"mse", detail::number(m.mse)},
              {"ciede2000", detail::number(m.ciede2000)}};
}

inline Json to_json(const RestorationDiagnostics& d) {
  return Json{{"real_part_norm", d.real_part_norm},
              {"residual_ratio", d.residual_ratio},
              {"damping", d.damping},
              {"contraction", d.contraction},
              {"mu_min", d.mu_min},
              {"mu_max", d.mu_max},
              {"least_squares", d.least_squares},
              {"inner_converged", d.inner_converged},
              {"cg_converged", d.cg_converged},
              {"total_inner_iterations", d.total_inner_iterations},
              {"total_cg_iterations", d.total_cg_iterations}};
}

/// Summary of a restoration; the per-iteration trace goes to CSV.
inline Json to_json(const RestorationReport& r) {
  Json j;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["final_change"] = detail::number(r.final_change);
  j["final_energy"] = r.trace.empty() ? Json(nullptr) : detail::number(r.trace.back().energy);
  j["diagnostics"] = to_json(r.diagnostics);
  return j;
}

inline void write_energy_csv(std::ostream& os, const std::vector<IterationRecord>& trace) {
  os << "iteration,energy,err,err_u\n";
  for (const auto& t : trace)
    os << t.iteration << ',' << detail::format_number(t.energy) << ',' << detail::format_number(t.err) << ','
       << detail::format_number(t.err_u) << '\n';
}

inline void write_metrics_csv_header(std::ostream& os) { os << "image,method,psnr,ssim,mse,ciede2000\n"; }

inline void write_metrics_csv_row(std::ostream& os, const std::string& image, const std::string& method,
                                  const MetricReport& m) {
  os << image << ',' << method << ',' << detail::format_number(m.psnr) << ',' << detail::format_number(m.ssim) << ','
     << detail::format_number(m.mse) << ',' << detail::format_number(m.ciede2000) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const SweepGrid& g) {
  os << g.axis1.name << ',' << g.axis2.name << ",psnr,ssim,mse,ciede2000,iterations,status\n";
  for (const auto& c : g.cells) {
    os << detail::format_number(c.x1) << ',' << detail::format_number(c.x2) << ',';
    if (c.ok)
      os << detail::format_number(c.metrics.psnr) << ',' << detail::format_number(c.metrics.ssim) << ','
         << detail::format_number(c.metrics.mse) << ',' << detail::format_number(c.metrics.ciede2000) << ','
         << c.iterations << ",ok\n";
    else
      os << ",,,,," << "failed\n";
  }
}

// ---------------------------------------------------------------------------
// Hashing

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

/// Hash of the raw sample bits and dimensions.
inline std::uint64_t image_checksum(const ColorImage& img) {
  const std::uint64_t dims[2] = {img.width(), img.height()};
  std::uint64_t h = fnv1a64(dims, sizeof dims);
  for (std::size_t c = 0; c < 3; ++c) h = fnv1a64(img.plane(c).data(), img.plane(c).size() * sizeof(double), h);
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace cstv
