#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "cstv/blur.hpp"
#include "cstv/error.hpp"
#include "cstv/image.hpp"

namespace cstv {

struct NoiseSpec {
  double sigma = 0.0;  // standard deviation on the [0,1] scale
  std::uint64_t seed = 0;

  void validate() const {
    if (!std::isfinite(sigma) || sigma < 0.0) throw ConfigError("noise sigma must be nonnegative");
  }
};

inline constexpr const char* kNoiseGenerator = "mt19937_64+std::normal_distribution";

/// z = (W (.) K) * u + n with i.i.d. Gaussian n. Samples are left unclamped
/// unless `clamp` is set.
inline ColorImage degrade(const ColorImage& clean, const CrossChannelBlur& blur, const NoiseSpec& noise,
                          bool clamp = false) {
  noise.validate();
  if (clean.empty()) throw ConfigError("degrade: empty image");
  ColorImage z = apply_cross_channel(blur, clean);
  if (noise.sigma > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    for (std::size_t c = 0; c < 3; ++c)
      for (double& v : z.plane(c)) v += gauss(rng);
  }
  if (clamp)
    for (std::size_t c = 0; c < 3; ++c)
      for (double& v : z.plane(c)) v = std::clamp(v, 0.0, 1.0);
  return z;
}

struct Preset {
  CrossChannelBlur blur;
  NoiseSpec noise;
};

/// Experiment configurations: "symmetric_va" and "asymmetric_vb".
inline Preset preset(const std::string& name) {
  Preset p;
  p.noise.sigma = 0.01;
  if (name == "symmetric_va") {
    p.blur = CrossChannelBlur::uniform(KernelSpec::gaussian(5, 5.0),
                                       {{{0.7, 0.15, 0.15}, {0.15, 0.7, 0.15}, {0.15, 0.15, 0.7}}});
  } else if (name == "asymmetric_vb") {
    const auto a5 = KernelSpec::average(5);
    const auto m11 = KernelSpec::motion(11, 45);
    const auto m21 = KernelSpec::motion(21, 90);
    const auto g55 = KernelSpec::gaussian(5, 5.0);
    p.blur.kernels = {{{a5, m11, m21}, {m11, a5, g55}, {m21, g55, a5}}};
    p.blur.weights = {{{0.7, 0.15, 0.15}, {0.1, 0.8, 0.1}, {0.05, 0.05, 0.9}}};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected symmetric_va or asymmetric_vb)");
  }
  p.blur.validate();
  return p;
}

}  // namespace cstv
