// Splits a cross-channel blur into its quaternion part and residual and
// checks the splitting on a random field.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "cstv/cstv.hpp"

int main() {
  const cstv::Preset setup = cstv::preset("asymmetric_vb");
  const auto op = cstv::QuaternionBlurOperator::from_blur(setup.blur);
  std::printf("||R|| / ||B|| = %.4f\n", op.residual_ratio());

  cstv::QuaternionField f(32, 32);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t c = 1; c < 4; ++c)
    for (double& v : f.plane(c)) v = u(rng);

  const auto bound = op.bind(32, 32);
  cstv::QuaternionField split = bound.apply_q(f);
  split += bound.apply_r(f);
  const cstv::QuaternionField direct = bound.apply_b(f);
  std::printf("||(Q + R) f - B f|| / ||f|| = %.3e\n",
              cstv::frobenius_norm(split - direct) / cstv::frobenius_norm(f));
  double real = 0.0;
  for (double v : direct.plane(0)) real = std::max(real, std::abs(v));
  std::printf("max |real channel of B f| = %.3e\n", real);
  return 0;
}
