#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace cstv;
using namespace cstv::test;

namespace {

Kernel asymmetric_kernel(std::uint64_t seed, int rows, int cols) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Kernel k{rows, cols, rows / 3, cols - 1, std::vector<double>(static_cast<std::size_t>(rows * cols))};
  for (double& t : k.taps) t = u(rng);
  const double s = k.sum();
  for (double& t : k.taps) t /= s;
  return k;
}

CrossChannelBlur random_blur(std::uint64_t seed) {
  CrossChannelBlur b;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 3; ++i) {
    double row = 0.0;
    for (int j = 0; j < 3; ++j) row += b.weights[i][j] = u(rng);
    for (int j = 0; j < 3; ++j) {
      b.weights[i][j] /= row;
      b.kernels[i][j] = KernelSpec::custom_taps(asymmetric_kernel(seed * 31 + i * 3 + j, 3 + i, 2 + j));
    }
  }
  return b;
}

Eigen::MatrixXd dense_b(const QuaternionBlurOperator& op, std::size_t w, std::size_t h) {
  return dense_grid(op.extended().blocks, w, h);
}

}  // namespace

TEST(Kernels, GaussianAndAverageTaps) {
  const Kernel g = make_kernel(KernelSpec::gaussian(5, 5.0));
  EXPECT_EQ(g.rows, 5);
  EXPECT_NEAR(g.sum(), 1.0, 1e-15);
  const double e = std::exp(-1.0 / 50.0), n = 1 + 2 * e + 2 * std::exp(-4.0 / 50.0);
  EXPECT_NEAR(g.at(2, 2), 1.0 / (n * n), 1e-15);
  EXPECT_NEAR(g.at(2, 3), e / (n * n), 1e-15);
  const Kernel a = make_kernel(KernelSpec::average(5));
  for (double t : a.taps) EXPECT_DOUBLE_EQ(t, 1.0 / 25.0);
}

TEST(Kernels, MotionKernels) {
  for (auto [len, ang] : {std::pair{11.0, 45.0}, {21.0, 90.0}, {7.0, 0.0}, {9.0, 30.0}}) {
    const Kernel k = make_kernel(KernelSpec::motion(len, ang));
    EXPECT_NEAR(k.sum(), 1.0, 1e-14);
    for (double t : k.taps) EXPECT_GE(t, 0.0);
    EXPECT_GT(k.at_offset(0, 0), 0.0);
  }
  const Kernel h = make_kernel(KernelSpec::motion(7, 0));
  EXPECT_EQ(h.rows, 1);
  EXPECT_EQ(h.cols, 7);
  const Kernel v = make_kernel(KernelSpec::motion(21, 90));
  EXPECT_EQ(v.cols, 1);
  EXPECT_EQ(v.rows, 21);
  const Kernel d = make_kernel(KernelSpec::motion(11, 45));
  EXPECT_EQ(d.rows, d.cols);
  for (int i = -4; i <= 4; ++i) EXPECT_GT(d.at_offset(-i, i), 0.0);
}

TEST(Kernels, InvalidSpecs) {
  EXPECT_THROW(make_kernel(KernelSpec::gaussian(0, 1.0)), ConfigError);
  EXPECT_THROW(make_kernel(KernelSpec::gaussian(3, 0.0)), ConfigError);
  EXPECT_THROW(make_kernel(KernelSpec::average(0)), ConfigError);
  EXPECT_THROW(make_kernel(KernelSpec::motion(0.5, 0.0)), ConfigError);
  EXPECT_THROW(make_kernel(KernelSpec::custom_taps(Kernel{2, 2, 0, 0, {1, 1, 1, 1}})), ConfigError);
  EXPECT_THROW(make_kernel(KernelSpec::custom_taps(Kernel{2, 2, 0, 0, {1, 0}})), ConfigError);
  EXPECT_THROW(make_kernel(KernelSpec::custom_taps(Kernel{1, 1, 1, 0, {1}})), ConfigError);
}

TEST(CrossChannelBlur, Validation) {
  CrossChannelBlur b;
  EXPECT_NO_THROW(b.validate());
  b.weights[0] = {0.5, 0.5, 0.1};
  EXPECT_THROW(b.validate(), ConfigError);
  b.weights[0] = {1.2, -0.2, 0.0};
  EXPECT_THROW(b.validate(), ConfigError);
}

TEST(CrossChannelBlur, FftMatchesDirectAndDense) {
  const CrossChannelBlur blur = random_blur(3);
  const ColorImage img = random_color(16, 12, 4);
  const ColorImage fft = apply_cross_channel(blur, img);
  const ColorImage direct = apply_cross_channel_direct(blur, img);
  EXPECT_LE(frobenius_norm(fft - direct), 1e-12 * frobenius_norm(direct));

  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(3 * 192, 3 * 192);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) dense.block(i * 192, j * 192, 192, 192) = dense_convolution(blur.weighted_kernel(i, j), 16, 12);
  const Eigen::VectorXd ref = dense * stack(img);
  EXPECT_LE((stack(fft) - ref).norm(), 1e-12 * ref.norm());
}

TEST(CrossChannelBlur, PreservesConstantImages) {
  const Preset p = preset("asymmetric_vb");
  ColorImage c(32, 32);
  for (int ch = 0; ch < 3; ++ch)
    for (double& v : c.plane(ch)) v = 0.25 * (ch + 1);
  const ColorImage out = apply_cross_channel(p.blur, c);
  ColorImage expected(32, 32);
  for (int i = 0; i < 3; ++i)
    for (double& v : expected.plane(i))
      v = p.blur.weights[i][0] * 0.25 + p.blur.weights[i][1] * 0.5 + p.blur.weights[i][2] * 0.75;
  EXPECT_LE(frobenius_norm(out - expected), 1e-12);
}

TEST(ExtendedOperator, StructureAndEmbedding) {
  const CrossChannelBlur blur = random_blur(5);
  const QuaternionBlurOperator op = QuaternionBlurOperator::from_blur(blur);
  EXPECT_TRUE(op.extended().satisfies_first_row_constraint());
  for (int r = 0; r < 4; ++r) EXPECT_TRUE(op.extended().blocks[r][0].is_zero());

  const ColorImage img = random_color(10, 8, 6);
  const QuaternionField bf = apply_b(op, to_quaternion_field(img));
  for (double v : bf.plane(0)) EXPECT_EQ(v, 0.0);
  const ColorImage colour = from_quaternion_field(bf);
  EXPECT_LE(frobenius_norm(colour - apply_cross_channel(blur, img)), 1e-12);
}

TEST(QuaternionBlur, ApplyMatchesDenseOracle) {
  const QuaternionBlurOperator op = QuaternionBlurOperator::from_blur(random_blur(7));
  const std::size_t w = 16, h = 16;
  const Eigen::MatrixXd b = dense_b(op, w, h);
  const QuaternionField f = random_field(w, h, 8);
  const auto bound = op.bind(w, h);
  const Eigen::VectorXd ref = b * stack(f);
  EXPECT_LE((stack(bound.apply_b(f)) - ref).norm(), 1e-12 * ref.norm());
  const Eigen::VectorXd ref_t = b.transpose() * stack(f);
  EXPECT_LE((stack(bound.apply_b_adjoint(f)) - ref_t).norm(), 1e-12 * ref_t.norm());
}

TEST(QuaternionBlur, SplitIsConjugationAverage) {
  const QuaternionBlurOperator op = QuaternionBlurOperator::from_blur(random_blur(9));
  const std::size_t w = 6, h = 5;
  const Eigen::Index n = static_cast<Eigen::Index>(w * h);
  const Eigen::MatrixXd b = dense_b(op, w, h);
  Eigen::MatrixXd avg = b;
  for (const auto& s : structure_matrices(n)) avg += s * b * s.transpose();
  avg /= 4.0;

  const Eigen::MatrixXd q = dense_grid(real_counterpart(op.q()), w, h);
  EXPECT_LE(rel_diff(q, avg), 1e-13);
  EXPECT_LE(rel_diff(dense_grid(op.residual(), w, h), b - avg), 1e-12);
  // Q is a genuine real counterpart and the projection is idempotent.
  EXPECT_NO_THROW(unrealify(q, 1e-13));
  for (const auto& s : structure_matrices(n)) EXPECT_LE(rel_diff(s * q * s.transpose(), q), 1e-13);
}

TEST(QuaternionBlur, SplitFormulaEntries) {
  const CrossChannelBlur blur = random_blur(11);
  const QuaternionBlurOperator op = QuaternionBlurOperator::from_blur(blur);
  auto wk = [&](int i, int j) { return blur.weighted_kernel(i, j); };
  const Kernel expected[4] = {
      0.25 * (wk(0, 0) + wk(1, 1) + wk(2, 2)),
      0.25 * (wk(2, 1) - wk(1, 2)),
      0.25 * (wk(0, 2) - wk(2, 0)),
      0.25 * (wk(1, 0) - wk(0, 1)),
  };
  for (int c = 0; c < 4; ++c) {
    const Kernel diff = op.q().part[static_cast<std::size_t>(c)] - expected[c];
    for (double t : diff.taps) EXPECT_NEAR(t, 0.0, 1e-15) << "component " << c;
  }
}

TEST(QuaternionBlur, SplittingIdentity) {
  for (const char* name : {"symmetric_va", "asymmetric_vb"}) {
    const QuaternionBlurOperator op = QuaternionBlurOperator::from_blur(preset(name).blur);
    const auto bound = op.bind(32, 32);
    const QuaternionField f = random_field(32, 32, 12);
    const QuaternionField lhs = bound.apply_b(f);
    const QuaternionField rhs = bound.apply_q(f) + bound.apply_r(f);
    EXPECT_LE(frobenius_norm(lhs - rhs), 1e-12 * frobenius_norm(lhs)) << name;
  }
}

TEST(QuaternionBlur, AdjointIdentities) {
  const QuaternionBlurOperator op = QuaternionBlurOperator::from_blur(preset("asymmetric_vb").blur);
  const auto bound = op.bind(32, 24);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const QuaternionField x = random_field(32, 24, 100 + s), y = random_field(32, 24, 200 + s);
    const double scale = qnorm(x) * qnorm(y);
    EXPECT_NEAR(qdot(bound.apply_b(x), y), qdot(x, bound.apply_b_adjoint(y)), 1e-10 * scale);
    EXPECT_NEAR(qdot(bound.apply_q(x), y), qdot(x, bound.apply_q_adjoint(y)), 1e-10 * scale);
    EXPECT_NEAR(qdot(bound.apply_r(x), y), qdot(x, bound.apply_r_adjoint(y)), 1e-10 * scale);
  }
}

TEST(QuaternionBlur, SymmetricPresetResidualRatio) {
  const QuaternionBlurOperator op = QuaternionBlurOperator::from_blur(preset("symmetric_va").blur);
  for (int c = 1; c < 4; ++c) EXPECT_TRUE(op.q().part[static_cast<std::size_t>(c)].is_zero());
  const double r2 = 0.525 * 0.525 + 3 * 0.175 * 0.175 + 6 * 0.15 * 0.15;
  const double b2 = 3 * 0.49 + 6 * 0.0225;
  EXPECT_NEAR(op.residual_ratio(), std::sqrt(r2 / b2), 1e-14);
  EXPECT_FALSE(op.residual_is_zero());
}

TEST(QuaternionBlur, PureQuaternionOperatorHasNoResidual) {
  QuaternionKernel qk;
  qk.part[0] = make_kernel(KernelSpec::gaussian(3, 1.0));
  qk.part[2] = 0.3 * make_kernel(KernelSpec::average(3));
  ExtendedOperator ext{real_counterpart(qk)};
  const QuaternionBlurOperator op(ext);
  EXPECT_LE(op.residual_ratio(), 1e-15);
}
