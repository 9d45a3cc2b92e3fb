#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace cstv;
using namespace cstv::test;

namespace {

SweepGrid synthetic_grid(const std::vector<double>& psnr, const std::vector<double>& ssim, std::size_t n2) {
  SweepGrid g;
  g.axis1.name = "lambda1";
  g.axis2.name = "lambda2";
  for (std::size_t i = 0; i < psnr.size() / n2; ++i) g.axis1.values.push_back(0.1 * (i + 1));
  for (std::size_t j = 0; j < n2; ++j) g.axis2.values.push_back(0.01 * (j + 1));
  for (std::size_t k = 0; k < psnr.size(); ++k) {
    SweepCell c;
    c.x1 = g.axis1.values[k / n2];
    c.x2 = g.axis2.values[k % n2];
    c.ok = true;
    c.metrics.psnr = psnr[k];
    c.metrics.ssim = ssim[k];
    c.metrics.mse = std::pow(10.0, -psnr[k] / 10.0);
    c.metrics.ciede2000 = 10.0 - ssim[k];
    g.cells.push_back(c);
  }
  return g;
}

}  // namespace

TEST(LambdaBound, Values) {
  EXPECT_NEAR(lambda_bound(1e6, 0.01), 0.02, 1e-15);
  EXPECT_NEAR(lambda_bound(3 * 256 * 256, 0.01), 2e-5 * std::sqrt(3.0 * 65536.0), 1e-15);
  EXPECT_EQ(lambda_bound(100, 0.0), 0.0);
  EXPECT_THROW(lambda_bound(-1, 0.01), ConfigError);
}

TEST(UniformAxis, Values) {
  EXPECT_EQ(uniform_axis(1.0, 4), (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(uniform_axis(2.0, 1), (std::vector<double>{2.0}));
  EXPECT_THROW(uniform_axis(0.0, 3), ConfigError);
  EXPECT_THROW(uniform_axis(1.0, 0), ConfigError);
}

TEST(SetParam, Names) {
  SolverParams p;
  set_param(p, "alpha1", 0.5);
  set_param(p, "lambda2", 0.25);
  EXPECT_EQ(p.alpha1, 0.5);
  EXPECT_EQ(p.lambda2, 0.25);
  EXPECT_THROW(set_param(p, "gamma", 1.0), ConfigError);
}

TEST(SweetSpot, SingleCell) {
  const SweepGrid g = synthetic_grid({20.0}, {0.5}, 1);
  const SweetSpot s = sweet_spot(g);
  EXPECT_EQ(s.index, 0u);
  EXPECT_EQ(s.x1, 0.1);
  EXPECT_EQ(s.x2, 0.01);
}

TEST(SweetSpot, MetricSelection) {
  const SweepGrid g = synthetic_grid({20, 25, 22, 21, 24, 23}, {0.9, 0.5, 0.6, 0.7, 0.8, 0.4}, 3);
  EXPECT_EQ(sweet_spot(g, {1, 0, 0, 0}).index, 1u);
  EXPECT_EQ(sweet_spot(g, {0, 1, 0, 0}).index, 0u);
  EXPECT_EQ(sweet_spot(g, {0, 0, 1, 0}).index, 1u);  // lowest MSE
  EXPECT_EQ(sweet_spot(g, {0, 0, 0, 1}).index, 0u);  // lowest CIEDE
  // Equal weights: normalised 0.5 (20..25) + 0.5 (0.4..0.9).
  const SweetSpot s = sweet_spot(g);
  EXPECT_EQ(s.index, 4u);
  EXPECT_NEAR(s.score, 0.5 * 0.8 + 0.5 * 0.8, 1e-12);
}

TEST(SweetSpot, InvariantUnderMonotoneRescaling) {
  SweepGrid g = synthetic_grid({20, 25, 22, 21, 24, 23}, {0.9, 0.5, 0.6, 0.7, 0.8, 0.4}, 3);
  const std::size_t before = sweet_spot(g, {1, 0, 0, 0}).index;
  for (auto& c : g.cells) c.metrics.psnr = std::exp(c.metrics.psnr / 5.0);
  EXPECT_EQ(sweet_spot(g, {1, 0, 0, 0}).index, before);
}

TEST(SweetSpot, TiesAndFailures) {
  SweepGrid g = synthetic_grid({25, 20, 25, 20}, {0.5, 0.5, 0.5, 0.5}, 2);
  EXPECT_EQ(sweet_spot(g, {1, 0, 0, 0}).index, 0u);
  g.cells[0].ok = false;
  EXPECT_EQ(sweet_spot(g, {1, 0, 0, 0}).index, 2u);
  for (auto& c : g.cells) c.ok = false;
  EXPECT_THROW(sweet_spot(g), ConfigError);
}

TEST(Sweep, ParallelMatchesSerialAndRecordsFailures) {
  const ColorImage clean = synthetic_image(24, 24, 1);
  const Preset pr = preset("symmetric_va");
  const ColorImage z = degrade(clean, pr.blur, {0.01, 2});
  const auto op = QuaternionBlurOperator::from_blur(pr.blur);
  SolverParams base;
  base.max_outer = 10;
  const SweepAxis a1{"alpha1", {-1.0, 0.28}}, a2{"lambda1", {4e-4, 8e-4}};
  const SweepGrid serial = sweep(z, clean, op, base, a1, a2, {}, 1);
  const SweepGrid parallel = sweep(z, clean, op, base, a1, a2, {}, 3);
  ASSERT_EQ(serial.cells.size(), 4u);
  EXPECT_FALSE(serial.at(0, 0).ok);
  EXPECT_FALSE(serial.at(0, 1).error.empty());
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(serial.cells[k].ok, parallel.cells[k].ok);
    EXPECT_EQ(serial.cells[k].metrics.psnr, parallel.cells[k].metrics.psnr);
  }
  EXPECT_TRUE(serial.at(1, 1).ok);
  EXPECT_EQ(serial.at(1, 1).x1, 0.28);
  EXPECT_EQ(serial.at(1, 1).x2, 8e-4);
  EXPECT_GE(sweet_spot(serial).index, 2u);
}

TEST(Sweep, RejectsBadAxes) {
  const ColorImage z = random_color(8, 8, 1);
  const auto op = QuaternionBlurOperator::from_blur(CrossChannelBlur{});
  EXPECT_THROW(sweep(z, z, op, {}, {"alpha1", {0.2, 0.1}}, {"lambda1", {1e-3}}), ConfigError);
  EXPECT_THROW(sweep(z, z, op, {}, {"alpha1", {}}, {"lambda1", {1e-3}}), ConfigError);
  EXPECT_THROW(sweep(z, z, op, {}, {"alpha1", {0.1}}, {"alpha1", {0.2}}), ConfigError);
  EXPECT_THROW(sweep(z, z, op, {}, {"theta", {0.1}}, {"alpha1", {0.2}}), ConfigError);
}
