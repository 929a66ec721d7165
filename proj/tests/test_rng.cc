// Apache License, Version 2.0, refer to LICENSE.txt

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "bnpgof/mc_engine.hh"
#include "bnpgof/rng.hh"
#include "bnpgof/special.hh"

using namespace bnpgof;

// Known-answer vectors for Philox4x32-10 (Random123 distribution).
TEST(Philox, KnownAnswers) {
  using C = Philox4x32Counter;
  EXPECT_EQ(philox4x32(C{0, 0, 0, 0}, {0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                       {0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                       {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameSeedAndPathRepeat) {
  RngStream a(42, {3, 1}), b(42, {3, 1});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(RngStream, ChildExtendsPath) {
  RngStream parent(9, {4});
  RngStream a = parent.child(7);
  RngStream b(9, {4, 7});
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a(), b());
}

TEST(RngStream, DistinctPathsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t i = 0; i < 1000; ++i) first.insert(RngStream(1, {i})());
  EXPECT_EQ(first.size(), 1000u);
  EXPECT_NE(RngStream(1)(), RngStream(2)());
  EXPECT_NE(derive_seed(5, {1, 2}), derive_seed(5, {2, 1}));
}

TEST(RngStream, UniformRanges) {
  RngStream rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(rng.index(7), 7u);
}

TEST(RngStream, NormalPassesKs) {
  RngStream rng(11);
  std::vector<double> v(20000);
  for (double& x : v) x = rng.normal();
  EXPECT_LT(ks_distance(EmpiricalSample(v), normal_cdf), 1.63 / std::sqrt(20000.0));
}

TEST(RngStream, ExponentialMoments) {
  RngStream rng(12);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.exponential();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 1.0, 0.01);
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0, 0.03);
}

class GammaShape : public ::testing::TestWithParam<double> {};

// E X = Var X = shape. Small shapes go through exp(log_gamma).
TEST_P(GammaShape, MeanAndVariance) {
  const double shape = GetParam();
  RngStream rng(13, {static_cast<std::uint64_t>(shape * 1000)});
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = shape < 1.0 ? std::exp(rng.log_gamma(shape)) : rng.gamma(shape);
    ASSERT_GE(x, 0.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, shape, 5 * std::sqrt(shape / n));
  EXPECT_NEAR(var / shape, 1.0, shape < 0.1 ? 0.25 : 0.05);
}

INSTANTIATE_TEST_SUITE_P(Shapes, GammaShape, ::testing::Values(0.05, 0.3, 0.9, 1.0, 2.5, 40.0));

TEST(RngStream, LogGammaTinyShapeFinite) {
  RngStream rng(14);
  for (int i = 0; i < 1000; ++i) ASSERT_TRUE(std::isfinite(rng.log_gamma(1e-4)));
}
