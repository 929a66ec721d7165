// Apache License, Version 2.0, refer to LICENSE.txt

#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>

#include "bnpgof/error.hh"
#include "bnpgof/kl.hh"
#include "oracles.hh"

using namespace bnpgof;

TEST(Interleave, CutsSeparateSortedAtoms) {
  const std::vector<double> atoms = {0.3, -1.2, 2.0, 0.1};
  const InterleavedPartition ip = interleave(atoms, Measure::normal(0, 1));
  ASSERT_EQ(ip.size(), 4u);
  ASSERT_EQ(ip.cuts.size(), 5u);
  EXPECT_EQ(ip.atoms, (std::vector<double>{-1.2, 0.1, 0.3, 2.0}));
  EXPECT_EQ(ip.order, (std::vector<std::size_t>{1, 3, 0, 2}));
  for (std::size_t i = 0; i < ip.size(); ++i) {
    EXPECT_LT(ip.cuts[i], ip.atoms[i]);
    EXPECT_GT(ip.cuts[i + 1], ip.atoms[i]);
  }
  EXPECT_DOUBLE_EQ(ip.cuts[1], (-1.2 + 0.1) / 2);
  EXPECT_DOUBLE_EQ(ip.cuts[0], -1.2 - 0.65);
  EXPECT_DOUBLE_EQ(ip.cuts[4], 2.0 + 0.85);
  for (std::size_t i = 0; i < ip.size(); ++i) {
    EXPECT_NEAR(ip.q[i] * (ip.cuts[i + 1] - ip.cuts[i]), ip.mass[i], 1e-15);
  }
  const double mass = std::accumulate(ip.mass.begin(), ip.mass.end(), 0.0);
  const Measure f = Measure::normal(0, 1);
  EXPECT_NEAR(mass, f.cdf(ip.cuts[4]) - f.cdf(ip.cuts[0]), 1e-12);
}

TEST(Interleave, SingleAtomAndTies) {
  const std::vector<double> one = {1.0};
  const InterleavedPartition a = interleave(one, Measure::normal(0, 1));
  EXPECT_DOUBLE_EQ(a.cuts[0], 0.5);
  EXPECT_DOUBLE_EQ(a.cuts[1], 1.5);
  EXPECT_NEAR(a.mass[0], Measure::normal(0, 1).cdf(1.5) - Measure::normal(0, 1).cdf(0.5), 1e-15);

  const std::vector<double> tied = {1.0, 1.0, 1.0, 0.0};
  const InterleavedPartition b = interleave(tied, Measure::normal(0, 1));
  EXPECT_EQ(b.ties_perturbed, 2u);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LT(b.atoms[i - 1], b.atoms[i]);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_LT(b.cuts[i], b.atoms[i]);
    EXPECT_LT(b.atoms[i], b.cuts[i + 1]);
  }
}

TEST(Kl, DiscreteBruteForce) {
  const std::vector<double> p = {0.2, 0.0, 0.5, 0.3};
  const std::vector<double> q = {0.25, 0.25, 0.25, 0.25};
  double want = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (p[i] > 0) want += p[i] * std::log(p[i] / q[i]);
  }
  EXPECT_NEAR(kl_p_to_f(p, q), want, 1e-15);
  EXPECT_NEAR(discrete_kl(p, q), want, 1e-15);
  std::vector<double> lp(4);
  for (std::size_t i = 0; i < 4; ++i) lp[i] = std::log(p[i]);
  EXPECT_TRUE(std::isinf(kl_f_to_p(q, lp)));
  EXPECT_EQ(kl_p_to_f(q, q), 0.0);
  const std::vector<double> q0 = {0.0, 0.5, 0.5, 0.0};
  EXPECT_TRUE(std::isinf(kl_p_to_f(p, q0)));
}

TEST(Kl, NonNegativeOnProbabilityVectors) {
  std::mt19937_64 gen(1);
  for (int r = 0; r < 200; ++r) {
    const auto p = oracle::dirichlet(0.7, 9, gen);
    const auto q = oracle::dirichlet(2.0, 9, gen);
    EXPECT_GE(kl_p_to_f(p, q), -1e-14);
    std::vector<double> lp(9);
    for (std::size_t i = 0; i < 9; ++i) lp[i] = std::log(p[i]);
    EXPECT_GE(kl_f_to_p(q, lp), -1e-14);
  }
}

// Marginal p_i ~ Beta(a, alpha - a); integrate against the density.
TEST(Moments, MarginalsAgainstQuadrature) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double alpha : {1.0, 5.0, 100.0}) {
    for (std::size_t n : {2u, 10u, 50u}) {
      const double a = alpha / n, b = alpha - a;
      const double lb = std::lgamma(a) + std::lgamma(b) - std::lgamma(alpha);
      auto e = [&](auto g) {
        return integrator.integrate(
            [&](double p) {
              if (p <= 0 || p >= 1) return 0.0;
              return g(p) * std::exp((a - 1) * std::log(p) + (b - 1) * std::log1p(-p) - lb);
            },
            0.0, 1.0);
      };
      const double m1 = e([](double p) { return p * std::log(p); });
      const double m2 = e([](double p) { return p * p * std::log(p) * std::log(p); });
      const double mx = e([](double p) { return p * p * std::log(p); });
      const DirichletMoments d = dirichlet_moments(alpha, n);
      const double scale = std::max(std::abs(m2 - m1 * m1), 1e-300);
      EXPECT_NEAR(d.var_plogp, m2 - m1 * m1, 1e-7 * scale + 1e-13) << alpha << " " << n;
      EXPECT_NEAR(d.cov_plogp_p, mx - m1 / n, 1e-7 * std::abs(mx) + 1e-13) << alpha << " " << n;
      EXPECT_NEAR(d.var_p, (n - 1.0) / (n * n * (alpha + 1)), 1e-15);
      EXPECT_NEAR(d.cov_p, -1.0 / (n * n * (alpha + 1)), 1e-15);
    }
  }
}

TEST(Moments, SingleAtomIsDegenerate) {
  const std::vector<double> q = {1.0};
  EXPECT_EQ(mean_kl_p_to_f(3.0, 1, q), 0.0);
  EXPECT_EQ(var_kl_p_to_f(3.0, 1, q), 0.0);
  EXPECT_EQ(mean_kl_f_to_p(3.0, 1, q), 0.0);
  EXPECT_EQ(var_kl_f_to_p(3.0, 1, q), 0.0);
}

// KL moments against an independent Dirichlet sampler.
class KlMoments : public ::testing::TestWithParam<std::tuple<double, std::size_t>> {};

TEST_P(KlMoments, AgainstMonteCarlo) {
  const auto [alpha, n] = GetParam();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = (i + 1.0);
  const double s = std::accumulate(q.begin(), q.end(), 0.0);
  for (double& v : q) v /= s;
  std::mt19937_64 gen(static_cast<std::uint64_t>(alpha * 100 + n));
  const std::size_t reps = 100000;
  std::vector<double> a(reps), b(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto p = oracle::dirichlet(alpha / n, n, gen);
    double x = 0.0, y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] > 0) x += p[i] * std::log(p[i] / q[i]);
      y += q[i] * std::log(q[i] / p[i]);
    }
    a[r] = x;
    b[r] = y;
  }
  const auto ma = oracle::moments(a), mb = oracle::moments(b);
  EXPECT_NEAR(mean_kl_p_to_f(alpha, n, q), ma.mean, 4 * std::sqrt(ma.var / reps));
  EXPECT_NEAR(var_kl_p_to_f(alpha, n, q) / ma.var, 1.0, 0.05);
  EXPECT_NEAR(mean_kl_f_to_p(alpha, n, q), mb.mean, 4 * std::sqrt(mb.var / reps));
  EXPECT_NEAR(var_kl_f_to_p(alpha, n, q) / mb.var, 1.0, 0.05);
}

INSTANTIATE_TEST_SUITE_P(Grid, KlMoments,
                         ::testing::Values(std::make_tuple(5.0, std::size_t{2}),
                                           std::make_tuple(5.0, std::size_t{10}),
                                           std::make_tuple(100.0, std::size_t{10}),
                                           std::make_tuple(100.0, std::size_t{50})));

TEST(Kl, RealizationMatchesSpanForm) {
  RngStream rng(3);
  const auto r = sample_dp({4.0, Measure::normal(0, 1)}, 30, Representation::kFinite, rng);
  const InterleavedPartition ip = interleave(r.atoms, Measure::normal(0, 1));
  std::vector<double> p(30), lp(30);
  for (std::size_t i = 0; i < 30; ++i) {
    p[i] = r.weights[ip.order[i]];
    lp[i] = r.log_weights[ip.order[i]];
  }
  EXPECT_NEAR(kl_p_to_f(r, ip), kl_p_to_f(p, ip.q), 1e-12);
  EXPECT_NEAR(kl_f_to_p(r, ip), kl_f_to_p(ip.q, lp), 1e-12);
}
