// Apache License, Version 2.0, refer to LICENSE.txt

// Reference implementations used only by the tests. They rely on the
// standard library and Boost, never on the code under test.

#pragma once

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Sethuraman stick-breaking for DP(alpha, H), truncated once the leftover
// stick is below tail. base_draw maps a uniform to a draw from H.
struct Stick {
  std::vector<double> atoms;
  std::vector<double> weights;
};

inline Stick stick_breaking(double alpha, const std::function<double(double)>& base_quantile,
                            std::mt19937_64& gen, double tail = 1e-10) {
  std::gamma_distribution<double> ga(1.0, 1.0);
  std::gamma_distribution<double> gb(alpha, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Stick s;
  double left = 1.0;
  while (left > tail) {
    const double x = ga(gen);
    const double v = x / (x + gb(gen));
    s.weights.push_back(left * v);
    s.atoms.push_back(base_quantile(u(gen)));
    left *= 1.0 - v;
  }
  return s;
}

// Symmetric Dirichlet(a, ..., a) through std::gamma_distribution. Fine for
// a >= 0.05 or so; below that many draws underflow.
inline std::vector<double> dirichlet(double a, std::size_t n, std::mt19937_64& gen) {
  std::gamma_distribution<double> g(a, 1.0);
  std::vector<double> out(n);
  double sum = 0.0;
  for (double& v : out) sum += (v = g(gen));
  for (double& v : out) v /= sum;
  return out;
}

// log P(shape, e^lx). Below the double range P(a, x) = x^a / Gamma(a + 1)
// to first order, which is exact there.
inline double log_gamma_p(double shape, double lx) {
  if (lx > -700.0) return std::log(boost::math::gamma_p(shape, std::exp(lx)));
  return shape * lx - boost::math::lgamma(shape + 1.0);
}

// log x with Q(shape, x) = y, by bisection on log x. Small y is matched
// through Q itself, where 1 - y would lose the digits.
inline double log_gamma_survival_inverse(double y, double shape) {
  auto below = [&](double lx) {
    if (y < 0.5) return boost::math::gamma_q(shape, std::exp(lx)) > y;
    return log_gamma_p(shape, lx) < std::log1p(-y);
  };
  double lo = -1e6, hi = 0.0;
  while (below(hi)) hi += 1.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (below(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double pearson(double alpha, const std::vector<double>& p, const std::vector<double>& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - h[i]) * (p[i] - h[i]) / h[i];
  return alpha * s;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

}  // namespace oracle
