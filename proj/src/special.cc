// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/special.hh"

#include <math.h>

#include <cmath>
#include <limits>

#include "bnpgof/error.hh"

namespace bnpgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogHalf = -0.69314718055994530942;

double log1mexp(double log_v) {
  // log(1 - exp(log_v)) for log_v <= 0.
  if (log_v > kLogHalf) return std::log(-std::expm1(log_v));
  return std::log1p(-std::exp(log_v));
}

}  // namespace

double log_gamma_fn(double x) {
  int sign = 0;
  return lgamma_r(x, &sign);
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("digamma requires finite x > 0");
  }
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // Bernoulli-number tail through x^-14.
  const double tail =
      r * (1.0 / 12 -
           r * (1.0 / 120 -
                r * (1.0 / 252 -
                     r * (1.0 / 240 -
                          r * (1.0 / 132 - r * (691.0 / 32760 - r / 12.0))))));
  return result + std::log(x) - 0.5 / x - tail;
}

double trigamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("trigamma requires finite x > 0");
  }
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  const double tail =
      1.0 / 6 -
      r * (1.0 / 30 -
           r * (1.0 / 42 -
                r * (1.0 / 30 -
                     r * (5.0 / 66 - r * (691.0 / 2730 - r * 7.0 / 6)))));
  return result + 1.0 / x + 0.5 * r + tail * r / x;
}

namespace {

IncompleteGammaLogs incomplete_gamma_impl(double a, double log_x, double lgam_a) {
  if (log_x == -kInf) return {-kInf, 0.0};
  if (log_x == kInf) return {0.0, -kInf};
  const double x = std::exp(log_x);

  if (x < a + 1.0) {
    // Series: P = x^a e^-x / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k)).
    double term = 1.0;
    double sum = 1.0;
    double ap = a;
    for (int k = 0; k < 100000; ++k) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (term < sum * 1e-17) break;
    }
    const double log_p = a * log_x - x - (lgam_a + std::log(a)) + std::log(sum);
    return {log_p, log1mexp(log_p)};
  }

  // Continued fraction for Q (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  const double log_q = a * log_x - x - lgam_a + std::log(h);
  return {log1mexp(log_q), log_q};
}

}  // namespace

IncompleteGammaLogs log_incomplete_gamma(double a, double log_x) {
  if (!(a > 0.0)) throw DomainError("incomplete gamma requires a > 0");
  return incomplete_gamma_impl(a, log_x, log_gamma_fn(a));
}

double gamma_p(double a, double x) {
  if (x < 0.0) throw DomainError("gamma_p requires x >= 0");
  return std::exp(log_incomplete_gamma(a, std::log(x)).log_p);
}

double gamma_q(double a, double x) {
  if (x < 0.0) throw DomainError("gamma_q requires x >= 0");
  return std::exp(log_incomplete_gamma(a, std::log(x)).log_q);
}

double log_gamma_inverse(double a, double log_p, double log_q,
                         double log_x_hint) {
  if (!(a > 0.0)) throw DomainError("gamma inverse requires a > 0");
  if (log_p == -kInf) return -kInf;
  if (log_q == -kInf) return kInf;
  const bool lower = log_p <= log_q;
  const double lgam_a = log_gamma_fn(a);

  double t;
  if (std::isfinite(log_x_hint)) {
    t = log_x_hint;
  } else if (a >= 1.0) {
    // Wilson-Hilferty.
    const double z = lower ? normal_quantile(std::exp(log_p))
                           : -normal_quantile(std::exp(log_q));
    const double s = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
    t = s > 0.0 ? std::log(a) + 3.0 * std::log(s) : std::log(a) - 5.0;
  } else if (lower) {
    // P(a, x) ~ x^a / Gamma(a + 1) for small x.
    t = std::min((log_p + lgam_a + std::log(a)) / a, 0.0);
  } else {
    // Q(a, x) ~ x^(a-1) e^-x / Gamma(a) for large x.
    double x = std::max(1.0, -log_q - lgam_a);
    x = std::max(1.0, -log_q - lgam_a + (a - 1.0) * std::log(x));
    t = std::log(x);
  }

  double lo = -kInf;
  double hi = kInf;
  double expand = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const IncompleteGammaLogs tails = incomplete_gamma_impl(a, t, lgam_a);
    const double x = std::exp(t);
    double f, log_slope;
    if (lower) {
      f = tails.log_p - log_p;
      log_slope = a * t - x - lgam_a - tails.log_p;
    } else {
      f = log_q - tails.log_q;
      log_slope = a * t - x - lgam_a - tails.log_q;
    }
    if (f == 0.0) return t;
    if (f < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double slope = std::exp(log_slope);
    double next = t - f / slope;
    // f is a log-ratio; once it is this small the Newton step is final.
    if (std::fabs(f) <= 1e-14 && next > lo && next < hi) return next;
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else {
        next = f < 0.0 ? t + expand : t - expand;
        expand *= 2.0;
      }
    }
    if (std::fabs(next - t) <= 4e-16 * std::max(1.0, std::fabs(t)) ||
        (std::isfinite(lo) && std::isfinite(hi) &&
         hi - lo <= 4e-16 * std::max(1.0, std::fabs(t)))) {
      return next;
    }
    t = next;
  }
  return t;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw DomainError("normal_quantile requires p in [0, 1]");
  }
  // Acklam's rational approximation, then one Halley step on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace bnpgof
