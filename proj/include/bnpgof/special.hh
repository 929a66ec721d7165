// Apache License, Version 2.0, refer to LICENSE.txt

// Special functions: log-gamma, digamma, trigamma, regularized incomplete
// gamma and its inverse, and the standard normal cdf and quantile.

#pragma once

namespace bnpgof {

// log|Gamma(x)|, reentrant.
double log_gamma_fn(double x);

// psi(x) and psi_1(x) for x > 0, absolute error below 1e-10.
double digamma(double x);
double trigamma(double x);

struct IncompleteGammaLogs {
  double log_p;  // log P(a, x), the regularized lower incomplete gamma
  double log_q;  // log Q(a, x) = log(1 - P(a, x))
};

// Both tails of the regularized incomplete gamma at x = exp(log_x). Taking
// log x keeps the lower tail accurate when x itself underflows.
IncompleteGammaLogs log_incomplete_gamma(double a, double log_x);

double gamma_p(double a, double x);
double gamma_q(double a, double x);

// log x solving P(a, x) = p, where log_p = log p and log_q = log(1 - p).
// Both tails are passed so whichever is smaller drives the solve at full
// relative accuracy. Safeguarded Newton on t = log x inside a bracket that
// falls back to bisection; at most 200 iterations. log_x_hint, when finite,
// seeds the iteration.
double log_gamma_inverse(double a, double log_p, double log_q,
                         double log_x_hint);

double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace bnpgof
