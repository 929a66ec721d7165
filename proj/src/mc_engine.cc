// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/mc_engine.hh"

#include <cmath>
#include <limits>
#include <numeric>

#include "bnpgof/special.hh"

namespace bnpgof {

EmpiricalSample::EmpiricalSample(std::vector<double> values)
    : values_(std::move(values)), sorted_(values_) {
  if (values_.empty()) throw InvalidParameter("empirical sample is empty");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalSample::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

double EmpiricalSample::variance() const {
  if (values_.size() < 2) return 0.0;
  const double mu = mean();
  double ss = 0.0;
  for (double v : values_) ss += (v - mu) * (v - mu);
  return ss / static_cast<double>(values_.size() - 1);
}

double empirical_probability(const EmpiricalSample& sample, double c) {
  const auto s = sample.sorted();
  const auto count = std::upper_bound(s.begin(), s.end(), c) - s.begin();
  return static_cast<double>(count) / static_cast<double>(s.size());
}

double ks_distance(const EmpiricalSample& sample,
                   const std::function<double(double)>& cdf) {
  const auto s = sample.sorted();
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;  // group ties
    const double below = static_cast<double>(i) / n;
    const double through = static_cast<double>(j) / n;
    const double f = cdf(s[i]);
    const double f_left = cdf(std::nextafter(s[i], -std::numeric_limits<double>::infinity()));
    d = std::max({d, std::fabs(through - f), std::fabs(f_left - below)});
    i = j;
  }
  return d;
}

double chi_squared_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi-squared dof must be > 0");
  if (std::isnan(x)) throw DomainError("chi-squared cdf argument is NaN");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi_squared_quantile(double u, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi-squared dof must be > 0");
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile requires u in [0, 1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * std::exp(log_gamma_inverse(0.5 * dof, std::log(u), std::log1p(-u), NAN));
}

}  // namespace bnpgof
