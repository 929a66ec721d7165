// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/dp_sim.hh"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "bnpgof/error.hh"
#include "bnpgof/special.hh"

namespace bnpgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha_n(double alpha, std::size_t n) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidParameter("concentration alpha must be finite and > 0");
  }
  if (n == 0) throw InvalidParameter("number of atoms n must be >= 1");
}

// Normalize log-scale masses in place and return the linear weights.
Weights normalize_logs(std::vector<double> logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(top)) throw DegenerateDraw("weight draw is not finite");
  double sum = 0.0;
  for (double v : logs) sum += std::exp(v - top);
  const double log_total = top + std::log(sum);
  Weights out;
  out.weights.resize(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    logs[i] -= log_total;
    out.weights[i] = std::exp(logs[i]);
  }
  out.log_weights = std::move(logs);
  return out;
}

template <class Atom, class Base>
DiscreteRandomMeasure<Atom> assemble(Weights w, const Base& base, std::size_t n,
                                     RngStream& atom_rng) {
  DiscreteRandomMeasure<Atom> out;
  out.atoms = base.sample(n, atom_rng);
  out.weights = std::move(w.weights);
  out.log_weights = std::move(w.log_weights);
  return out;
}

template <class Atom, class Base>
DiscreteRandomMeasure<Atom> sample_any(const DpParams<Base>& params, std::size_t n,
                                       Representation repr, RngStream& rng) {
  check_alpha_n(params.alpha, n);
  RngStream weight_rng = rng.child(0);
  RngStream atom_rng = rng.child(1);
  Weights w = repr == Representation::kDecreasing
                  ? sample_decreasing_log_weights(params.alpha, n, weight_rng)
                  : sample_dirichlet_log_weights(params.alpha, n, weight_rng);
  return assemble<Atom>(std::move(w), params.base, n, atom_rng);
}

}  // namespace

DpParams1 posterior_params(const DpParams1& prior, std::span<const double> data) {
  if (data.empty()) return prior;
  const double m = static_cast<double>(data.size());
  return {prior.alpha + m,
          Measure::mixture(prior.alpha / (prior.alpha + m), prior.base,
                           Measure::empirical({data.begin(), data.end()}))};
}

DpParams2 posterior_params(const DpParams2& prior, std::span<const Point2> data) {
  if (data.empty()) return prior;
  const double m = static_cast<double>(data.size());
  return {prior.alpha + m,
          BivariateMeasure::mixture(prior.alpha / (prior.alpha + m), prior.base,
                                    BivariateMeasure::empirical({data.begin(),
                                                                 data.end()}))};
}

GammaArrivals GammaArrivals::draw(std::size_t n, RngStream& rng) {
  std::vector<double> e(n + 1);
  for (double& v : e) v = rng.exponential();
  GammaArrivals out;
  out.gammas.resize(n + 1);
  out.tails.resize(n + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    acc += e[i];
    out.gammas[i] = acc;
  }
  acc = 0.0;
  for (std::size_t i = n + 1; i-- > 0;) {
    out.tails[i] = acc;
    acc += e[i];
  }
  return out;
}

Weights sample_dirichlet_log_weights(double alpha, std::size_t n, RngStream& rng) {
  check_alpha_n(alpha, n);
  const double shape = alpha / static_cast<double>(n);
  std::vector<double> logs(n);
  for (double& v : logs) v = rng.log_gamma(shape);
  return normalize_logs(std::move(logs));
}

std::vector<double> sample_dirichlet_weights(double alpha, std::size_t n,
                                             RngStream& rng) {
  return sample_dirichlet_log_weights(alpha, n, rng).weights;
}

double log_gn_inverse(double log_y, double log_one_minus_y, double shape) {
  if (!(shape > 0.0)) throw DomainError("gn_inverse requires shape > 0");
  if (log_y == -kInf) throw DomainError("gn_inverse requires y > 0");
  if (log_y >= 0.0) return -kInf;
  // Q(shape, x) = y is P(shape, x) = 1 - y.
  return log_gamma_inverse(shape, log_one_minus_y, log_y, NAN);
}

double gn_inverse(double y, double shape) {
  if (!(y > 0.0 && y <= 1.0)) throw DomainError("gn_inverse requires y in (0, 1]");
  if (y == 1.0) return 0.0;
  return std::exp(log_gn_inverse(std::log(y), std::log1p(-y), shape));
}

Weights sample_decreasing_log_weights(double alpha, std::size_t n, RngStream& rng) {
  check_alpha_n(alpha, n);
  const double shape = alpha / static_cast<double>(n);
  const GammaArrivals arrivals = GammaArrivals::draw(n, rng);
  const double log_total = std::log(arrivals.gammas[n]);
  std::vector<double> logs(n);
  double previous = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double log_y = std::log(arrivals.gammas[i]) - log_total;
    const double log_1my = std::log(arrivals.tails[i]) - log_total;
    const double t = log_gn_inverse(log_y, log_1my, shape);
    // G_n^{-1} is nonincreasing; keep rounding from breaking the order.
    previous = std::min(previous, t);
    logs[i] = previous;
  }
  Weights w = normalize_logs(std::move(logs));
  for (std::size_t i = 1; i < n; ++i) {
    w.weights[i] = std::min(w.weights[i], w.weights[i - 1]);
  }
  return w;
}

DiscreteRandomMeasure<double> sample_dp_decreasing(const DpParams1& params,
                                                   std::size_t n, RngStream& rng) {
  return sample_any<double>(params, n, Representation::kDecreasing, rng);
}

DiscreteRandomMeasure<double> sample_dp_finite(const DpParams1& params,
                                               std::size_t n, RngStream& rng) {
  return sample_any<double>(params, n, Representation::kFinite, rng);
}

DiscreteRandomMeasure<double> sample_dp(const DpParams1& params, std::size_t n,
                                        Representation repr, RngStream& rng) {
  return sample_any<double>(params, n, repr, rng);
}

DiscreteRandomMeasure<Point2> sample_dp(const DpParams2& params, std::size_t n,
                                        Representation repr, RngStream& rng) {
  return sample_any<Point2>(params, n, repr, rng);
}

std::vector<double> measure_on_partition(
    const DiscreteRandomMeasure<double>& realization, const Partition& partition) {
  std::vector<double> out(partition.bins(), 0.0);
  for (std::size_t i = 0; i < realization.size(); ++i) {
    out[partition.bin_of(realization.atoms[i])] += realization.weights[i];
  }
  return out;
}

Table measure_on_partition(const DiscreteRandomMeasure<Point2>& realization,
                           const Grid& grid) {
  Table out(grid.x.bins(), grid.y.bins());
  for (std::size_t i = 0; i < realization.size(); ++i) {
    const Point2& a = realization.atoms[i];
    out(grid.x.bin_of(a.x), grid.y.bin_of(a.y)) += realization.weights[i];
  }
  return out;
}

std::vector<double> sample_bin_masses(double alpha, std::span<const double> bin_probs,
                                      std::size_t n, RngStream& rng) {
  check_alpha_n(alpha, n);
  const double shape = alpha / static_cast<double>(n);
  const std::size_t k = bin_probs.size();
  std::vector<std::int64_t> counts(k, 0);
  auto remaining = static_cast<std::int64_t>(n);
  double remaining_prob = 1.0;
  for (std::size_t i = 0; i + 1 < k && remaining > 0; ++i) {
    const double p =
        remaining_prob > 0.0 ? std::clamp(bin_probs[i] / remaining_prob, 0.0, 1.0) : 1.0;
    std::binomial_distribution<std::int64_t> binom(remaining, p);
    counts[i] = binom(rng);
    remaining -= counts[i];
    remaining_prob -= bin_probs[i];
  }
  if (k > 0) counts[k - 1] += remaining;

  std::vector<double> logs(k, -kInf);
  for (std::size_t i = 0; i < k; ++i) {
    if (counts[i] > 0) logs[i] = rng.log_gamma(static_cast<double>(counts[i]) * shape);
  }
  return normalize_logs(std::move(logs)).weights;
}

}  // namespace bnpgof
