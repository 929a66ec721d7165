// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/chisq.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bnpgof/error.hh"
#include "bnpgof/mc_engine.hh"

namespace bnpgof {

namespace {

void check_positive_bins(std::span<const double> h) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0)) {
      throw ZeroExpectedBin("bin " + std::to_string(i) +
                            " has zero hypothesized probability; merge bins or "
                            "choose other edges");
    }
  }
}

double standard_error(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

void check_settings(const TestSettings& settings) {
  if (!(settings.c > 0.0)) throw InvalidParameter("c must be > 0");
  if (settings.q && !(*settings.q > 0.0 && *settings.q < 1.0)) {
    throw InvalidParameter("q must lie in (0, 1)");
  }
  if (settings.mc.replicates == 0) throw InvalidParameter("replicates must be >= 1");
  if (settings.mc.n_atoms == 0) throw InvalidParameter("n_atoms must be >= 1");
}

McSettings with_seed(const McSettings& mc, std::uint64_t seed) {
  McSettings out = mc;
  out.seed = seed;
  return out;
}

}  // namespace

double chisq_distance(double alpha, std::span<const double> p, std::span<const double> h) {
  if (p.size() != h.size()) throw InvalidParameter("p and h lengths differ");
  check_positive_bins(h);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - h[i];
    sum += d * d / h[i];
  }
  return alpha * sum;
}

void resolve_alpha(const TestSettings& settings,
                   const std::function<double(double)>& prior_probability,
                   TestReport& report) {
  report.c = settings.c;
  if (settings.alpha) {
    if (!(*settings.alpha > 0.0)) throw InvalidParameter("alpha must be > 0");
    report.alpha = *settings.alpha;
    if (settings.q) {
      report.q = *settings.q;
      report.q_source = "given";
    } else {
      report.q = prior_probability(report.alpha);
      report.q_source = "prior-at-alpha";
    }
    return;
  }
  if (!settings.q) throw InvalidParameter("q is required when alpha is not fixed");
  CalibrationSpec spec = settings.search;
  spec.c = settings.c;
  spec.q = *settings.q;
  const CalibrationResult cal = calibrate(spec, prior_probability);
  report.alpha = cal.alpha;
  report.q = spec.q;
  report.q_source = "given";
  report.calibration = cal;
  if (!cal.converged) {
    report.warnings.push_back("calibration stopped at the iteration cap without "
                              "reaching the tolerance");
  }
}

std::uint64_t purpose_seed(std::uint64_t seed, SeedPurpose purpose) {
  return derive_seed(seed, {static_cast<std::uint64_t>(purpose)});
}

DistanceDraws distance_draws(const DpParams1& params, std::span<const double> ref_bins,
                             const Partition& partition, const McSettings& mc) {
  if (ref_bins.size() != partition.bins()) {
    throw InvalidParameter("reference bins do not match the partition");
  }
  check_positive_bins(ref_bins);
  std::vector<double> base_bins;
  if (mc.bin_masses) base_bins = bin_probabilities(params.base, partition);

  const auto rows = run_replicates<std::vector<double>>(
      mc.replicates, mc.seed, mc.workers,
      [&](std::size_t, RngStream& rng) {
        if (mc.bin_masses) {
          return sample_bin_masses(params.alpha, base_bins, mc.n_atoms, rng);
        }
        return measure_on_partition(sample_dp(params, mc.n_atoms, mc.repr, rng),
                                    partition);
      });

  DistanceDraws out;
  out.values.reserve(rows.size());
  out.mean_bins.assign(partition.bins(), 0.0);
  for (const auto& p : rows) {
    out.values.push_back(chisq_distance(params.alpha, p, ref_bins));
    for (std::size_t i = 0; i < p.size(); ++i) out.mean_bins[i] += p[i];
  }
  for (double& v : out.mean_bins) v /= static_cast<double>(rows.size());
  return out;
}

DistanceDraws prior_distance_draws(const DpParams1& prior, const Measure& f0,
                                   const Partition& partition, const McSettings& mc) {
  return distance_draws(prior, bin_probabilities(f0, partition), partition, mc);
}

DistanceDraws posterior_distance_draws(const DpParams1& posterior, const Measure& f0,
                                       const Partition& partition, const McSettings& mc) {
  return distance_draws(posterior, bin_probabilities(f0, partition), partition, mc);
}

CalibrationResult calibrate(const CalibrationSpec& spec,
                            const std::function<double(double)>& probability_at) {
  if (!(spec.q > 0.0 && spec.q < 1.0)) throw InvalidParameter("q must lie in (0, 1)");
  if (!(spec.alpha_lo > 0.0 && spec.alpha_lo < spec.alpha_hi)) {
    throw InvalidParameter("calibration bracket must satisfy 0 < alpha_lo < alpha_hi");
  }
  if (!(spec.tolerance > 0.0)) throw InvalidParameter("tolerance must be > 0");

  CalibrationResult result;
  auto evaluate = [&](double alpha) {
    const double p = probability_at(alpha);
    result.trace.push_back({alpha, p});
    return p;
  };
  auto accept = [&](double alpha, double p) {
    result.alpha = alpha;
    result.probability = p;
    result.iterations = result.trace.size();
    result.converged = true;
    return result;
  };

  const double p_lo = evaluate(spec.alpha_lo);
  if (std::fabs(p_lo - spec.q) <= spec.tolerance) return accept(spec.alpha_lo, p_lo);
  const double p_hi = evaluate(spec.alpha_hi);
  if (std::fabs(p_hi - spec.q) <= spec.tolerance) return accept(spec.alpha_hi, p_hi);
  if (p_lo < spec.q || p_hi > spec.q) {
    throw BracketFailure("q = " + std::to_string(spec.q) +
                         " is not attainable for alpha in [" +
                         std::to_string(spec.alpha_lo) + ", " +
                         std::to_string(spec.alpha_hi) + "]: Pr(D <= c) ranges over [" +
                         std::to_string(p_hi) + ", " + std::to_string(p_lo) + "]");
  }

  double lo = std::log10(spec.alpha_lo);
  double hi = std::log10(spec.alpha_hi);
  double best_alpha = spec.alpha_lo;
  double best_p = p_lo;
  for (std::size_t it = 0; it < spec.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double alpha = std::pow(10.0, mid);
    const double p = evaluate(alpha);
    if (std::fabs(p - spec.q) < std::fabs(best_p - spec.q)) {
      best_alpha = alpha;
      best_p = p;
    }
    if (std::fabs(p - spec.q) <= spec.tolerance) return accept(alpha, p);
    if (p > spec.q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.alpha = best_alpha;
  result.probability = best_p;
  result.iterations = result.trace.size();
  result.converged = false;
  return result;
}

CalibrationResult calibrate_alpha(const CalibrationSpec& spec, const Measure& h,
                                  const Measure& f0, const Partition& partition,
                                  const McSettings& mc) {
  const std::vector<double> f0_bins = bin_probabilities(f0, partition);
  check_positive_bins(f0_bins);
  return calibrate(spec, [&](double alpha) {
    const DistanceDraws d = distance_draws({alpha, h}, f0_bins, partition, mc);
    return empirical_probability(EmpiricalSample(d.values), spec.c);
  });
}

std::vector<double> observed_proportions(std::span<const double> data,
                                         const Partition& partition) {
  std::vector<double> out(partition.bins(), 0.0);
  if (data.empty()) return out;
  for (double x : data) out[partition.bin_of(x)] += 1.0;
  for (double& v : out) v /= static_cast<double>(data.size());
  return out;
}

TestReport gof_simple(std::span<const double> data, const Measure& f0,
                      const Partition& partition, const TestSettings& settings) {
  if (data.empty()) throw InvalidParameter("data must be nonempty");
  check_settings(settings);
  const std::vector<double> f0_bins = bin_probabilities(f0, partition);
  check_positive_bins(f0_bins);
  const McSettings& mc = settings.mc;

  TestReport report;
  report.test = "gof";
  resolve_alpha(
      settings,
      [&](double alpha) {
        const DistanceDraws d =
            distance_draws({alpha, f0}, f0_bins, partition,
                           with_seed(mc, purpose_seed(mc.seed, SeedPurpose::kCalibration)));
        return empirical_probability(EmpiricalSample(d.values), settings.c);
      },
      report);

  const DpParams1 posterior = posterior_params({report.alpha, f0}, data);
  const DistanceDraws draws =
      distance_draws(posterior, f0_bins, partition,
                     with_seed(mc, purpose_seed(mc.seed, SeedPurpose::kPosterior)));
  report.alpha_star = posterior.alpha;
  report.probability = empirical_probability(EmpiricalSample(draws.values), settings.c);
  report.standard_error = standard_error(report.probability, mc.replicates);
  report.reject = report.probability < report.q;
  report.replicates = mc.replicates;
  report.seed = mc.seed;
  report.n_atoms = mc.n_atoms;
  report.m = data.size();
  report.edges.assign(partition.edges().begin(), partition.edges().end());
  report.observed_bins = observed_proportions(data, partition);
  report.posterior_bins = draws.mean_bins;
  report.null_bins = f0_bins;
  return report;
}

// ---------------------------------------------------------------- composite

bool family_admits(Family family, double theta) {
  switch (family) {
    case Family::kExponential:
      return theta > 0.0 && std::isfinite(theta);
    case Family::kNormalMean:
      return std::isfinite(theta);
  }
  return false;
}

Measure family_member(Family family, double theta) {
  if (!family_admits(family, theta)) {
    throw InvalidParameter("parameter outside the family's domain");
  }
  switch (family) {
    case Family::kExponential:
      return Measure::exponential(theta);
    case Family::kNormalMean:
      return Measure::normal(theta, 1.0);
  }
  throw InvalidParameter("unknown family");
}

double log_likelihood(Family family, double theta, std::span<const double> data) {
  if (!family_admits(family, theta)) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  switch (family) {
    case Family::kExponential:
      for (double x : data) {
        if (x < 0.0) return -std::numeric_limits<double>::infinity();
        sum += x;
      }
      return static_cast<double>(data.size()) * std::log(theta) - theta * sum;
    case Family::kNormalMean:
      for (double x : data) sum += (x - theta) * (x - theta);
      return -0.5 * sum - 0.5 * static_cast<double>(data.size()) * std::log(2.0 * M_PI);
  }
  return sum;
}

std::pair<double, double> exponential_gamma_posterior(double shape, double rate,
                                                      std::span<const double> data) {
  const double sum = std::accumulate(data.begin(), data.end(), 0.0);
  return {shape + static_cast<double>(data.size()), rate + sum};
}

ThetaDraws sample_theta_posterior(const CompositeSpec& spec, std::span<const double> data,
                                  std::size_t count, RngStream& rng) {
  if (count == 0) throw InvalidParameter("number of theta draws must be >= 1");
  ThetaDraws out;
  out.values.reserve(count);

  if (spec.sampler == ThetaSampler::kConjugate) {
    if (spec.family != Family::kExponential || spec.prior.kind() != Measure::Kind::kGamma) {
      throw InvalidParameter(
          "conjugate sampling needs the exponential family with a gamma prior");
    }
    const std::vector<double> prior = spec.prior.parameters();
    const auto post = exponential_gamma_posterior(prior[0], prior[1], data);
    out.conjugate = post;
    for (std::size_t i = 0; i < count; ++i) {
      out.values.push_back(rng.gamma(post.first) / post.second);
    }
    return out;
  }

  auto log_target = [&](double theta) {
    if (!family_admits(spec.family, theta)) return -std::numeric_limits<double>::infinity();
    const double lp = spec.prior.log_density(theta);
    if (lp == -std::numeric_limits<double>::infinity()) return lp;
    return lp + log_likelihood(spec.family, theta, data);
  };

  double theta;
  try {
    theta = spec.prior.mean();
  } catch (const DomainError&) {
    theta = spec.prior.quantile(0.5);
  }
  double current = log_target(theta);
  if (!std::isfinite(current)) {
    throw InvalidParameter("Metropolis chain cannot start: target is zero at the prior centre");
  }
  double step = spec.mh_step > 0.0 ? spec.mh_step : 0.5 * std::fabs(theta) + (theta == 0.0);

  constexpr std::size_t kBatch = 50;
  std::size_t batch_accepted = 0;
  std::size_t accepted = 0;
  const std::size_t total = spec.burn_in + count;
  for (std::size_t it = 0; it < total; ++it) {
    const double proposal = theta + step * rng.normal();
    const double candidate = log_target(proposal);
    const bool take = std::log(rng.uniform_open()) < candidate - current;
    if (take) {
      theta = proposal;
      current = candidate;
    }
    if (it < spec.burn_in) {
      batch_accepted += take;
      if ((it + 1) % kBatch == 0) {
        const double rate = static_cast<double>(batch_accepted) / kBatch;
        if (rate < 0.2) step *= 0.6;
        if (rate > 0.5) step *= 1.6;
        batch_accepted = 0;
      }
    } else {
      accepted += take;
      out.values.push_back(theta);
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(count);
  if (out.acceptance_rate < 0.01) {
    out.warnings.push_back("Metropolis acceptance rate below 1%; the chain is degenerate");
  }
  return out;
}

TestReport gof_composite(std::span<const double> data, const CompositeSpec& spec,
                         const std::optional<Partition>& partition_in,
                         const TestSettings& settings) {
  if (data.empty()) throw InvalidParameter("data must be nonempty");
  if (spec.m_theta == 0) throw InvalidParameter("m_theta must be >= 1");
  check_settings(settings);
  const McSettings& mc = settings.mc;

  TestReport report;
  report.test = "gof-composite";

  RngStream theta_rng(purpose_seed(mc.seed, SeedPurpose::kTheta));
  const ThetaDraws thetas = sample_theta_posterior(spec, data, spec.m_theta, theta_rng);
  report.warnings = thetas.warnings;
  report.acceptance_rate = thetas.acceptance_rate;
  report.theta_posterior = thetas.conjugate;

  Partition partition = partition_in ? *partition_in : Partition({0.0});
  if (!partition_in) {
    if (spec.k < 2) throw InvalidParameter("k must be >= 2");
    const double theta_bar = std::accumulate(thetas.values.begin(), thetas.values.end(), 0.0) /
                             static_cast<double>(thetas.values.size());
    const Measure f_bar = family_member(spec.family, theta_bar);
    std::vector<double> edges;
    for (std::size_t j = 1; j < spec.k; ++j) {
      edges.push_back(f_bar.quantile(static_cast<double>(j) / static_cast<double>(spec.k)));
    }
    partition = Partition(std::move(edges));
  }

  double theta_hat;
  try {
    theta_hat = spec.prior.mean();
  } catch (const DomainError&) {
    theta_hat = spec.prior.quantile(0.5);
    report.warnings.push_back("prior has no mean; its median stands in for E(theta)");
  }
  report.theta_hat = theta_hat;
  const Measure f_hat = family_member(spec.family, theta_hat);
  const std::vector<double> f_hat_bins = bin_probabilities(f_hat, partition);
  check_positive_bins(f_hat_bins);

  resolve_alpha(
      settings,
      [&](double alpha) {
        const DistanceDraws d =
            distance_draws({alpha, f_hat}, f_hat_bins, partition,
                           with_seed(mc, purpose_seed(mc.seed, SeedPurpose::kCalibration)));
        return empirical_probability(EmpiricalSample(d.values), settings.c);
      },
      report);

  // theta_Min: one posterior realization per candidate, all sharing the
  // weight stream and the atom stream.
  const double alpha_star = report.alpha + static_cast<double>(data.size());
  const RngStream scan(purpose_seed(mc.seed, SeedPurpose::kThetaScan));
  RngStream weight_rng = scan.child(0);
  const Weights weights = mc.repr == Representation::kDecreasing
                              ? sample_decreasing_log_weights(alpha_star, mc.n_atoms, weight_rng)
                              : sample_dirichlet_log_weights(alpha_star, mc.n_atoms, weight_rng);
  double best_distance = std::numeric_limits<double>::infinity();
  double theta_min = thetas.values.front();
  for (double theta : thetas.values) {
    const Measure f = family_member(spec.family, theta);
    const std::vector<double> f_bins = bin_probabilities(f, partition);
    if (std::any_of(f_bins.begin(), f_bins.end(), [](double v) { return !(v > 0.0); })) {
      continue;
    }
    const DpParams1 post = posterior_params({report.alpha, f}, data);
    RngStream atom_rng = scan.child(1);
    std::vector<double> p(partition.bins(), 0.0);
    for (std::size_t i = 0; i < mc.n_atoms; ++i) {
      p[partition.bin_of(post.base.draw(atom_rng))] += weights.weights[i];
    }
    const double d = chisq_distance(alpha_star, p, f_bins);
    if (d < best_distance) {
      best_distance = d;
      theta_min = theta;
    }
  }
  report.theta_min = theta_min;

  const Measure f_min = family_member(spec.family, theta_min);
  const std::vector<double> f_min_bins = bin_probabilities(f_min, partition);
  const DpParams1 posterior = posterior_params({report.alpha, f_min}, data);
  const DistanceDraws draws =
      distance_draws(posterior, f_min_bins, partition,
                     with_seed(mc, purpose_seed(mc.seed, SeedPurpose::kPosterior)));

  report.alpha_star = posterior.alpha;
  report.probability = empirical_probability(EmpiricalSample(draws.values), settings.c);
  report.standard_error = standard_error(report.probability, mc.replicates);
  report.reject = report.probability < report.q;
  report.replicates = mc.replicates;
  report.seed = mc.seed;
  report.n_atoms = mc.n_atoms;
  report.m = data.size();
  report.edges.assign(partition.edges().begin(), partition.edges().end());
  report.observed_bins = observed_proportions(data, partition);
  report.posterior_bins = draws.mean_bins;
  report.null_bins = f_min_bins;
  return report;
}

}  // namespace bnpgof
