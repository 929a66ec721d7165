// Apache License, Version 2.0, refer to LICENSE.txt

// Chi-squared distance between Dirichlet process realizations and a
// hypothesized distribution, calibration of the concentration parameter,
// and the simple and composite goodness-of-fit tests.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnpgof/dp_sim.hh"
#include "bnpgof/measures.hh"

namespace bnpgof {

// alpha * sum (p_i - h_i)^2 / h_i. Throws ZeroExpectedBin if some h_i = 0.
double chisq_distance(double alpha, std::span<const double> p, std::span<const double> h);

struct McSettings {
  std::size_t n_atoms = 2000;
  std::size_t replicates = 2000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  Representation repr = Representation::kDecreasing;
  // Draw the bin masses with sample_bin_masses instead of building each
  // realization. Same law, O(k) per draw; meant for very large n_atoms.
  bool bin_masses = false;
};

struct DistanceDraws {
  std::vector<double> values;
  std::vector<double> mean_bins;  // mean of P(A_i) over the replicates
};

// Replicate i draws P ~ DP(params) with mc.n_atoms atoms and records
// params.alpha * sum (P(A_i) - ref_i)^2 / ref_i.
DistanceDraws distance_draws(const DpParams1& params, std::span<const double> ref_bins,
                             const Partition& partition, const McSettings& mc);

// D(P, F0) under the prior DP(alpha, H).
DistanceDraws prior_distance_draws(const DpParams1& prior, const Measure& f0,
                                   const Partition& partition, const McSettings& mc);
// D(P*, F0) under the posterior DP(alpha + m, H*_m).
DistanceDraws posterior_distance_draws(const DpParams1& posterior, const Measure& f0,
                                       const Partition& partition, const McSettings& mc);

struct CalibrationSpec {
  double c = 0.0;
  double q = 0.5;
  double alpha_lo = 1e-2;
  double alpha_hi = 1e4;
  double tolerance = 0.01;
  std::size_t max_iterations = 40;
};

struct CalibrationStep {
  double alpha;
  double probability;
};

struct CalibrationResult {
  double alpha = 0.0;
  double probability = 0.0;  // estimated Pr(D <= c) at alpha
  std::size_t iterations = 0;  // evaluations, bracket ends included
  bool converged = false;
  std::vector<CalibrationStep> trace;
};

// Bisection on log10(alpha) for probability_at(alpha) = q within tolerance.
// probability_at must be decreasing in alpha. Returns the best point found if
// max_iterations runs out (converged = false). Throws BracketFailure when q
// lies outside [probability_at(alpha_hi), probability_at(alpha_lo)] by more
// than the tolerance.
CalibrationResult calibrate(const CalibrationSpec& spec,
                            const std::function<double(double)>& probability_at);

// Pr(D(P, F0) <= c) with P ~ DP(alpha, h). Every evaluation reuses the
// seed in mc, so the objective is a deterministic function of alpha.
CalibrationResult calibrate_alpha(const CalibrationSpec& spec, const Measure& h,
                                  const Measure& f0, const Partition& partition,
                                  const McSettings& mc);

// Inputs shared by the tests. Either alpha is fixed, or it is calibrated
// from (c, q). With a fixed alpha and no q, q is taken as the prior
// probability Pr(D <= c) at that alpha.
struct TestSettings {
  double c = 0.0;
  std::optional<double> q;
  std::optional<double> alpha;
  CalibrationSpec search;  // bracket, tolerance, iteration cap
  McSettings mc;
};

struct TestReport {
  std::string test;  // "gof", "gof-composite" or "indep"
  double alpha = 0.0;
  double alpha_star = 0.0;
  double c = 0.0;
  double q = 0.0;
  std::string q_source;  // "given" or "prior-at-alpha"
  double probability = 0.0;
  double standard_error = 0.0;
  bool reject = false;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t n_atoms = 0;
  std::size_t m = 0;
  std::vector<double> edges;
  std::vector<double> observed_bins;   // data proportions
  std::vector<double> posterior_bins;  // mean over replicates
  std::vector<double> null_bins;
  std::optional<CalibrationResult> calibration;
  std::vector<std::string> warnings;

  // Composite test.
  std::optional<double> theta_hat;
  std::optional<double> theta_min;
  std::optional<double> acceptance_rate;
  std::optional<std::pair<double, double>> theta_posterior;  // conjugate (shape, rate)

  // Independence test.
  std::optional<Table> posterior_grid;
  std::vector<double> row_margin;
  std::vector<double> col_margin;
  std::vector<double> y_edges;
  std::size_t dof = 0;

  std::string decision() const { return reject ? "reject" : "no-evidence-to-reject"; }
};

// Sets report.alpha, q, q_source and calibration from the settings, given
// the prior probability Pr(D <= c) as a function of alpha.
void resolve_alpha(const TestSettings& settings,
                   const std::function<double(double)>& prior_probability,
                   TestReport& report);

// Fraction of data in each bin.
std::vector<double> observed_proportions(std::span<const double> data,
                                         const Partition& partition);

TestReport gof_simple(std::span<const double> data, const Measure& f0,
                      const Partition& partition, const TestSettings& settings);

// Parametric families F_theta for the composite test.
enum class Family {
  kExponential,  // exp(rate theta)
  kNormalMean,   // normal(theta, 1)
};

Measure family_member(Family family, double theta);
bool family_admits(Family family, double theta);

enum class ThetaSampler { kConjugate, kMetropolis };

struct CompositeSpec {
  Family family = Family::kExponential;
  Measure prior = Measure::gamma(1.0, 1.0);
  std::size_t m_theta = 1000;
  ThetaSampler sampler = ThetaSampler::kConjugate;
  double mh_step = 0.0;  // 0 picks a starting step from the prior
  std::size_t burn_in = 500;
  std::size_t k = 4;  // bins when no partition is supplied
};

struct ThetaDraws {
  std::vector<double> values;
  double acceptance_rate = 1.0;
  std::optional<std::pair<double, double>> conjugate;  // posterior (shape, rate)
  std::vector<std::string> warnings;
};

// Gamma(shape, rate) prior with exponential data gives
// Gamma(shape + m, rate + sum x).
std::pair<double, double> exponential_gamma_posterior(double shape, double rate,
                                                      std::span<const double> data);

double log_likelihood(Family family, double theta, std::span<const double> data);

// Conjugate mode draws exactly; Metropolis mode runs a Gaussian random walk
// whose step adapts toward 20-50% acceptance during burn-in.
ThetaDraws sample_theta_posterior(const CompositeSpec& spec, std::span<const double> data,
                                  std::size_t count, RngStream& rng);

// Without a partition the edges are the k-quantiles of F at the mean of the
// theta draws.
TestReport gof_composite(std::span<const double> data, const CompositeSpec& spec,
                         const std::optional<Partition>& partition,
                         const TestSettings& settings);

// Sub-seeds used by the tests, one per purpose.
enum class SeedPurpose : std::uint64_t {
  kCalibration = 1,
  kPosterior = 2,
  kTheta = 3,
  kThetaScan = 4,
};

std::uint64_t purpose_seed(std::uint64_t seed, SeedPurpose purpose);

}  // namespace bnpgof
