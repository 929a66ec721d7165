// Apache License, Version 2.0, refer to LICENSE.txt

// Dirichlet process realizations with a finite number of atoms, via the
// symmetric Dirichlet weights and via the decreasing-weight construction
// built on the inverse Gamma(alpha/n, 1) survival function.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bnpgof/measures.hh"
#include "bnpgof/rng.hh"

namespace bnpgof {

template <class Base>
struct DpParams {
  double alpha = 1.0;
  Base base;
};

using DpParams1 = DpParams<Measure>;
using DpParams2 = DpParams<BivariateMeasure>;

// Posterior after m observations: (alpha + m, w H + (1 - w) empirical) with
// w = alpha / (alpha + m). Returns the prior unchanged when data is empty.
DpParams1 posterior_params(const DpParams1& prior, std::span<const double> data);
DpParams2 posterior_params(const DpParams2& prior, std::span<const Point2> data);

template <class Atom>
struct DiscreteRandomMeasure {
  std::vector<Atom> atoms;
  std::vector<double> weights;
  // log of each weight; finite even where the weight underflows to zero.
  std::vector<double> log_weights;

  std::size_t size() const { return atoms.size(); }
};

// Arrival times Gamma_1 < ... < Gamma_{n+1} of a unit-rate Poisson process.
struct GammaArrivals {
  std::vector<double> gammas;
  // tails[i] = Gamma_{n+1} - Gamma_{i+1}, summed from the far end so that
  // 1 - Gamma_i / Gamma_{n+1} keeps full relative precision.
  std::vector<double> tails;

  static GammaArrivals draw(std::size_t n, RngStream& rng);
  std::size_t size() const { return gammas.size() - 1; }
};

struct Weights {
  std::vector<double> weights;
  std::vector<double> log_weights;
};

// Symmetric Dirichlet(alpha/n, ..., alpha/n), normalized in the log domain.
Weights sample_dirichlet_log_weights(double alpha, std::size_t n, RngStream& rng);
std::vector<double> sample_dirichlet_weights(double alpha, std::size_t n,
                                             RngStream& rng);

// Normalized G_n^{-1}(Gamma_i / Gamma_{n+1}), nonincreasing in i.
Weights sample_decreasing_log_weights(double alpha, std::size_t n, RngStream& rng);

// Inverse of the Gamma(shape, 1) survival function: x with Q(shape, x) = y.
double gn_inverse(double y, double shape);
// log of the same, from log y and log(1 - y).
double log_gn_inverse(double log_y, double log_one_minus_y, double shape);

enum class Representation { kDecreasing, kFinite };

// Weights come from rng.child(0), atoms from rng.child(1).
DiscreteRandomMeasure<double> sample_dp_decreasing(const DpParams1& params,
                                                   std::size_t n, RngStream& rng);
DiscreteRandomMeasure<double> sample_dp_finite(const DpParams1& params,
                                               std::size_t n, RngStream& rng);
DiscreteRandomMeasure<double> sample_dp(const DpParams1& params, std::size_t n,
                                        Representation repr, RngStream& rng);
DiscreteRandomMeasure<Point2> sample_dp(const DpParams2& params, std::size_t n,
                                        Representation repr, RngStream& rng);

// Entry i is the total weight of atoms inside bin i.
std::vector<double> measure_on_partition(
    const DiscreteRandomMeasure<double>& realization, const Partition& partition);
Table measure_on_partition(const DiscreteRandomMeasure<Point2>& realization,
                           const Grid& grid);

// Bin masses of an n-atom realization drawn directly: the atom counts per
// bin are multinomial(n, bin_probs) and the masses given the counts are
// Dirichlet(count_i * alpha / n). Same law as measure_on_partition applied
// to either representation, at O(k) cost per draw.
std::vector<double> sample_bin_masses(double alpha, std::span<const double> bin_probs,
                                      std::size_t n, RngStream& rng);

}  // namespace bnpgof
