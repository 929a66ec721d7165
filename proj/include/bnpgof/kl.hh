// Apache License, Version 2.0, refer to LICENSE.txt

// Kullback-Leibler distances between an n-atom realization and a continuous
// distribution F, and the closed-form moments of both directions under
// symmetric Dirichlet(alpha/n) weights.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bnpgof/dp_sim.hh"
#include "bnpgof/measures.hh"

namespace bnpgof {

// Cut points x_1 < theta_(1) < x_2 < ... < theta_(n) < x_{n+1} around the
// sorted atoms, with q_i = (F(x_{i+1}) - F(x_i)) / (x_{i+1} - x_i).
struct InterleavedPartition {
  std::vector<double> atoms;       // sorted, strictly increasing
  std::vector<std::size_t> order;  // atoms[i] is realization atom order[i]
  std::vector<double> cuts;        // n + 1 cut points
  std::vector<double> mass;        // F(x_{i+1}) - F(x_i)
  std::vector<double> q;
  std::size_t ties_perturbed = 0;

  std::size_t size() const { return atoms.size(); }
};

// Cut points are midpoints between neighbours; the outer two sit half the
// adjacent gap beyond the extreme atoms (distance 0.5 when n = 1). Tied
// atoms are pushed up by two representable steps.
InterleavedPartition interleave(std::span<const double> atoms, const Measure& f);

// sum p log p - sum p log q, with 0 log 0 = 0. +inf when some p_i > 0 has
// q_i = 0.
double kl_p_to_f(std::span<const double> p, std::span<const double> q);
// sum q log q - sum q log p, given log p. +inf when some q_i > 0 has p_i = 0.
double kl_f_to_p(std::span<const double> q, std::span<const double> log_p);

double kl_p_to_f(const DiscreteRandomMeasure<double>& realization,
                 const InterleavedPartition& ip);
double kl_f_to_p(const DiscreteRandomMeasure<double>& realization,
                 const InterleavedPartition& ip);

// sum p log(p / h) over bins with p > 0.
double discrete_kl(std::span<const double> p, std::span<const double> h);

// Moments of one coordinate and of pairs i != j of Dirichlet(alpha/n, ...).
struct DirichletMoments {
  double var_p;            // Var(p_i)
  double cov_p;            // Cov(p_i, p_j)
  double var_plogp;        // Var(p_i log p_i)
  double cov_plogp_p;      // Cov(p_i log p_i, p_i)
  double cov_plogp_other;  // Cov(p_i log p_i, p_j)
  double cov_plogp_plogp;  // Cov(p_i log p_i, p_j log p_j)
};

DirichletMoments dirichlet_moments(double alpha, std::size_t n);

// Mean and variance of kl_p_to_f over the weights, atoms (hence q) fixed.
double mean_kl_p_to_f(double alpha, std::size_t n, std::span<const double> q);
double var_kl_p_to_f(double alpha, std::size_t n, std::span<const double> q);

// Mean and variance of kl_f_to_p over the weights, q fixed.
double mean_kl_f_to_p(double alpha, std::size_t n, std::span<const double> q);
double var_kl_f_to_p(double alpha, std::size_t n, std::span<const double> q);

}  // namespace bnpgof
