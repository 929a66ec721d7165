// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/kl.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bnpgof/error.hh"
#include "bnpgof/special.hh"

namespace bnpgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_moment_args(double alpha, std::size_t n, std::span<const double> q) {
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be > 0");
  if (n == 0) throw InvalidParameter("n must be >= 1");
  if (q.size() != n) throw InvalidParameter("q must have n entries");
}

}  // namespace

InterleavedPartition interleave(std::span<const double> atoms, const Measure& f) {
  const std::size_t n = atoms.size();
  if (n == 0) throw InvalidParameter("interleaved partition needs atoms");
  InterleavedPartition ip;
  ip.order.resize(n);
  std::iota(ip.order.begin(), ip.order.end(), std::size_t{0});
  std::stable_sort(ip.order.begin(), ip.order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
  ip.atoms.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = atoms[ip.order[i]];
    if (!std::isfinite(v)) throw InvalidParameter("atoms must be finite");
    if (i > 0 && v <= ip.atoms[i - 1]) {
      // Two steps up, so a cut point fits strictly between the pair.
      v = std::nextafter(std::nextafter(ip.atoms[i - 1], kInf), kInf);
      ++ip.ties_perturbed;
    }
    ip.atoms[i] = v;
  }

  ip.cuts.resize(n + 1);
  if (n == 1) {
    ip.cuts[0] = ip.atoms[0] - 0.5;
    ip.cuts[1] = ip.atoms[0] + 0.5;
  } else {
    for (std::size_t i = 1; i < n; ++i) {
      // Written this way to avoid overflow near the largest doubles.
      double mid = ip.atoms[i - 1] + 0.5 * (ip.atoms[i] - ip.atoms[i - 1]);
      if (!(mid > ip.atoms[i - 1] && mid < ip.atoms[i])) {
        throw DomainError("atoms too close to interleave cut points");
      }
      ip.cuts[i] = mid;
    }
    ip.cuts[0] = ip.atoms[0] - 0.5 * (ip.atoms[1] - ip.atoms[0]);
    ip.cuts[n] = ip.atoms[n - 1] + 0.5 * (ip.atoms[n - 1] - ip.atoms[n - 2]);
  }

  ip.mass.resize(n);
  ip.q.resize(n);
  double previous = f.cdf(ip.cuts[0]);
  for (std::size_t i = 0; i < n; ++i) {
    const double current = f.cdf(ip.cuts[i + 1]);
    ip.mass[i] = std::max(0.0, current - previous);
    ip.q[i] = ip.mass[i] / (ip.cuts[i + 1] - ip.cuts[i]);
    previous = current;
  }
  return ip;
}

double kl_p_to_f(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidParameter("p and q lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    sum += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return sum;
}

double kl_f_to_p(std::span<const double> q, std::span<const double> log_p) {
  if (q.size() != log_p.size()) throw InvalidParameter("q and p lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (log_p[i] == -kInf) return kInf;
    sum += q[i] * (std::log(q[i]) - log_p[i]);
  }
  return sum;
}

double kl_p_to_f(const DiscreteRandomMeasure<double>& realization,
                 const InterleavedPartition& ip) {
  if (ip.size() != realization.size()) {
    throw InvalidParameter("partition was built for a different realization");
  }
  std::vector<double> p(ip.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = realization.weights[ip.order[i]];
  return kl_p_to_f(p, ip.q);
}

double kl_f_to_p(const DiscreteRandomMeasure<double>& realization,
                 const InterleavedPartition& ip) {
  if (ip.size() != realization.size()) {
    throw InvalidParameter("partition was built for a different realization");
  }
  std::vector<double> log_p(ip.size());
  for (std::size_t i = 0; i < log_p.size(); ++i) {
    log_p[i] = realization.log_weights[ip.order[i]];
  }
  return kl_f_to_p(ip.q, log_p);
}

double discrete_kl(std::span<const double> p, std::span<const double> h) {
  return kl_p_to_f(p, h);
}

DirichletMoments dirichlet_moments(double alpha, std::size_t n) {
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be > 0");
  if (n == 0) throw InvalidParameter("n must be >= 1");
  const double nd = static_cast<double>(n);
  const double a = alpha / nd;
  const double d1 = digamma(a + 1.0) - digamma(alpha + 1.0);  // n E(p log p)
  const double c2 = (a + 1.0) / (nd * (alpha + 1.0));          // E(p_i^2)
  const double c11 = alpha / (nd * nd * (alpha + 1.0));        // E(p_i p_j)
  const double s2 = digamma(a + 2.0) - digamma(alpha + 2.0);
  const double s11 = digamma(a + 1.0) - digamma(alpha + 2.0);
  const double t2 = trigamma(alpha + 2.0);

  DirichletMoments m{};
  m.var_p = (nd - 1.0) / (nd * nd * (alpha + 1.0));
  m.cov_p = -1.0 / (nd * nd * (alpha + 1.0));
  m.var_plogp = c2 * (trigamma(a + 2.0) - t2 + s2 * s2) - d1 * d1 / (nd * nd);
  m.cov_plogp_p = c2 * s2 - d1 / (nd * nd);
  m.cov_plogp_other = c11 * s11 - d1 / (nd * nd);
  m.cov_plogp_plogp = c11 * (s11 * s11 - t2) - d1 * d1 / (nd * nd);
  if (n == 1) {
    // p = 1 is deterministic; the pair terms have no pairs to describe.
    m = DirichletMoments{};
  }
  return m;
}

double mean_kl_p_to_f(double alpha, std::size_t n, std::span<const double> q) {
  check_moment_args(alpha, n, q);
  const double nd = static_cast<double>(n);
  double s1 = 0.0;
  for (double v : q) s1 += std::log(v);
  return digamma(alpha / nd + 1.0) - digamma(alpha + 1.0) - s1 / nd;
}

double var_kl_p_to_f(double alpha, std::size_t n, std::span<const double> q) {
  check_moment_args(alpha, n, q);
  if (n == 1) return 0.0;
  const double nd = static_cast<double>(n);
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : q) {
    const double l = std::log(v);
    s1 += l;
    s2 += l * l;
  }
  const DirichletMoments m = dirichlet_moments(alpha, n);
  const double var_entropy = nd * m.var_plogp + nd * (nd - 1.0) * m.cov_plogp_plogp;
  const double var_cross = s2 * m.var_p + (s1 * s1 - s2) * m.cov_p;
  const double cov = s1 * m.cov_plogp_p + (nd - 1.0) * s1 * m.cov_plogp_other;
  return std::max(0.0, var_entropy + var_cross - 2.0 * cov);
}

double mean_kl_f_to_p(double alpha, std::size_t n, std::span<const double> q) {
  check_moment_args(alpha, n, q);
  const double a = alpha / static_cast<double>(n);
  double qlogq = 0.0;
  double q1 = 0.0;
  for (double v : q) {
    if (v > 0.0) qlogq += v * std::log(v);
    q1 += v;
  }
  if (n == 1) return qlogq;  // log p_1 = 0
  return qlogq - q1 * (digamma(a) - digamma(alpha));
}

double var_kl_f_to_p(double alpha, std::size_t n, std::span<const double> q) {
  check_moment_args(alpha, n, q);
  if (n == 1) return 0.0;
  const double a = alpha / static_cast<double>(n);
  double q1 = 0.0;
  double q2 = 0.0;
  for (double v : q) {
    q1 += v;
    q2 += v * v;
  }
  return std::max(0.0, q2 * trigamma(a) - q1 * q1 * trigamma(alpha));
}

}  // namespace bnpgof
