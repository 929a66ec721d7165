// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/measures.hh"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bnpgof/error.hh"
#include "bnpgof/special.hh"

namespace bnpgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view field =
        text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() ||
        res.ptr != field.data() + field.size()) {
      throw InvalidParameter("malformed number '" + std::string(field) +
                             "' in measure specification");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Partition

Partition::Partition(std::vector<double> edges) : edges_(std::move(edges)) {
  require(!edges_.empty(), "partition needs at least one cut point (k >= 2)");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    require(std::isfinite(edges_[i]), "partition cut points must be finite");
    if (i > 0) {
      require(edges_[i - 1] < edges_[i],
              "partition cut points must be strictly increasing");
    }
  }
}

std::size_t Partition::bin_of(double x) const {
  return static_cast<std::size_t>(
      std::lower_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
}

double Partition::lower(std::size_t bin) const {
  return bin == 0 ? -kInf : edges_[bin - 1];
}

double Partition::upper(std::size_t bin) const {
  return bin == edges_.size() ? kInf : edges_[bin];
}

// ------------------------------------------------------------------ Measure

Measure Measure::normal(double mean, double sd) {
  require(std::isfinite(mean) && sd > 0.0 && std::isfinite(sd),
          "normal requires finite mean and sd > 0");
  return Measure(Normal{mean, sd});
}

Measure Measure::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential requires rate > 0");
  return Measure(Exponential{rate});
}

Measure Measure::cauchy(double location, double scale) {
  require(std::isfinite(location) && scale > 0.0 && std::isfinite(scale),
          "cauchy requires finite location and scale > 0");
  return Measure(Cauchy{location, scale});
}

Measure Measure::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0 && std::isfinite(shape) && std::isfinite(rate),
          "gamma requires shape > 0 and rate > 0");
  return Measure(Gamma{shape, rate});
}

Measure Measure::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
          "uniform requires finite lo < hi");
  return Measure(Uniform{lo, hi});
}

Measure Measure::empirical(std::vector<double> sample) {
  require(!sample.empty(), "empirical measure needs a nonempty sample");
  for (double v : sample) {
    require(std::isfinite(v), "empirical sample values must be finite");
  }
  std::sort(sample.begin(), sample.end());
  return Measure(
      Empirical{std::make_shared<const std::vector<double>>(std::move(sample))});
}

Measure Measure::mixture(double weight, Measure first, Measure second) {
  require(weight >= 0.0 && weight <= 1.0, "mixture weight must lie in [0, 1]");
  return Measure(Mixture{weight, std::make_shared<const Measure>(std::move(first)),
                         std::make_shared<const Measure>(std::move(second))});
}

Measure::Kind Measure::kind() const { return static_cast<Kind>(v_.index()); }

double Measure::cdf(double x) const {
  if (std::isnan(x)) throw InvalidParameter("cdf argument is NaN");
  if (x == -kInf) return 0.0;
  if (x == kInf) return 1.0;
  return std::visit(
      Overloaded{
          [&](const Normal& m) { return normal_cdf((x - m.mean) / m.sd); },
          [&](const Exponential& m) {
            return x <= 0.0 ? 0.0 : -std::expm1(-m.rate * x);
          },
          [&](const Cauchy& m) {
            return 0.5 + std::atan((x - m.location) / m.scale) / M_PI;
          },
          [&](const Gamma& m) {
            return x <= 0.0 ? 0.0 : gamma_p(m.shape, m.rate * x);
          },
          [&](const Uniform& m) {
            return std::clamp((x - m.lo) / (m.hi - m.lo), 0.0, 1.0);
          },
          [&](const Empirical& m) {
            const auto& s = *m.sorted;
            const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
            return static_cast<double>(count) / static_cast<double>(s.size());
          },
          [&](const Mixture& m) {
            return m.weight * m.first->cdf(x) + (1.0 - m.weight) * m.second->cdf(x);
          }},
      v_);
}

double Measure::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile requires u in [0, 1]");
  return std::visit(
      Overloaded{
          [&](const Normal& m) { return m.mean + m.sd * normal_quantile(u); },
          [&](const Exponential& m) { return -std::log1p(-u) / m.rate; },
          [&](const Cauchy& m) {
            if (u == 0.0) return -kInf;
            if (u == 1.0) return kInf;
            return m.location + m.scale * std::tan(M_PI * (u - 0.5));
          },
          [&](const Gamma& m) {
            if (u == 0.0) return 0.0;
            if (u == 1.0) return kInf;
            const double log_p = std::log(u);
            const double log_q = std::log1p(-u);
            return std::exp(log_gamma_inverse(m.shape, log_p, log_q, NAN)) / m.rate;
          },
          [&](const Uniform& m) { return m.lo + u * (m.hi - m.lo); },
          [&](const Empirical& m) {
            const auto& s = *m.sorted;
            const double pos = std::ceil(u * static_cast<double>(s.size()));
            const auto i = static_cast<std::size_t>(std::max(pos, 1.0)) - 1;
            return s[std::min(i, s.size() - 1)];
          },
          [&](const Mixture& m) {
            // Bracket with the component quantiles, then bisect on the cdf.
            double lo = std::min(m.first->quantile(u), m.second->quantile(u));
            double hi = std::max(m.first->quantile(u), m.second->quantile(u));
            if (lo == hi) return lo;
            for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo));
                 ++i) {
              const double mid = 0.5 * (lo + hi);
              if (cdf(mid) >= u) {
                hi = mid;
              } else {
                lo = mid;
              }
            }
            return hi;
          }},
      v_);
}

double Measure::log_density(double x) const {
  return std::visit(
      Overloaded{
          [&](const Normal& m) {
            const double z = (x - m.mean) / m.sd;
            return -0.5 * z * z - std::log(m.sd) - 0.5 * std::log(2.0 * M_PI);
          },
          [&](const Exponential& m) {
            return x < 0.0 ? -kInf : std::log(m.rate) - m.rate * x;
          },
          [&](const Cauchy& m) {
            const double z = (x - m.location) / m.scale;
            return -std::log(M_PI * m.scale * (1.0 + z * z));
          },
          [&](const Gamma& m) {
            if (x < 0.0) return -kInf;
            return m.shape * std::log(m.rate) + (m.shape - 1.0) * std::log(x) -
                   m.rate * x - log_gamma_fn(m.shape);
          },
          [&](const Uniform& m) {
            return (x < m.lo || x > m.hi) ? -kInf : -std::log(m.hi - m.lo);
          },
          [&](const Empirical&) -> double {
            throw DomainError("empirical measure has no density");
          },
          [&](const Mixture& m) {
            const double a = m.weight > 0.0 ? std::log(m.weight) + m.first->log_density(x)
                                            : -kInf;
            const double b = m.weight < 1.0
                                 ? std::log1p(-m.weight) + m.second->log_density(x)
                                 : -kInf;
            const double hi = std::max(a, b);
            if (hi == -kInf) return -kInf;
            return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
          }},
      v_);
}

double Measure::density(double x) const { return std::exp(log_density(x)); }

double Measure::mean() const {
  return std::visit(
      Overloaded{[](const Normal& m) { return m.mean; },
                 [](const Exponential& m) { return 1.0 / m.rate; },
                 [](const Cauchy&) -> double {
                   throw DomainError("cauchy distribution has no mean");
                 },
                 [](const Gamma& m) { return m.shape / m.rate; },
                 [](const Uniform& m) { return 0.5 * (m.lo + m.hi); },
                 [](const Empirical& m) {
                   const auto& s = *m.sorted;
                   return std::accumulate(s.begin(), s.end(), 0.0) /
                          static_cast<double>(s.size());
                 },
                 [](const Mixture& m) {
                   return m.weight * m.first->mean() +
                          (1.0 - m.weight) * m.second->mean();
                 }},
      v_);
}

double Measure::draw(RngStream& rng) const {
  return std::visit(
      Overloaded{
          [&](const Normal& m) { return m.mean + m.sd * rng.normal(); },
          [&](const Exponential& m) { return rng.exponential() / m.rate; },
          [&](const Cauchy& m) {
            return m.location + m.scale * std::tan(M_PI * (rng.uniform_open() - 0.5));
          },
          [&](const Gamma& m) { return rng.gamma(m.shape) / m.rate; },
          [&](const Uniform& m) { return m.lo + rng.uniform() * (m.hi - m.lo); },
          [&](const Empirical& m) { return (*m.sorted)[rng.index(m.sorted->size())]; },
          [&](const Mixture& m) {
            return rng.uniform() < m.weight ? m.first->draw(rng) : m.second->draw(rng);
          }},
      v_);
}

std::vector<double> Measure::sample(std::size_t count, RngStream& rng) const {
  std::vector<double> out(count);
  for (double& v : out) v = draw(rng);
  return out;
}

std::string Measure::spec() const {
  return std::visit(
      Overloaded{
          [](const Normal& m) {
            return "normal:" + format_number(m.mean) + "," + format_number(m.sd);
          },
          [](const Exponential& m) { return "exp:" + format_number(m.rate); },
          [](const Cauchy& m) {
            return "cauchy:" + format_number(m.location) + "," + format_number(m.scale);
          },
          [](const Gamma& m) {
            return "gamma:" + format_number(m.shape) + "," + format_number(m.rate);
          },
          [](const Uniform& m) {
            return "uniform:" + format_number(m.lo) + "," + format_number(m.hi);
          },
          [](const Empirical& m) {
            return "empirical[" + std::to_string(m.sorted->size()) + "]";
          },
          [](const Mixture& m) {
            return "mix(" + format_number(m.weight) + "," + m.first->spec() + "," +
                   m.second->spec() + ")";
          }},
      v_);
}

std::vector<double> Measure::parameters() const {
  return std::visit(
      Overloaded{[](const Normal& m) { return std::vector<double>{m.mean, m.sd}; },
                 [](const Exponential& m) { return std::vector<double>{m.rate}; },
                 [](const Cauchy& m) {
                   return std::vector<double>{m.location, m.scale};
                 },
                 [](const Gamma& m) { return std::vector<double>{m.shape, m.rate}; },
                 [](const Uniform& m) { return std::vector<double>{m.lo, m.hi}; },
                 [](const Empirical&) { return std::vector<double>{}; },
                 [](const Mixture&) { return std::vector<double>{}; }},
      v_);
}

std::span<const double> Measure::support() const {
  if (const auto* e = std::get_if<Empirical>(&v_)) return *e->sorted;
  return {};
}

// --------------------------------------------------------- BivariateMeasure

double bivariate_normal_cdf(double h, double k, double rho) {
  if (h == -kInf || k == -kInf) return 0.0;
  if (h == kInf) return normal_cdf(k);
  if (k == kInf) return normal_cdf(h);
  if (rho == 0.0) return normal_cdf(h) * normal_cdf(k);
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  // Phi2(h, k; rho) = int_{-inf}^{h} phi(t) Phi((k - rho t) / s) dt; the
  // integrand is below 1e-300 left of -38.5.
  constexpr double kFloor = -38.5;
  if (h <= kFloor) return 0.0;
  auto integrand = [&](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI) *
           normal_cdf((k - rho * t) / s);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double value =
      gauss_kronrod<double, 61>::integrate(integrand, kFloor, h, 20, 1e-15);
  return std::clamp(value, 0.0, 1.0);
}

BivariateMeasure BivariateMeasure::normal(Point2 mean, double s11, double s12,
                                          double s22) {
  require(std::isfinite(mean.x) && std::isfinite(mean.y),
          "bivariate normal mean must be finite");
  require(s11 > 0.0 && s22 > 0.0 && s11 * s22 - s12 * s12 > 0.0,
          "bivariate normal covariance must be positive definite");
  const double l11 = std::sqrt(s11);
  const double l21 = s12 / l11;
  const double l22 = std::sqrt(s22 - l21 * l21);
  return BivariateMeasure(Normal{mean, s11, s12, s22, l11, l21, l22});
}

BivariateMeasure BivariateMeasure::empirical(std::vector<Point2> sample) {
  require(!sample.empty(), "empirical measure needs a nonempty sample");
  for (const Point2& p : sample) {
    require(std::isfinite(p.x) && std::isfinite(p.y),
            "empirical sample values must be finite");
  }
  return BivariateMeasure(
      Empirical{std::make_shared<const std::vector<Point2>>(std::move(sample))});
}

BivariateMeasure BivariateMeasure::mixture(double weight, BivariateMeasure first,
                                           BivariateMeasure second) {
  require(weight >= 0.0 && weight <= 1.0, "mixture weight must lie in [0, 1]");
  return BivariateMeasure(
      Mixture{weight, std::make_shared<const BivariateMeasure>(std::move(first)),
              std::make_shared<const BivariateMeasure>(std::move(second))});
}

BivariateMeasure::Kind BivariateMeasure::kind() const {
  return static_cast<Kind>(v_.index());
}

double BivariateMeasure::cdf(double x, double y) const {
  if (std::isnan(x) || std::isnan(y)) throw InvalidParameter("cdf argument is NaN");
  return std::visit(
      Overloaded{
          [&](const Normal& m) {
            const double sx = std::sqrt(m.s11);
            const double sy = std::sqrt(m.s22);
            return bivariate_normal_cdf((x - m.mean.x) / sx, (y - m.mean.y) / sy,
                                        m.s12 / (sx * sy));
          },
          [&](const Empirical& m) {
            std::size_t count = 0;
            for (const Point2& p : *m.sample) count += (p.x <= x && p.y <= y);
            return static_cast<double>(count) / static_cast<double>(m.sample->size());
          },
          [&](const Mixture& m) {
            return m.weight * m.first->cdf(x, y) +
                   (1.0 - m.weight) * m.second->cdf(x, y);
          }},
      v_);
}

Point2 BivariateMeasure::draw(RngStream& rng) const {
  return std::visit(
      Overloaded{[&](const Normal& m) {
                   const double z1 = rng.normal();
                   const double z2 = rng.normal();
                   return Point2{m.mean.x + m.l11 * z1,
                                 m.mean.y + m.l21 * z1 + m.l22 * z2};
                 },
                 [&](const Empirical& m) {
                   return (*m.sample)[rng.index(m.sample->size())];
                 },
                 [&](const Mixture& m) {
                   return rng.uniform() < m.weight ? m.first->draw(rng)
                                                   : m.second->draw(rng);
                 }},
      v_);
}

std::vector<Point2> BivariateMeasure::sample(std::size_t count, RngStream& rng) const {
  std::vector<Point2> out(count);
  for (Point2& p : out) p = draw(rng);
  return out;
}

Measure BivariateMeasure::marginal_x() const {
  return std::visit(
      Overloaded{[](const Normal& m) {
                   return Measure::normal(m.mean.x, std::sqrt(m.s11));
                 },
                 [](const Empirical& m) {
                   std::vector<double> xs;
                   xs.reserve(m.sample->size());
                   for (const Point2& p : *m.sample) xs.push_back(p.x);
                   return Measure::empirical(std::move(xs));
                 },
                 [](const Mixture& m) {
                   return Measure::mixture(m.weight, m.first->marginal_x(),
                                           m.second->marginal_x());
                 }},
      v_);
}

Measure BivariateMeasure::marginal_y() const {
  return std::visit(
      Overloaded{[](const Normal& m) {
                   return Measure::normal(m.mean.y, std::sqrt(m.s22));
                 },
                 [](const Empirical& m) {
                   std::vector<double> ys;
                   ys.reserve(m.sample->size());
                   for (const Point2& p : *m.sample) ys.push_back(p.y);
                   return Measure::empirical(std::move(ys));
                 },
                 [](const Mixture& m) {
                   return Measure::mixture(m.weight, m.first->marginal_y(),
                                           m.second->marginal_y());
                 }},
      v_);
}

std::string BivariateMeasure::spec() const {
  return std::visit(
      Overloaded{[](const Normal& m) {
                   return "bvnormal:" + format_number(m.mean.x) + "," +
                          format_number(m.mean.y) + "," + format_number(m.s11) + "," +
                          format_number(m.s12) + "," + format_number(m.s22);
                 },
                 [](const Empirical& m) {
                   return "empirical[" + std::to_string(m.sample->size()) + "]";
                 },
                 [](const Mixture& m) {
                   return "mix(" + format_number(m.weight) + "," + m.first->spec() +
                          "," + m.second->spec() + ")";
                 }},
      v_);
}

// ------------------------------------------------------- bin probabilities

std::vector<double> bin_probabilities(const Measure& measure,
                                      const Partition& partition) {
  std::vector<double> out(partition.bins());
  double previous = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double current =
        i + 1 == out.size() ? 1.0 : measure.cdf(partition.upper(i));
    out[i] = current - previous;
    previous = current;
  }
  return out;
}

Table bin_probabilities(const BivariateMeasure& measure, const Grid& grid) {
  const std::size_t r = grid.x.bins();
  const std::size_t s = grid.y.bins();
  // Corner cdf values on the (r+1) x (s+1) lattice including infinities.
  Table corner(r + 1, s + 1);
  for (std::size_t j = 0; j <= r; ++j) {
    const double x = j == 0 ? -kInf : grid.x.upper(j - 1);
    for (std::size_t k = 0; k <= s; ++k) {
      const double y = k == 0 ? -kInf : grid.y.upper(k - 1);
      corner(j, k) = (j == 0 || k == 0) ? 0.0
                     : (j == r && k == s) ? 1.0
                                          : measure.cdf(x, y);
    }
  }
  Table out(r, s);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t k = 0; k < s; ++k) {
      out(j, k) = std::max(0.0, corner(j + 1, k + 1) - corner(j, k + 1) -
                                    corner(j + 1, k) + corner(j, k));
    }
  }
  return out;
}

// ------------------------------------------------------------------ parsing

Measure parse_measure(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidParameter("measure specification '" + std::string(text) +
                           "' lacks ':'");
  }
  const std::string_view name = text.substr(0, colon);
  const std::vector<double> p = parse_numbers(text.substr(colon + 1));
  auto expect = [&](std::size_t n) {
    if (p.size() != n) {
      throw InvalidParameter("measure '" + std::string(name) + "' takes " +
                             std::to_string(n) + " parameter(s)");
    }
  };
  if (name == "normal") {
    expect(2);
    return Measure::normal(p[0], p[1]);
  }
  if (name == "exp" || name == "exponential") {
    expect(1);
    return Measure::exponential(p[0]);
  }
  if (name == "cauchy") {
    expect(2);
    return Measure::cauchy(p[0], p[1]);
  }
  if (name == "gamma") {
    expect(2);
    return Measure::gamma(p[0], p[1]);
  }
  if (name == "uniform") {
    expect(2);
    return Measure::uniform(p[0], p[1]);
  }
  throw InvalidParameter("unknown measure '" + std::string(name) + "'");
}

BivariateMeasure parse_bivariate_measure(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos || text.substr(0, colon) != "bvnormal") {
    throw InvalidParameter("bivariate measure specification must be "
                           "bvnormal:MU1,MU2,S11,S12,S22");
  }
  const std::vector<double> p = parse_numbers(text.substr(colon + 1));
  if (p.size() != 5) throw InvalidParameter("bvnormal takes 5 parameters");
  return BivariateMeasure::normal({p[0], p[1]}, p[2], p[3], p[4]);
}

}  // namespace bnpgof
