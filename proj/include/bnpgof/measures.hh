// Apache License, Version 2.0, refer to LICENSE.txt

// Probability measures on the line and the plane, and the partitions they
// are evaluated on. Measures are immutable after construction and cheap to
// copy (composite parts are shared), so they can be passed by value and
// shared across threads.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bnpgof/rng.hh"

namespace bnpgof {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Dense row-major matrix of doubles.
struct Table {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Table() = default;
  Table(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
};

// k bins from k-1 strictly increasing finite cut points:
// (-inf, e1], (e1, e2], ..., (e_{k-1}, +inf).
class Partition {
 public:
  explicit Partition(std::vector<double> edges);

  std::size_t bins() const { return edges_.size() + 1; }
  std::span<const double> edges() const { return edges_; }

  // Left-open, right-closed: x == e_i falls in bin i - 1 (zero-based i).
  std::size_t bin_of(double x) const;
  double lower(std::size_t bin) const;
  double upper(std::size_t bin) const;

 private:
  std::vector<double> edges_;
};

// r x s grid of rectangles A_j x B_k.
struct Grid {
  Partition x;
  Partition y;
};

class Measure {
 public:
  enum class Kind {
    kNormal,
    kExponential,
    kCauchy,
    kGamma,
    kUniform,
    kEmpirical,
    kMixture
  };

  static Measure normal(double mean, double sd);
  static Measure exponential(double rate);
  static Measure cauchy(double location, double scale);
  // Shape/rate parameterization: density b^a x^(a-1) e^(-bx) / Gamma(a).
  static Measure gamma(double shape, double rate);
  static Measure uniform(double lo, double hi);
  static Measure empirical(std::vector<double> sample);
  // weight * first + (1 - weight) * second.
  static Measure mixture(double weight, Measure first, Measure second);

  Kind kind() const;

  double cdf(double x) const;
  double quantile(double u) const;
  double density(double x) const;
  double log_density(double x) const;
  double mean() const;

  double draw(RngStream& rng) const;
  std::vector<double> sample(std::size_t count, RngStream& rng) const;

  // Round-trippable text form, e.g. "normal:0,1" or "mix(0.4,normal:0,1,empirical[150])".
  std::string spec() const;

  // Parameters in declaration order (empty for empirical and mixture).
  std::vector<double> parameters() const;

  // Sorted sample of an empirical measure; empty span otherwise.
  std::span<const double> support() const;

 private:
  struct Normal {
    double mean, sd;
  };
  struct Exponential {
    double rate;
  };
  struct Cauchy {
    double location, scale;
  };
  struct Gamma {
    double shape, rate;
  };
  struct Uniform {
    double lo, hi;
  };
  struct Empirical {
    std::shared_ptr<const std::vector<double>> sorted;
  };
  struct Mixture {
    double weight;
    std::shared_ptr<const Measure> first;
    std::shared_ptr<const Measure> second;
  };
  using Variant = std::variant<Normal, Exponential, Cauchy, Gamma, Uniform,
                               Empirical, Mixture>;

  explicit Measure(Variant v) : v_(std::move(v)) {}

  Variant v_;
};

class BivariateMeasure {
 public:
  enum class Kind { kNormal, kEmpirical, kMixture };

  // Covariance [[s11, s12], [s12, s22]] must be positive definite.
  static BivariateMeasure normal(Point2 mean, double s11, double s12,
                                 double s22);
  static BivariateMeasure empirical(std::vector<Point2> sample);
  static BivariateMeasure mixture(double weight, BivariateMeasure first,
                                  BivariateMeasure second);

  Kind kind() const;

  // P(X <= x, Y <= y); either coordinate may be infinite.
  double cdf(double x, double y) const;

  Point2 draw(RngStream& rng) const;
  std::vector<Point2> sample(std::size_t count, RngStream& rng) const;

  Measure marginal_x() const;
  Measure marginal_y() const;

  std::string spec() const;

 private:
  struct Normal {
    Point2 mean;
    double s11, s12, s22;
    double l11, l21, l22;  // Cholesky factor
  };
  struct Empirical {
    std::shared_ptr<const std::vector<Point2>> sample;
  };
  struct Mixture {
    double weight;
    std::shared_ptr<const BivariateMeasure> first;
    std::shared_ptr<const BivariateMeasure> second;
  };
  using Variant = std::variant<Normal, Empirical, Mixture>;

  explicit BivariateMeasure(Variant v) : v_(std::move(v)) {}

  Variant v_;
};

// Standard bivariate normal cdf with correlation rho.
double bivariate_normal_cdf(double h, double k, double rho);

// Entry i is cdf(upper_i) - cdf(lower_i), using the exact limits 0 and 1
// for the unbounded end bins.
std::vector<double> bin_probabilities(const Measure& measure,
                                      const Partition& partition);
Table bin_probabilities(const BivariateMeasure& measure, const Grid& grid);

// Grammar: normal:MU,SD  exp:RATE  cauchy:LOC,SCALE  gamma:SHAPE,RATE
//          uniform:LO,HI
Measure parse_measure(std::string_view text);
// Grammar: bvnormal:MU1,MU2,S11,S12,S22
BivariateMeasure parse_bivariate_measure(std::string_view text);

}  // namespace bnpgof
