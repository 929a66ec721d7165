// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/rng.hh"

#include <cmath>

#include "bnpgof/error.hh"

namespace bnpgof {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

std::uint64_t hash_path(std::uint64_t seed,
                        std::span<const std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC908ULL);
  for (std::uint64_t p : path) {
    h = splitmix64(h ^ splitmix64(p + 0x3C6EF372FE94F82BULL));
  }
  return h;
}

}  // namespace

Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path) {
  return hash_path(seed, std::span<const std::uint64_t>(path.begin(),
                                                         path.size()));
}

RngStream::RngStream(std::uint64_t seed,
                     std::initializer_list<std::uint64_t> path)
    : RngStream(seed,
                std::span<const std::uint64_t>(path.begin(), path.size())) {}

RngStream::RngStream(std::uint64_t seed, std::span<const std::uint64_t> path)
    : seed_(seed), path_(path.begin(), path.end()) {
  const std::uint64_t h = hash_path(seed, path);
  key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  stream_id_ = splitmix64(h ^ 0xA54FF53A5F1D36F1ULL);
}

RngStream RngStream::child(std::uint64_t tag) const {
  std::vector<std::uint64_t> path = path_;
  path.push_back(tag);
  return RngStream(seed_, std::span<const std::uint64_t>(path));
}

void RngStream::refill() {
  const Philox4x32Counter ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_id_),
      static_cast<std::uint32_t>(stream_id_ >> 32)};
  const Philox4x32Counter out = philox4x32(ctr, key_);
  ++block_;
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
}

RngStream::result_type RngStream::operator()() {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t RngStream::index(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double RngStream::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  has_spare_normal_ = true;
  return u * scale;
}

double RngStream::exponential() { return -std::log(uniform_open()); }

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidParameter("gamma shape must be positive");
  if (shape < 1.0) return std::exp(log_gamma(shape));
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::log_gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidParameter("gamma shape must be positive");
  if (shape >= 1.0) return std::log(gamma(shape));
  // X_a = X_{a+1} * U^{1/a}
  const double boosted = gamma(shape + 1.0);
  return std::log(boosted) + std::log(uniform_open()) / shape;
}

}  // namespace bnpgof
