#include "dphmm/special_math.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "dphmm/error.hpp"

namespace dphmm {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

}  // namespace

double ln_gamma(double x) {
  require_positive(x, "ln_gamma");
  return boost::math::lgamma(x);
}

double digamma(double x) {
  require_positive(x, "digamma");
  return boost::math::digamma(x);
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  return boost::math::trigamma(x);
}

double std_normal_cdf(double x) {
  if (std::isnan(x)) throw DomainError("std_normal_cdf: NaN argument");
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                            static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = philox4x32_10(ctr, key);
  ++block_;
  next_ = 0;
}

RngStream::result_type RngStream::operator()() {
  if (next_ > 2) refill();
  const std::uint64_t lo = buffer_[next_];
  const std::uint64_t hi = buffer_[next_ + 1];
  next_ += 2;
  return (hi << 32) | lo;
}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double draw_normal(double mean, double variance, RngStream& rng) {
  if (!(variance >= 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
    throw DomainError("normal: variance must be nonnegative and finite");
  }
  if (variance == 0.0) return mean;
  boost::random::normal_distribution<double> dist(mean, std::sqrt(variance));
  return dist(rng);
}

double draw_gamma(double shape, double rate, RngStream& rng) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  // Boost handles shape < 1 internally.
  boost::random::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

double draw_inverse_gamma(double shape, double scale, RngStream& rng) {
  require_positive(shape, "inverse-gamma shape");
  require_positive(scale, "inverse-gamma scale");
  return 1.0 / draw_gamma(shape, scale, rng);
}

double draw_scaled_inv_chi_sq(double nu, double s2, RngStream& rng) {
  require_positive(nu, "scaled inv-chi2 degrees of freedom");
  require_positive(s2, "scaled inv-chi2 scale");
  return draw_inverse_gamma(0.5 * nu, 0.5 * nu * s2, rng);
}

double draw(const DistSpec& dist, RngStream& rng) {
  switch (dist.kind) {
    case DistSpec::Kind::kNormal:
      return draw_normal(dist.p1, dist.p2, rng);
    case DistSpec::Kind::kGamma:
      return draw_gamma(dist.p1, dist.p2, rng);
    case DistSpec::Kind::kInverseGamma:
      return draw_inverse_gamma(dist.p1, dist.p2, rng);
    case DistSpec::Kind::kScaledInvChiSq:
      return draw_scaled_inv_chi_sq(dist.p1, dist.p2, rng);
    case DistSpec::Kind::kUniform:
      if (!(dist.p1 < dist.p2) || !std::isfinite(dist.p1) || !std::isfinite(dist.p2)) {
        throw DomainError("uniform: require finite lo < hi");
      }
      return dist.p1 + (dist.p2 - dist.p1) * rng.uniform();
  }
  throw DomainError("draw: unknown distribution kind");
}

}  // namespace dphmm
