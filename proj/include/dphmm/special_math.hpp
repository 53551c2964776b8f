#ifndef DPHMM_SPECIAL_MATH_HPP
#define DPHMM_SPECIAL_MATH_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace dphmm {

double ln_gamma(double x);
double digamma(double x);
double trigamma(double x);

// Standard normal distribution function, saturating at 0/1 in the tails.
double std_normal_cdf(double x);

/// Counter-based Philox4x32-10 generator.
///
/// The 64-bit seed is the key, the stream id occupies the upper half of the
/// 128-bit counter and the lower half counts blocks. Two streams with the
/// same seed and different ids therefore never share a counter value, which
/// is what makes per-replication streams independent of scheduling order.
/// Satisfies UniformRandomBitGenerator with 64-bit output.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int next_ = 4;
};

/// Distribution descriptors accepted by draw().
///
/// Parameterization conventions:
///  - Gamma(shape, rate): density proportional to x^(shape-1) exp(-rate x).
///  - InverseGamma(shape, scale): 1/X with X ~ Gamma(shape, rate = scale),
///    mean scale/(shape-1).
///  - ScaledInvChiSq(nu, s2): identical to InverseGamma(nu/2, nu*s2/2).
struct DistSpec {
  enum class Kind { kNormal, kGamma, kInverseGamma, kScaledInvChiSq, kUniform };

  Kind kind;
  double p1;
  double p2;

  static DistSpec normal(double mean, double variance) { return {Kind::kNormal, mean, variance}; }
  static DistSpec gamma(double shape, double rate) { return {Kind::kGamma, shape, rate}; }
  static DistSpec inverse_gamma(double shape, double scale) {
    return {Kind::kInverseGamma, shape, scale};
  }
  static DistSpec scaled_inv_chi_sq(double nu, double s2) {
    return {Kind::kScaledInvChiSq, nu, s2};
  }
  static DistSpec uniform(double lo, double hi) { return {Kind::kUniform, lo, hi}; }
};

double draw(const DistSpec& dist, RngStream& rng);

// Convenience wrappers; same parameterizations as DistSpec.
double draw_normal(double mean, double variance, RngStream& rng);
double draw_gamma(double shape, double rate, RngStream& rng);
double draw_inverse_gamma(double shape, double scale, RngStream& rng);
double draw_scaled_inv_chi_sq(double nu, double s2, RngStream& rng);

}  // namespace dphmm

#endif  // DPHMM_SPECIAL_MATH_HPP
