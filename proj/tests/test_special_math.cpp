#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "dphmm/error.hpp"
#include "dphmm/special_math.hpp"

using namespace dphmm;

namespace {

// Kolmogorov-Smirnov statistic of `x` against `cdf`.
double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Asymptotic critical value at significance 0.001.
double ks_critical(std::size_t n) { return 1.9495 / std::sqrt(static_cast<double>(n)); }

std::vector<double> sample(const DistSpec& d, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = draw(d, rng);
  return x;
}

}  // namespace

TEST_CASE("ln_gamma reference values") {
  CHECK(ln_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ln_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-13));
  CHECK(ln_gamma(10.0) == doctest::Approx(std::log(362880.0)).epsilon(1e-13));
  CHECK(ln_gamma(1e-3) == doctest::Approx(6.907178885383853).epsilon(1e-12));
  CHECK(ln_gamma(1e6) == doctest::Approx(12815504.569147612).epsilon(1e-12));
  for (double x : {0.1, 0.5, 1.0, 2.0, 10.0, 100.0})
    CHECK(std::abs(ln_gamma(x + 1.0) - ln_gamma(x) - std::log(x)) < 1e-10);
}

TEST_CASE("digamma and trigamma") {
  const double euler = 0.57721566490153286;
  CHECK(digamma(1.0) == doctest::Approx(-euler).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-euler - 2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - euler).epsilon(1e-12));
  CHECK(trigamma(1.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-12));
  for (double x = 0.1; x <= 100.0; x *= 1.7) {
    const double h = 1e-5;
    const double fd = (ln_gamma(x + h) - ln_gamma(x - h)) / (2.0 * h);
    CHECK(std::abs(digamma(x) - fd) < 1e-5);
  }
}

TEST_CASE("special functions reject invalid arguments") {
  CHECK_THROWS_AS(ln_gamma(0.0), DomainError);
  CHECK_THROWS_AS(ln_gamma(-1.0), DomainError);
  CHECK_THROWS_AS(ln_gamma(NAN), DomainError);
  CHECK_THROWS_AS(digamma(0.0), DomainError);
  CHECK_THROWS_AS(trigamma(-2.0), DomainError);
}

TEST_CASE("standard normal cdf") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std::abs(std_normal_cdf(1.0) - 0.8413447461) < 1e-10);
  CHECK(std::abs(std_normal_cdf(-1.0) - 0.1586552539) < 1e-10);
  double prev = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.01) {
    const double p = std_normal_cdf(x);
    CHECK(p >= prev);
    CHECK(std::abs(p + std_normal_cdf(-x) - 1.0) < 1e-12);
    prev = p;
  }
}

TEST_CASE("Philox stream known answer and determinism") {
  RngStream zero(0, 0);
  CHECK(zero() == 0xe169c58d6627e8d5ULL);
  CHECK(zero() == 0x9b00dbd8bc57ac4cULL);

  RngStream a(42, 7);
  RngStream b(42, 7);
  RngStream c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);
  CHECK(a.seed() == 42);
  CHECK(a.stream_id() == 7);

  RngStream u(3, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("variates pass KS tests against their analytic cdfs") {
  const std::size_t n = 100000;
  const double crit = ks_critical(n);

  const boost::math::normal_distribution<> norm(1.0, 2.0);
  CHECK(ks_statistic(sample(DistSpec::normal(1.0, 4.0), n, 1),
                     [&](double x) { return cdf(norm, x); }) < crit);

  for (double shape : {0.3, 2.0, 7.5}) {
    const boost::math::gamma_distribution<> g(shape, 1.0 / 1.5);  // scale = 1 / rate
    CHECK(ks_statistic(sample(DistSpec::gamma(shape, 1.5), n, 2),
                       [&](double x) { return cdf(g, x); }) < crit);
  }

  const boost::math::inverse_gamma_distribution<> ig(3.0, 2.0);
  CHECK(ks_statistic(sample(DistSpec::inverse_gamma(3.0, 2.0), n, 3),
                     [&](double x) { return cdf(ig, x); }) < crit);

  // Scaled inverse chi-square(nu, s2) = InverseGamma(nu/2, nu s2/2).
  const boost::math::inverse_gamma_distribution<> sic(4.0 / 2.0, 4.0 * 2.0 / 2.0);
  CHECK(ks_statistic(sample(DistSpec::scaled_inv_chi_sq(4.0, 2.0), n, 4),
                     [&](double x) { return cdf(sic, x); }) < crit);

  CHECK(ks_statistic(sample(DistSpec::uniform(-1.0, 3.0), n, 6),
                     [](double x) { return std::clamp((x + 1.0) / 4.0, 0.0, 1.0); }) < crit);
}

TEST_CASE("sample means within five standard errors") {
  const std::size_t n = 1000000;
  auto check_mean = [n](const DistSpec& d, double mean, double var, std::uint64_t seed) {
    RngStream rng(seed, 0);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += draw(d, rng);
    CHECK(std::abs(s / n - mean) < 5.0 * std::sqrt(var / n));
  };
  check_mean(DistSpec::gamma(2.0, 1.0), 2.0, 2.0, 11);
  check_mean(DistSpec::inverse_gamma(3.0, 2.0), 1.0, 1.0, 12);          // var b^2/((a-1)^2(a-2))
  check_mean(DistSpec::scaled_inv_chi_sq(5.0, 2.0), 10.0 / 3.0, 200.0 / 9.0, 13);
}

TEST_CASE("invalid distribution parameters") {
  RngStream rng(1, 0);
  CHECK_THROWS_AS(draw_gamma(0.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(draw_gamma(1.0, -1.0, rng), DomainError);
  CHECK_THROWS_AS(draw_inverse_gamma(-1.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(draw_scaled_inv_chi_sq(0.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(draw_normal(0.0, -1.0, rng), DomainError);
  CHECK(draw_normal(2.5, 0.0, rng) == 2.5);
}
