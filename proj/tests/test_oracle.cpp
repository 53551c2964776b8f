#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dphmm/error.hpp"
#include "dphmm/oracle.hpp"

using namespace dphmm;

namespace {

// Poisson-Gamma evidence of one segment, written out independently.
double segment_evidence(const std::vector<double>& y, std::size_t b, std::size_t e, double a, double r) {
  double u = 0.0;
  double prod_fact = 1.0;
  for (std::size_t t = b; t < e; ++t) {
    u += y[t];
    prod_fact *= std::tgamma(y[t] + 1.0);
  }
  const double n = double(e - b);
  return std::pow(r, a) / std::tgamma(a) * std::tgamma(a + u) / std::pow(r + n, a + u) / prod_fact;
}

}  // namespace

TEST_CASE("two points under a flat likelihood") {
  const auto p = enumerate_posterior(2, flat_marginal(), 3.0, 2.0);
  REQUIRE(p.probabilities.size() == 2);
  CHECK(p.k_pmf[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(p.k_pmf[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(p.state_prob[1][1] == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("flat likelihood recovers the prior over k") {
  // Direct sum of sequential transition products for n = 7.
  const std::size_t n = 7;
  const double a = 0.8;
  const double b = 1.7;
  std::vector<double> k_pmf(n, 0.0);
  for (std::size_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    double p = 1.0;
    std::size_t run = 0;
    std::size_t k = 0;
    for (std::size_t t = 1; t < n; ++t) {
      if (mask & (1u << (t - 1))) {
        p *= b / (run + a + b);
        run = 0;
        ++k;
      } else {
        p *= (run + a) / (run + a + b);
        ++run;
      }
    }
    k_pmf[k] += p;
  }
  const auto ex = enumerate_posterior(n, flat_marginal(), a, b);
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(ex.k_pmf[k] - k_pmf[k]) < 1e-12);
}

TEST_CASE("normalization") {
  for (std::size_t n = 1; n <= 10; ++n) {
    const auto ex = enumerate_posterior(n, flat_marginal(), 1.0, 1.0);
    double total = 0.0;
    for (double p : ex.probabilities) total += p;
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (const auto& row : ex.state_prob) {
      double r = 0.0;
      for (double p : row) r += p;
      CHECK(std::abs(r - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("Poisson toy against hand enumeration") {
  const std::vector<double> y{0, 1, 0, 5, 6, 4};
  const double a = 2.0;
  const double r = 1.0;
  const double alpha = 1.0;
  const double beta = 1.0;
  const auto ex = enumerate_posterior(y.size(), poisson_gamma_marginal(y, {a, r}), alpha, beta);

  // 32 change-point subsets, weights built from the sequential prior and the segment evidence.
  std::vector<double> w;
  std::vector<std::vector<std::size_t>> cps;
  for (std::size_t mask = 0; mask < 32; ++mask) {
    std::vector<std::size_t> cut{0};
    for (std::size_t j = 0; j < 5; ++j)
      if (mask & (1u << j)) cut.push_back(j + 1);
    cut.push_back(6);
    double weight = 1.0;
    std::size_t run = 0;
    for (std::size_t t = 1; t < 6; ++t) {
      const bool change = mask & (1u << (t - 1));
      weight *= change ? beta / (run + alpha + beta) : (run + alpha) / (run + alpha + beta);
      run = change ? 0 : run + 1;
    }
    for (std::size_t i = 0; i + 1 < cut.size(); ++i) weight *= segment_evidence(y, cut[i], cut[i + 1], a, r);
    w.push_back(weight);
    cps.emplace_back(cut.begin() + 1, cut.end() - 1);
  }
  double z = 0.0;
  for (double v : w) z += v;
  double p_k1 = 0.0;
  std::vector<double> cp1(6, 0.0);
  for (std::size_t m = 0; m < 32; ++m) {
    CHECK(std::abs(ex.probabilities[m] - w[m] / z) < 1e-12);
    if (cps[m].size() == 1) {
      p_k1 += w[m] / z;
      cp1[cps[m][0] - 1] += w[m] / z;
    }
  }
  CHECK(std::abs(ex.k_pmf[1] - p_k1) < 1e-12);
  for (std::size_t t = 0; t < 6; ++t) CHECK(std::abs(ex.cp_pmf[1][0][t] - cp1[t] / p_k1) < 1e-12);
  // The single break sits after the third observation.
  CHECK(ex.cp_pmf[1][0][2] > 0.5);
}

TEST_CASE("normal marginal matches a two-point closed form") {
  // Two points in one regime: (y1, y2) ~ N(mu 1, sigma2 I + upsilon2 11').
  const std::vector<double> y{0.4, 1.9};
  const double mu = 1.0;
  const double u2 = 2.0;
  const double s2 = 0.5;
  const double v = s2 + u2;
  const double c = u2;
  const double det = v * v - c * c;
  const double r1 = y[0] - mu;
  const double r2 = y[1] - mu;
  const double quad = (v * r1 * r1 - 2 * c * r1 * r2 + v * r2 * r2) / det;
  const double expected = -std::log(2 * M_PI) - 0.5 * std::log(det) - 0.5 * quad;
  CHECK(normal_fixed_marginal(y, mu, u2, s2)(0, 2) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("total variation") {
  const std::vector<double> a{0.5, 0.5};
  const std::vector<double> b{1.0, 0.0};
  const std::vector<double> c{0.0, 1.0};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(b, c) == 1.0);
  CHECK(tv_distance(a, b) == 0.5);
  CHECK_THROWS_AS(tv_distance(a, std::vector<double>{1.0}), ContractViolation);
}

TEST_CASE("enumeration bound") {
  CHECK_NOTHROW(enumerate_posterior(kOracleMaxLength, flat_marginal(), 1.0, 1.0));
  CHECK_THROWS_AS(enumerate_posterior(kOracleMaxLength + 1, flat_marginal(), 1.0, 1.0),
                  ContractViolation);
}
