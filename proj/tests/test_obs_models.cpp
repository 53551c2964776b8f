#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dphmm/error.hpp"
#include "dphmm/obs_models.hpp"

using namespace dphmm;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("normal log likelihood") {
  CHECK(normal_log_likelihood(0.0, 0.0, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
  CHECK(normal_log_likelihood(1.0, 0.0, 1.0) ==
        doctest::Approx(-0.9189385332046727 - 0.5).epsilon(1e-14));
  CHECK(normal_log_likelihood(3.0, 1.0, 3.0) ==
        doctest::Approx(-0.5 * std::log(6.0 * kPi) - 4.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(normal_log_likelihood(0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("normal regime conditional") {
  const auto p = normal_regime_conditional(2.0, 1, 0.0, 1.0, 1.0);
  CHECK(p.mean == doctest::Approx(1.0));
  CHECK(p.variance == doctest::Approx(0.5));
  // Precision-weighted average computed by hand: data precision 4/2, prior precision 1/3.
  const auto q = normal_regime_conditional(1.5, 4, -1.0, 3.0, 2.0);
  const double prec = 2.0 + 1.0 / 3.0;
  CHECK(q.mean == doctest::Approx((1.5 * 2.0 - 1.0 / 3.0) / prec).epsilon(1e-14));
  CHECK(q.variance == doctest::Approx(1.0 / prec).epsilon(1e-14));
  CHECK_THROWS_AS(normal_regime_conditional(0.0, 0, 0.0, 1.0, 1.0), ContractViolation);
}

TEST_CASE("poisson log likelihood and conditional") {
  CHECK(poisson_log_likelihood(0.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(poisson_log_likelihood(1.0, 2.0) == doctest::Approx(std::log(2.0) - 2.0).epsilon(1e-14));
  CHECK(poisson_log_likelihood(2.0, 3.0) ==
        doctest::Approx(2.0 * std::log(3.0) - 3.0 - std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(poisson_log_likelihood(1.0, 0.0), DomainError);

  auto g = poisson_regime_conditional({2.0, 1.0}, 10.0, 5);
  CHECK(g.shape == 12.0);
  CHECK(g.rate == 6.0);
  g = poisson_regime_conditional({3.0, 1.0}, 0.0, 4);
  CHECK(g.shape == 3.0);
  CHECK(g.rate == 5.0);
}

TEST_CASE("ar2 log likelihood") {
  Ar2Regime r;
  r.beta = {0.0, 0.0, 0.0};
  r.sigma2 = 1.0;
  CHECK(ar2_log_likelihood(0.0, 5.0, -3.0, r) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
  r.beta = {1.0, 0.5, 0.25};
  r.sigma2 = 4.0;
  // 1 + 0.5*2 + 0.25*4 = 3, residual 2.
  CHECK(ar2_log_likelihood(5.0, 2.0, 4.0, r) ==
        doctest::Approx(-0.5 * std::log(8.0 * kPi) - 0.5).epsilon(1e-14));
}

TEST_CASE("ar2 sigma2 conditional") {
  auto p = ar2_sigma2_conditional(4, 8.0);
  CHECK(p.nu == 4.0);
  CHECK(p.s2 == 2.0);
  p = ar2_sigma2_conditional(2, 2.0);
  CHECK(p.nu == 2.0);
  CHECK(p.s2 == 1.0);
  p = ar2_sigma2_conditional(3, 0.0);
  CHECK(p.s2 == kAr2ScaleFloor);
  CHECK_THROWS_AS(ar2_sigma2_conditional(0, 1.0), ContractViolation);
}

TEST_CASE("ar2 beta conditional") {
  // Exact AR(2) data: y_t = 0.5 + 0.6 y_{t-1} - 0.2 y_{t-2}.
  std::vector<double> y{1.0, 2.0};
  for (int t = 2; t < 40; ++t) y.push_back(0.5 + 0.6 * y[t - 1] - 0.2 * y[t - 2] + 0.1 * std::sin(t));
  const auto stats = ar2_segment_stats(y, {0, y.size()});
  CHECK(stats.rows == y.size() - 2);
  Ar2Shared vague;
  vague.v2 = {1e12, 1e12, 1e12};
  const auto post = ar2_beta_conditional(stats, 1.0, vague);

  // OLS by hand through the normal equations, solved with Cramer's rule.
  const auto& A = stats.xtx;
  auto det3 = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det3(A);
  for (int j = 0; j < 3; ++j) {
    auto Aj = A;
    for (int i = 0; i < 3; ++i) Aj[i][j] = stats.xty[i];
    CHECK(post.mean[j] == doctest::Approx(det3(Aj) / d).epsilon(1e-6));
  }

  Ar2SegmentStats empty;
  Ar2Shared centred;
  centred.v2 = {2.0, 3.0, 4.0};
  const auto prior_only = ar2_beta_conditional(empty, 1.0, centred);
  for (int j = 0; j < 3; ++j) {
    CHECK(prior_only.mean[j] == doctest::Approx(0.0));
    CHECK(prior_only.cov[j][j] == doctest::Approx(centred.v2[j]));
  }
}

TEST_CASE("ar2 segment statistics skip the conditioning sites") {
  const std::vector<double> y{1, 2, 3, 4, 5, 6};
  CHECK(ar2_segment_stats(y, {0, 3}).rows == 1);
  CHECK(ar2_segment_stats(y, {3, 6}).rows == 3);
  const auto st = ar2_segment_stats(y, {0, 3});
  CHECK(st.xty[0] == 3.0);
  CHECK(st.xty[1] == 6.0);
  CHECK(st.xty[2] == 3.0);
}

TEST_CASE("data validation") {
  CHECK_THROWS_AS(validate_data(ModelKind::kPoisson, std::vector<double>{1, -1}), DataError);
  CHECK_THROWS_AS(validate_data(ModelKind::kPoisson, std::vector<double>{1, 1.5}), DataError);
  CHECK_THROWS_AS(validate_data(ModelKind::kNormalKnown, std::vector<double>{1, NAN}), DataError);
  CHECK_THROWS_AS(validate_data(ModelKind::kNormalKnown, std::vector<double>{1}), DataError);
  CHECK_THROWS_AS(validate_data(ModelKind::kAr2, std::vector<double>{1, 2, 3}), DataError);
  CHECK_NOTHROW(validate_data(ModelKind::kPoisson, std::vector<double>{0, 3}));
  CHECK(parse_model_kind("ar2") == ModelKind::kAr2);
  CHECK(to_string(ModelKind::kNormalUnknown) == "normal-unknown");
  CHECK_THROWS(parse_model_kind("gaussian"));
}

TEST_CASE("compact reorders and drops slots") {
  PoissonCountModel m({1, 2, 3, 4});
  m.set_lambdas({10.0, 20.0, 30.0});
  const std::vector<std::size_t> slots{2, 0};
  m.compact(slots);
  CHECK(m.lambdas() == std::vector<double>{30.0, 10.0});
  const std::vector<std::size_t> bad{5};
  CHECK_THROWS_AS(m.compact(bad), ContractViolation);
}

TEST_CASE("preset shared values are used at initialization") {
  ModelSettings settings;
  settings.known_sigma2 = 0.5;
  settings.normal_start = NormalShared{1.5, 2.0, 9.0};
  auto m = make_model(ModelKind::kNormalKnown, {1.0, 2.0, 3.0}, settings);
  RngStream rng(1, 0);
  m->initialize(StateSequence::constant(3), rng);
  const auto shared = m->shared_params();
  REQUIRE(shared.size() == 2);
  CHECK(shared[0] == 1.5);
  CHECK(shared[1] == 2.0);
  CHECK(dynamic_cast<NormalMeanShiftModel&>(*m).shared().sigma2 == 0.5);
  CHECK(m->regime_param_names() == std::vector<std::string>{"theta"});
}

TEST_CASE("regime draws follow their conditionals") {
  // Poisson: regime of 5 points summing to 10 under Gamma(2, 1) -> Gamma(12, 6), mean 2.
  PoissonCountModel m({2, 2, 2, 2, 2});
  RngStream rng(8, 0);
  const auto s = StateSequence::constant(5);
  m.initialize(s, rng);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    m.draw_regime_params(s, rng);
    sum += m.lambdas()[0];
  }
  CHECK(std::abs(sum / n - 2.0) < 5.0 * std::sqrt(12.0 / 36.0 / n));

  // AR(2) sigma2 given beta: scaled inverse chi-square(rows, rss/rows).
  std::vector<double> y{0.0, 0.0, 1.0, -1.0, 2.0, 0.5, -0.5, 1.5, 0.0, 1.0, -2.0, 0.5};
  Ar2Model ar(y);
  const auto s2 = StateSequence::constant(y.size());
  ar.initialize(s2, rng);
  Ar2Regime fixed;
  fixed.beta = {0.0, 0.0, 0.0};
  double rss = 0.0;
  for (std::size_t t = 2; t < y.size(); ++t) rss += y[t] * y[t];
  const double nu = static_cast<double>(y.size() - 2);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    ar.set_regimes({fixed});
    ar.draw_sigma2s(s2, rng);
    acc += ar.regimes()[0].sigma2;
  }
  const double mean = rss / (nu - 2.0);
  const double var = 2.0 * mean * mean / (nu - 4.0);
  CHECK(std::abs(acc / n - mean) < 5.0 * std::sqrt(var / n));
}

TEST_CASE("ar2 exposes no prior draw") {
  Ar2Model ar({1, 2, 3, 4, 5});
  RngStream rng(1, 0);
  CHECK_FALSE(ar.has_proper_regime_prior());
  CHECK(ar.pinned_prefix() == 3);
  CHECK_THROWS_AS(ar.new_slot_from_prior(rng), ContractViolation);
  CHECK(ar.log_likelihood(0, 0) == 0.0);
}
