#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dphmm/error.hpp"
#include "dphmm/state.hpp"

using namespace dphmm;

namespace {

StateSequence seq(std::vector<int> v) { return StateSequence(std::move(v)); }

// Sequential product of one-step prior probabilities, counted by hand.
double brute_log_prior(const std::vector<int>& s, double a, double b) {
  double lp = 0.0;
  std::size_t run = 0;
  for (std::size_t t = 1; t < s.size(); ++t) {
    const double denom = run + a + b;
    if (s[t] == s[t - 1]) {
      lp += std::log((run + a) / denom);
      ++run;
    } else {
      lp += std::log(b / denom);
      run = 0;
    }
  }
  return lp;
}

}  // namespace

TEST_CASE("canonical form is enforced") {
  CHECK(is_canonical(std::vector<int>{1, 1, 2, 3, 3}));
  CHECK_FALSE(is_canonical(std::vector<int>{2, 2}));
  CHECK_FALSE(is_canonical(std::vector<int>{1, 3}));
  CHECK_FALSE(is_canonical(std::vector<int>{1, 2, 1}));
  CHECK_THROWS_AS(seq({1, 3}), ContractViolation);
  CHECK(StateSequence::constant(4).num_regimes() == 1);
}

TEST_CASE("relabel") {
  CHECK(relabel(std::vector<int>{1, 1, 3, 3, 5}) == seq({1, 1, 2, 2, 3}));
  CHECK(relabel(std::vector<int>{2, 2, 2}) == seq({1, 1, 1}));
  CHECK(relabel(std::vector<int>{1, 2, 2, 3}) == seq({1, 2, 2, 3}));
  CHECK_THROWS_AS(relabel(std::vector<int>{1, 3, 2}), ContractViolation);
}

TEST_CASE("self-transition counts") {
  CHECK(self_transition_counts(seq({1, 1, 1, 2, 2})) == std::vector<std::size_t>{2, 1});
  CHECK(self_transition_counts(seq({1, 2, 3})) == std::vector<std::size_t>{0, 0, 0});
  CHECK(self_transition_counts(seq({1, 1})) == std::vector<std::size_t>{1});
  const auto s = seq({1, 1, 2, 2, 2, 3, 4, 4});
  std::size_t total = 0;
  for (auto c : self_transition_counts(s)) total += c + 1;
  CHECK(total == s.size());
}

TEST_CASE("change points and segments") {
  CHECK(change_points(seq({1, 1, 2, 2})) == std::vector<std::size_t>{2});
  CHECK(change_points(seq({1, 1, 1})).empty());
  CHECK(change_points(seq({1, 2, 3})) == std::vector<std::size_t>{1, 2});
  const auto segs = segments(seq({1, 1, 2, 3, 3, 3}));
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].begin == 0);
  CHECK(segs[0].end == 2);
  CHECK(segs[2].length() == 3);
  CHECK(seq({1, 2, 2}).num_change_points() == 1);
}

TEST_CASE("state prior transition") {
  auto p = state_prior_transition(0, 3.0, 2.0);
  CHECK(p.p_stay == doctest::Approx(0.6));
  CHECK(p.p_new == doctest::Approx(0.4));
  p = state_prior_transition(10, 1.0, 1.0);
  CHECK(p.p_stay == doctest::Approx(11.0 / 12.0));
  CHECK(p.p_new == doctest::Approx(1.0 / 12.0));
  p = state_prior_transition(0, 0.0, 1.0);
  CHECK(p.p_stay == 0.0);
  CHECK(p.p_new == 1.0);
  for (std::size_t n = 0; n < 40; ++n) {
    for (double a : {0.1, 1.0, 3.0}) {
      for (double b : {0.05, 2.0}) {
        const auto q = state_prior_transition(n, a, b);
        CHECK(std::abs(q.p_stay + q.p_new - 1.0) < 1e-15);
        CHECK(std::abs(q.p_stay - (n + a) / (n + a + b)) < 1e-15);
      }
    }
  }
}

TEST_CASE("sequence log prior") {
  CHECK(sequence_log_prior(seq({1, 1}), 3.0, 2.0) == doctest::Approx(std::log(0.6)));
  CHECK(sequence_log_prior(seq({1, 2}), 3.0, 2.0) == doctest::Approx(std::log(0.4)));
  CHECK(sequence_log_prior(seq({1, 1, 2}), 3.0, 2.0) == doctest::Approx(std::log(0.2)));
  CHECK(sequence_log_prior(seq({1}), 3.0, 2.0) == 0.0);
  const std::vector<int> s{1, 1, 1, 2, 3, 3, 3, 3, 4};
  CHECK(std::abs(sequence_log_prior(seq(s), 0.7, 1.3) - brute_log_prior(s, 0.7, 1.3)) < 1e-12);
}

TEST_CASE("regime factors add up to the sequence prior") {
  const auto s = seq({1, 1, 1, 2, 3, 3, 3, 3, 4, 4});
  const auto segs = segments(s);
  double total = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i)
    total += regime_log_prior(segs[i].length(), i + 1 < segs.size(), 2.0, 0.5);
  CHECK(std::abs(total - sequence_log_prior(s, 2.0, 0.5)) < 1e-12);
}

TEST_CASE("prior sums to one over all canonical sequences") {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (auto [a, b] : {std::pair{3.0, 2.0}, {0.2, 0.9}, {1.0, 1.0}}) {
      double total = 0.0;
      for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
        std::vector<int> v(n, 1);
        for (std::size_t t = 1; t < n; ++t) v[t] = v[t - 1] + ((mask >> (t - 1)) & 1 ? 1 : 0);
        total += std::exp(sequence_log_prior(seq(v), a, b));
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("equidistant initialization") {
  const auto s = init_equidistant(150, 3);
  CHECK(change_points(s) == std::vector<std::size_t>{50, 100});
  CHECK(init_equidistant(5, 1) == seq({1, 1, 1, 1, 1}));
  CHECK(init_equidistant(7, 2) == seq({1, 1, 1, 2, 2, 2, 2}));
  CHECK_THROWS_AS(init_equidistant(3, 4), ContractViolation);
}

TEST_CASE("hyper validation") {
  DphmmHyper h;
  CHECK_NOTHROW(h.validate());
  h.beta = 0.0;
  CHECK_THROWS(h.validate());
  h = {};
  h.prior_b_alpha = -1.0;
  CHECK_THROWS(h.validate());
}
