#include "dphmm/state.hpp"

#include <cmath>
#include <string>

#include "dphmm/error.hpp"
#include "dphmm/special_math.hpp"

namespace dphmm {

bool is_canonical(std::span<const int> labels) {
  if (labels.empty()) return true;
  if (labels[0] != 1) return false;
  for (std::size_t t = 1; t < labels.size(); ++t) {
    const int step = labels[t] - labels[t - 1];
    if (step != 0 && step != 1) return false;
  }
  return true;
}

StateSequence::StateSequence(std::vector<int> labels) : labels_(std::move(labels)) {
  if (!is_canonical(labels_)) {
    throw ContractViolation("state sequence is not canonical (must start at 1, steps of 0 or 1)");
  }
}

StateSequence StateSequence::constant(std::size_t n) {
  return StateSequence(std::vector<int>(n, 1));
}

StateSequence relabel(std::span<const int> raw) {
  std::vector<int> out(raw.size());
  int label = 0;
  for (std::size_t t = 0; t < raw.size(); ++t) {
    if (t > 0 && raw[t] < raw[t - 1]) {
      throw ContractViolation("relabel: labels decrease at t=" + std::to_string(t + 1));
    }
    if (t == 0 || raw[t] != raw[t - 1]) ++label;
    out[t] = label;
  }
  return StateSequence(std::move(out));
}

std::vector<Segment> segments(const StateSequence& s) {
  std::vector<Segment> out;
  out.reserve(s.num_regimes());
  std::size_t begin = 0;
  for (std::size_t t = 1; t <= s.size(); ++t) {
    if (t == s.size() || s[t] != s[t - 1]) {
      out.push_back({begin, t});
      begin = t;
    }
  }
  return out;
}

std::vector<std::size_t> self_transition_counts(const StateSequence& s) {
  std::vector<std::size_t> counts(s.num_regimes(), 0);
  for (std::size_t t = 1; t < s.size(); ++t) {
    if (s[t] == s[t - 1]) ++counts[static_cast<std::size_t>(s[t] - 1)];
  }
  return counts;
}

std::vector<std::size_t> change_points(const StateSequence& s) {
  std::vector<std::size_t> tau;
  for (std::size_t t = 1; t < s.size(); ++t) {
    if (s[t] != s[t - 1]) tau.push_back(t);  // last index of the previous regime, 1-based
  }
  return tau;
}

void DphmmHyper::validate() const {
  const auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError(std::string("DphmmHyper: ") + name + " must be positive");
    }
  };
  check(alpha, "alpha");
  check(beta, "beta");
  check(prior_a_alpha, "prior_a_alpha");
  check(prior_b_alpha, "prior_b_alpha");
  check(prior_a_beta, "prior_a_beta");
  check(prior_b_beta, "prior_b_beta");
}

TransitionProbs state_prior_transition(std::size_t n_ii, double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta > 0.0)) {
    throw DomainError("state_prior_transition: need alpha >= 0 and beta > 0");
  }
  const double n = static_cast<double>(n_ii);
  const double denom = n + alpha + beta;
  return {(n + alpha) / denom, beta / denom};
}

double regime_log_prior(std::size_t duration, bool closed, double alpha, double beta) {
  if (duration == 0) throw ContractViolation("regime_log_prior: zero duration");
  const double stays = static_cast<double>(duration - 1);
  double lp = 0.0;
  if (duration > 1) {
    lp = ln_gamma(stays + alpha) - ln_gamma(alpha) + ln_gamma(alpha + beta) -
         ln_gamma(stays + alpha + beta);
  }
  if (closed) lp += std::log(beta) - std::log(stays + alpha + beta);
  return lp;
}

double sequence_log_prior(const StateSequence& s, double alpha, double beta) {
  double lp = 0.0;
  std::size_t run_stays = 0;
  for (std::size_t t = 1; t < s.size(); ++t) {
    const auto probs = state_prior_transition(run_stays, alpha, beta);
    if (s[t] == s[t - 1]) {
      lp += std::log(probs.p_stay);
      ++run_stays;
    } else {
      lp += std::log(probs.p_new);
      run_stays = 0;
    }
  }
  return lp;
}

StateSequence init_equidistant(std::size_t n, std::size_t num_regimes) {
  if (num_regimes == 0 || num_regimes > n) {
    throw ContractViolation("init_equidistant: need 1 <= regimes <= n (regimes=" +
                            std::to_string(num_regimes) + ", n=" + std::to_string(n) + ")");
  }
  std::vector<int> labels(n);
  std::size_t t = 0;
  for (std::size_t i = 1; i <= num_regimes; ++i) {
    const std::size_t upper = (i * n) / num_regimes;
    for (; t < upper; ++t) labels[t] = static_cast<int>(i);
  }
  return StateSequence(std::move(labels));
}

}  // namespace dphmm
