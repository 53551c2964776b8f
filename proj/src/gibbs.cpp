#include "dphmm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dphmm/error.hpp"

namespace dphmm {

namespace {

double log_stay(std::size_t n_ii, double alpha, double beta) {
  return std::log(state_prior_transition(n_ii, alpha, beta).p_stay);
}

double log_new(std::size_t n_ii, double alpha, double beta) {
  return std::log(state_prior_transition(n_ii, alpha, beta).p_new);
}

// Mutable slot assignment for one sweep.
class SweepState {
 public:
  SweepState(const StateSequence& s, SlotLikelihood& model)
      : slots_(s.size()), model_(model) {
    for (std::size_t t = 0; t < s.size(); ++t) slots_[t] = static_cast<std::size_t>(s[t] - 1);
  }

  std::size_t size() const { return slots_.size(); }
  std::size_t operator[](std::size_t t) const { return slots_[t]; }
  void assign(std::size_t t, std::size_t slot) { slots_[t] = slot; }

  // Length of the run of equal slots ending at `t` (inclusive).
  std::size_t run_ending_at(std::size_t t) const {
    std::size_t len = 1;
    while (t >= len && slots_[t - len] == slots_[t]) ++len;
    return len;
  }

  // Length of the run starting at `t`; `reaches_end` tells whether it is final.
  std::size_t run_starting_at(std::size_t t, bool& reaches_end) const {
    std::size_t len = 1;
    while (t + len < slots_.size() && slots_[t + len] == slots_[t]) ++len;
    reaches_end = (t + len == slots_.size());
    return len;
  }

  double loglik(std::size_t t, std::size_t slot) const {
    const double ll = model_.log_likelihood(t, slot);
    if (!std::isfinite(ll)) {
      throw NumericalError("gibbs_sweep: non-finite log-likelihood at t=" + std::to_string(t + 1) +
                           " for parameter slot " + std::to_string(slot));
    }
    return ll;
  }

  SweepResult finish(std::size_t sites_drawn) const {
    std::vector<int> labels(slots_.size());
    std::vector<std::size_t> regime_slots;
    for (std::size_t t = 0; t < slots_.size(); ++t) {
      if (t == 0 || slots_[t] != slots_[t - 1]) regime_slots.push_back(slots_[t]);
      labels[t] = static_cast<int>(regime_slots.size());
    }
    return {StateSequence(std::move(labels)), std::move(regime_slots), sites_drawn};
  }

 private:
  std::vector<std::size_t> slots_;
  SlotLikelihood& model_;
};

void paper_site(SweepState& st, std::size_t t, const DphmmHyper& h, RngStream& rng,
                std::size_t& drawn) {
  const std::size_t n = st.size();
  const double a = h.alpha;
  const double b = h.beta;
  const std::size_t cur = st[t];

  if (t == 0) {
    if (st[1] == cur) return;
    bool last = false;
    const std::size_t right = st[1];
    const std::size_t n_right = st.run_starting_at(1, last) - 1;
    const double lw[2] = {
        std::log(a / (a + b)) + std::log(b / (a + b)) + st.loglik(0, cur),
        std::log(b / (a + b)) + log_stay(n_right, a, b) + st.loglik(0, right)};
    if (draw_log_categorical(lw, rng) == 1) st.assign(0, right);
    ++drawn;
    return;
  }

  if (t == n - 1) {
    const std::size_t left = st[t - 1];
    if (cur == left) return;
    const std::size_t n_left = st.run_ending_at(t - 1) - 1;
    const double lw[2] = {log_stay(n_left, a, b) + st.loglik(t, left),
                          log_new(n_left, a, b) + st.loglik(t, cur)};
    if (draw_log_categorical(lw, rng) == 0) st.assign(t, left);
    ++drawn;
    return;
  }

  const std::size_t left = st[t - 1];
  const std::size_t right = st[t + 1];
  if (left == right) return;
  bool last = false;
  const std::size_t n_left = st.run_ending_at(t - 1) - 1;
  const std::size_t n_right = st.run_starting_at(t + 1, last) - 1;
  const auto prior = boundary_log_weights(n_left, n_right, a, b);
  const double lw[2] = {prior[0] + st.loglik(t, left), prior[1] + st.loglik(t, right)};
  st.assign(t, draw_log_categorical(lw, rng) == 0 ? left : right);
  ++drawn;
}

void exact_site(SweepState& st, std::size_t t, SlotLikelihood& model, const DphmmHyper& h,
                RngStream& rng, std::size_t& drawn) {
  const std::size_t n = st.size();
  const double a = h.alpha;
  const double b = h.beta;
  const std::size_t cur = st[t];

  if (t == 0) {
    bool right_last = false;
    const std::size_t right = st[1];
    const std::size_t d_right = st.run_starting_at(1, right_last);
    const std::size_t own = (cur != right) ? cur : model.new_slot_from_prior(rng);
    const double lw[2] = {
        regime_log_prior(d_right + 1, !right_last, a, b) + st.loglik(0, right),
        regime_log_prior(1, true, a, b) + regime_log_prior(d_right, !right_last, a, b) +
            st.loglik(0, own)};
    st.assign(0, draw_log_categorical(lw, rng) == 0 ? right : own);
    ++drawn;
    return;
  }

  if (t == n - 1) {
    const std::size_t left = st[t - 1];
    const std::size_t d_left = st.run_ending_at(t - 1);
    const std::size_t own = (cur != left) ? cur : model.new_slot_from_prior(rng);
    const double lw[2] = {
        regime_log_prior(d_left + 1, false, a, b) + st.loglik(t, left),
        regime_log_prior(d_left, true, a, b) + regime_log_prior(1, false, a, b) +
            st.loglik(t, own)};
    st.assign(t, draw_log_categorical(lw, rng) == 0 ? left : own);
    ++drawn;
    return;
  }

  const std::size_t left = st[t - 1];
  const std::size_t right = st[t + 1];
  if (left == right) return;
  bool right_last = false;
  const std::size_t d_left = st.run_ending_at(t - 1);
  const std::size_t d_right = st.run_starting_at(t + 1, right_last);
  const std::size_t own = (cur != left && cur != right) ? cur : model.new_slot_from_prior(rng);
  const double left_short = regime_log_prior(d_left, true, a, b);
  const double right_short = regime_log_prior(d_right, !right_last, a, b);
  const double lw[3] = {
      regime_log_prior(d_left + 1, true, a, b) + right_short + st.loglik(t, left),
      left_short + regime_log_prior(d_right + 1, !right_last, a, b) + st.loglik(t, right),
      left_short + regime_log_prior(1, true, a, b) + right_short + st.loglik(t, own)};
  const std::size_t pick = draw_log_categorical(lw, rng);
  st.assign(t, pick == 0 ? left : (pick == 1 ? right : own));
  ++drawn;
}

}  // namespace

std::array<double, 2> boundary_log_weights(std::size_t n_left, std::size_t n_right, double alpha,
                                           double beta) {
  return {log_stay(n_left, alpha, beta) + log_new(n_left + 1, alpha, beta),
          log_new(n_left, alpha, beta) + log_stay(n_right, alpha, beta)};
}

std::size_t draw_log_categorical(std::span<const double> log_weights, RngStream& rng) {
  if (log_weights.empty()) throw ContractViolation("draw_log_categorical: no candidates");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) throw NumericalError("draw_log_categorical: no finite weight");
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i + 1 < log_weights.size(); ++i) {
    u -= std::exp(log_weights[i] - top);
    if (u < 0.0) return i;
  }
  return log_weights.size() - 1;
}

SweepResult gibbs_sweep(const StateSequence& s, SlotLikelihood& model, const DphmmHyper& hyper,
                        RngStream& rng, const SweepOptions& options) {
  hyper.validate();
  SweepState st(s, model);
  std::size_t drawn = 0;
  const std::size_t n = s.size();
  if (options.pinned_prefix > 0 && options.pinned_prefix < n) {
    for (std::size_t t = 0; t < options.pinned_prefix; ++t) {
      if (s[t] != 1) throw ContractViolation("gibbs_sweep: pinned prefix must lie in regime 1");
    }
  }
  const std::size_t p = options.pinned_prefix;
  // Under kPaper the pinned block plays the role of a singleton: once regime
  // 1 has shrunk to it, it is absorbed by its only neighbour.
  auto absorb_bare_prefix = [&] {
    if (options.rule != SweepRule::kPaper || p == 0 || p >= n || st[p] == st[p - 1]) return;
    for (std::size_t t = 0; t < p; ++t) st.assign(t, st[p]);
  };
  if (n >= 2) {
    absorb_bare_prefix();
    for (std::size_t t = p; t < n; ++t) {
      if (options.rule == SweepRule::kPaper) {
        paper_site(st, t, hyper, rng, drawn);
        if (t == p) absorb_bare_prefix();
      } else {
        exact_site(st, t, model, hyper, rng, drawn);
      }
    }
  }
  return st.finish(drawn);
}

}  // namespace dphmm
