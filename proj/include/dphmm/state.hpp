#ifndef DPHMM_STATE_HPP
#define DPHMM_STATE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace dphmm {

/// Regime labels s_1..s_n of a left-to-right chain in canonical form:
/// the first label is 1 and consecutive labels differ by 0 or 1.
///
/// Labels are stored 1-based (regime numbers) but indexed 0-based by time.
class StateSequence {
 public:
  StateSequence() = default;

  // Throws ContractViolation unless `labels` is canonical.
  explicit StateSequence(std::vector<int> labels);

  // Single regime of length n.
  static StateSequence constant(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int operator[](std::size_t t) const { return labels_[t]; }
  const std::vector<int>& labels() const { return labels_; }

  std::size_t num_regimes() const {
    return labels_.empty() ? 0 : static_cast<std::size_t>(labels_.back());
  }
  std::size_t num_change_points() const { return num_regimes() == 0 ? 0 : num_regimes() - 1; }

  bool operator==(const StateSequence&) const = default;

 private:
  std::vector<int> labels_;
};

bool is_canonical(std::span<const int> labels);

// Maps consecutive distinct labels of a non-decreasing sequence onto 1, 2, ...
StateSequence relabel(std::span<const int> raw);

/// Half-open [begin, end) time range of one regime.
struct Segment {
  std::size_t begin;
  std::size_t end;
  std::size_t length() const { return end - begin; }
};

std::vector<Segment> segments(const StateSequence& s);

// n_ii per regime; entry i-1 belongs to regime i and equals its duration - 1.
std::vector<std::size_t> self_transition_counts(const StateSequence& s);

/// Change-point locations tau_1 < ... < tau_k, 1-based: tau_i is the time
/// index (counting from 1) of the last observation of regime i.
std::vector<std::size_t> change_points(const StateSequence& s);

/// Concentration parameters of the left-to-right Dirichlet-process prior
/// together with their Gamma(shape, rate) hyperpriors.
struct DphmmHyper {
  double alpha = 1.0;  // self-transition mass
  double beta = 1.0;   // innovation concentration
  double prior_a_alpha = 1.0;
  double prior_b_alpha = 1.0;
  double prior_a_beta = 1.0;
  double prior_b_beta = 1.0;

  // Throws DomainError when any field is non-positive.
  void validate() const;
};

struct TransitionProbs {
  double p_stay;
  double p_new;
};

// (n_ii + alpha, beta) / (n_ii + alpha + beta).
TransitionProbs state_prior_transition(std::size_t n_ii, double alpha, double beta);

/// Log prior contribution of one regime lasting `duration` steps.
///
/// A closed regime ends in an innovation (every regime but the last); the
/// open one is the final regime, which contributes only its self-transitions.
double regime_log_prior(std::size_t duration, bool closed, double alpha, double beta);

// Sum over t of log pr(s_{t+1} | s_t, counts so far).
double sequence_log_prior(const StateSequence& s, double alpha, double beta);

/// Equidistant initialization with `num_regimes` regimes: regime i covers
/// times floor((i-1) n / r) < t <= floor(i n / r) (1-based t).
StateSequence init_equidistant(std::size_t n, std::size_t num_regimes);

}  // namespace dphmm

#endif  // DPHMM_STATE_HPP
