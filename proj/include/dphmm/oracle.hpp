#ifndef DPHMM_ORACLE_HPP
#define DPHMM_ORACLE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dphmm/obs_models.hpp"
#include "dphmm/state.hpp"

namespace dphmm {

inline constexpr std::size_t kOracleMaxLength = 12;

/// Exact posterior over all 2^(n-1) canonical state sequences.
struct ExactPosterior {
  std::vector<StateSequence> sequences;
  std::vector<double> probabilities;
  // state_prob[t][i] = P(s_t = i+1); rows padded to n columns.
  std::vector<std::vector<double>> state_prob;
  // k_pmf[k] = P(k change points), k = 0..n-1.
  std::vector<double> k_pmf;
  // cp_pmf[k][i][t] = P(tau_{i+1} = t+1 | k change points).
  std::vector<std::vector<std::vector<double>>> cp_pmf;
};

/// Log marginal likelihood of observations [begin, end) in one regime.
using SegmentMarginal = std::function<double(std::size_t begin, std::size_t end)>;

/// Enumerates change-point subsets of {1..n-1}. Weights are
/// exp(sequence_log_prior) times the product of segment marginals.
ExactPosterior enumerate_posterior(std::size_t n, const SegmentMarginal& marginal, double alpha,
                                   double beta);

// Segment marginals with the regime parameter integrated against its prior
// and every shared parameter held fixed.
SegmentMarginal poisson_gamma_marginal(std::span<const double> y, GammaPrior prior);
SegmentMarginal normal_fixed_marginal(std::span<const double> y, double mu, double upsilon2,
                                      double sigma2);
// Same value everywhere: the posterior reduces to the state prior.
SegmentMarginal flat_marginal();

double tv_distance(std::span<const double> a, std::span<const double> b);

}  // namespace dphmm

#endif  // DPHMM_ORACLE_HPP
