#ifndef DPHMM_HYPER_LEARN_HPP
#define DPHMM_HYPER_LEARN_HPP

#include <cstddef>
#include <vector>

#include "dphmm/special_math.hpp"
#include "dphmm/state.hpp"

namespace dphmm {

/// What the (alpha, beta) posterior conditions on: the self-transition
/// count of every regime and the Gamma(shape, rate) hyperpriors.
struct HyperPosteriorContext {
  std::vector<std::size_t> counts;
  double a_alpha = 1.0;
  double b_alpha = 1.0;
  double a_beta = 1.0;
  double b_beta = 1.0;

  std::size_t num_regimes() const { return counts.size(); }

  static HyperPosteriorContext from_states(const StateSequence& s, const DphmmHyper& hyper);
};

/// log p(alpha, beta | S) up to a constant:
///   Gamma kernels of both priors plus, for every regime i,
///   log beta + lnG(alpha+beta) - lnG(alpha) + lnG(n_ii+alpha) - lnG(n_ii+1+alpha+beta).
double log_posterior_alpha_beta(double alpha, double beta, const HyperPosteriorContext& ctx);

struct HyperGradient {
  double d_alpha;
  double d_beta;
};
HyperGradient grad_log_posterior(double alpha, double beta, const HyperPosteriorContext& ctx);

// Analytic second derivatives {d2/da2, d2/dadb, d2/db2}.
struct HyperHessian {
  double aa;
  double ab;
  double bb;
};
HyperHessian hessian_log_posterior(double alpha, double beta, const HyperPosteriorContext& ctx);

struct MapResult {
  double alpha;
  double beta;
  std::size_t iterations;
  bool converged;  // false: returned the last iterate after max_iter
};

// Newton-Raphson with gradient-ascent fallback; see hyper_learn.cpp.
MapResult map_update(const HyperPosteriorContext& ctx, double alpha0, double beta0,
                     double tol = 1e-8, std::size_t max_iter = 100);

struct MhResult {
  double alpha;
  double beta;
  bool alpha_accepted;
  bool beta_accepted;
};

/// Acceptance probability min(1, A) of the truncated random-walk move
/// current -> proposal, given the two log posterior values.
double mh_acceptance(double log_post_current, double log_post_proposal, double current,
                     double proposal);

/// One Metropolis-Hastings update of alpha then beta (given the new alpha)
/// with a unit normal random walk truncated to the positive half line.
MhResult mh_update(double alpha, double beta, const HyperPosteriorContext& ctx, RngStream& rng);

}  // namespace dphmm

#endif  // DPHMM_HYPER_LEARN_HPP
