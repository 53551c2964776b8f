#include "dphmm/hyper_learn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dphmm/error.hpp"

namespace dphmm {

namespace {

constexpr double kPositivityFloor = 1e-8;

void require_positive_point(double alpha, double beta, const char* who) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw DomainError(std::string(who) + ": alpha and beta must be positive and finite");
  }
}

double max_abs(const HyperGradient& g) { return std::max(std::abs(g.d_alpha), std::abs(g.d_beta)); }

}  // namespace

HyperPosteriorContext HyperPosteriorContext::from_states(const StateSequence& s,
                                                         const DphmmHyper& hyper) {
  return {self_transition_counts(s), hyper.prior_a_alpha, hyper.prior_b_alpha, hyper.prior_a_beta,
          hyper.prior_b_beta};
}

double log_posterior_alpha_beta(double alpha, double beta, const HyperPosteriorContext& ctx) {
  require_positive_point(alpha, beta, "log_posterior_alpha_beta");
  double lp = (ctx.a_alpha - 1.0) * std::log(alpha) - ctx.b_alpha * alpha +
              (ctx.a_beta - 1.0) * std::log(beta) - ctx.b_beta * beta;
  const double shared = std::log(beta) + ln_gamma(alpha + beta) - ln_gamma(alpha);
  for (std::size_t c : ctx.counts) {
    const double n = static_cast<double>(c);
    lp += shared + ln_gamma(n + alpha) - ln_gamma(n + 1.0 + alpha + beta);
  }
  return lp;
}

HyperGradient grad_log_posterior(double alpha, double beta, const HyperPosteriorContext& ctx) {
  require_positive_point(alpha, beta, "grad_log_posterior");
  double ga = (ctx.a_alpha - 1.0) / alpha - ctx.b_alpha;
  double gb = (ctx.a_beta - 1.0) / beta - ctx.b_beta;
  const double psi_ab = digamma(alpha + beta);
  const double psi_a = digamma(alpha);
  for (std::size_t c : ctx.counts) {
    const double n = static_cast<double>(c);
    const double psi_tail = digamma(n + 1.0 + alpha + beta);
    ga += psi_ab + digamma(n + alpha) - psi_a - psi_tail;
    gb += 1.0 / beta + psi_ab - psi_tail;
  }
  return {ga, gb};
}

HyperHessian hessian_log_posterior(double alpha, double beta, const HyperPosteriorContext& ctx) {
  require_positive_point(alpha, beta, "hessian_log_posterior");
  double haa = -(ctx.a_alpha - 1.0) / (alpha * alpha);
  double hbb = -(ctx.a_beta - 1.0) / (beta * beta);
  double hab = 0.0;
  const double tri_ab = trigamma(alpha + beta);
  const double tri_a = trigamma(alpha);
  for (std::size_t c : ctx.counts) {
    const double n = static_cast<double>(c);
    const double tri_tail = trigamma(n + 1.0 + alpha + beta);
    haa += tri_ab - tri_a + trigamma(n + alpha) - tri_tail;
    hab += tri_ab - tri_tail;
    hbb += -1.0 / (beta * beta) + tri_ab - tri_tail;
  }
  return {haa, hab, hbb};
}

// Each iteration proposes the Newton step when the Hessian is negative
// definite and the gradient otherwise, halves it until both coordinates stay
// above kPositivityFloor, then keeps halving until the log posterior does not
// decrease.
MapResult map_update(const HyperPosteriorContext& ctx, double alpha0, double beta0, double tol,
                     std::size_t max_iter) {
  require_positive_point(alpha0, beta0, "map_update");
  double a = alpha0;
  double b = beta0;
  double f = log_posterior_alpha_beta(a, b, ctx);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const auto g = grad_log_posterior(a, b, ctx);
    if (max_abs(g) <= tol) return {a, b, it, true};

    const auto h = hessian_log_posterior(a, b, ctx);
    const double det = h.aa * h.bb - h.ab * h.ab;
    double da = g.d_alpha;
    double db = g.d_beta;
    if (h.aa < 0.0 && det > 0.0) {
      da = -(h.bb * g.d_alpha - h.ab * g.d_beta) / det;
      db = -(-h.ab * g.d_alpha + h.aa * g.d_beta) / det;
    }

    double step = 1.0;
    while (step > 0.0 && (a + step * da <= kPositivityFloor || b + step * db <= kPositivityFloor)) {
      step *= 0.5;
    }
    bool moved = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      const double na = a + step * da;
      const double nb = b + step * db;
      if (na <= kPositivityFloor || nb <= kPositivityFloor) continue;
      const double nf = log_posterior_alpha_beta(na, nb, ctx);
      if (nf >= f) {
        moved = (na != a || nb != b);
        a = na;
        b = nb;
        f = nf;
        break;
      }
    }
    if (!moved) {
      const bool ok = max_abs(grad_log_posterior(a, b, ctx)) <= tol;
      return {a, b, it + 1, ok};
    }
  }
  const bool ok = max_abs(grad_log_posterior(a, b, ctx)) <= tol;
  return {a, b, max_iter, ok};
}

double mh_acceptance(double log_post_current, double log_post_proposal, double current,
                     double proposal) {
  const double log_ratio = log_post_proposal - log_post_current +
                           std::log(std_normal_cdf(current)) - std::log(std_normal_cdf(proposal));
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

namespace {

double positive_walk(double current, RngStream& rng) {
  double proposal = 0.0;
  do {
    proposal = current + draw_normal(0.0, 1.0, rng);
  } while (!(proposal > 0.0));
  return proposal;
}

}  // namespace

MhResult mh_update(double alpha, double beta, const HyperPosteriorContext& ctx, RngStream& rng) {
  require_positive_point(alpha, beta, "mh_update");
  MhResult out{alpha, beta, false, false};

  const double lp_now = log_posterior_alpha_beta(alpha, beta, ctx);
  const double alpha_prop = positive_walk(alpha, rng);
  const double lp_alpha = log_posterior_alpha_beta(alpha_prop, beta, ctx);
  double lp_cur = lp_now;
  if (rng.uniform() < mh_acceptance(lp_now, lp_alpha, alpha, alpha_prop)) {
    out.alpha = alpha_prop;
    out.alpha_accepted = true;
    lp_cur = lp_alpha;
  }

  const double beta_prop = positive_walk(beta, rng);
  const double lp_beta = log_posterior_alpha_beta(out.alpha, beta_prop, ctx);
  if (rng.uniform() < mh_acceptance(lp_cur, lp_beta, beta, beta_prop)) {
    out.beta = beta_prop;
    out.beta_accepted = true;
  }
  return out;
}

}  // namespace dphmm
