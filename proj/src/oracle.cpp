#include "dphmm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dphmm/error.hpp"
#include "dphmm/special_math.hpp"

namespace dphmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_sum_exp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

ExactPosterior enumerate_posterior(std::size_t n, const SegmentMarginal& marginal, double alpha,
                                   double beta) {
  if (n < 1) throw ContractViolation("enumerate_posterior: empty series");
  if (n > kOracleMaxLength) {
    throw ContractViolation("enumerate_posterior: n=" + std::to_string(n) +
                            " exceeds the enumeration bound of " +
                            std::to_string(kOracleMaxLength));
  }
  ExactPosterior out;
  const std::size_t subsets = std::size_t{1} << (n - 1);
  std::vector<double> logw(subsets);
  out.sequences.reserve(subsets);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    // Bit j set: a change point after time j+1 (1-based).
    std::vector<int> labels(n);
    int label = 1;
    labels[0] = 1;
    for (std::size_t t = 1; t < n; ++t) {
      if (mask & (std::size_t{1} << (t - 1))) ++label;
      labels[t] = label;
    }
    StateSequence s(std::move(labels));
    double lw = sequence_log_prior(s, alpha, beta);
    for (const auto& seg : segments(s)) lw += marginal(seg.begin, seg.end);
    logw[mask] = lw;
    out.sequences.push_back(std::move(s));
  }

  const double lz = log_sum_exp(logw);
  out.probabilities.resize(subsets);
  for (std::size_t m = 0; m < subsets; ++m) out.probabilities[m] = std::exp(logw[m] - lz);

  out.state_prob.assign(n, std::vector<double>(n, 0.0));
  out.k_pmf.assign(n, 0.0);
  out.cp_pmf.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.cp_pmf[k].assign(k, std::vector<double>(n, 0.0));
  for (std::size_t m = 0; m < subsets; ++m) {
    const auto& s = out.sequences[m];
    const double p = out.probabilities[m];
    for (std::size_t t = 0; t < n; ++t) out.state_prob[t][static_cast<std::size_t>(s[t] - 1)] += p;
    const std::size_t k = s.num_change_points();
    out.k_pmf[k] += p;
    const auto tau = change_points(s);
    for (std::size_t i = 0; i < tau.size(); ++i) out.cp_pmf[k][i][tau[i] - 1] += p;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (out.k_pmf[k] <= 0.0) continue;
    for (auto& row : out.cp_pmf[k])
      for (double& v : row) v /= out.k_pmf[k];
  }
  return out;
}

SegmentMarginal poisson_gamma_marginal(std::span<const double> y, GammaPrior prior) {
  std::vector<double> data(y.begin(), y.end());
  return [data = std::move(data), prior](std::size_t begin, std::size_t end) {
    double u = 0.0;
    double log_fact = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
      u += data[t];
      log_fact += ln_gamma(data[t] + 1.0);
    }
    const double n = static_cast<double>(end - begin);
    return prior.shape * std::log(prior.rate) - ln_gamma(prior.shape) +
           ln_gamma(prior.shape + u) - (prior.shape + u) * std::log(prior.rate + n) - log_fact;
  };
}

SegmentMarginal normal_fixed_marginal(std::span<const double> y, double mu, double upsilon2,
                                      double sigma2) {
  std::vector<double> data(y.begin(), y.end());
  return [data = std::move(data), mu, upsilon2, sigma2](std::size_t begin, std::size_t end) {
    double sum = 0.0;
    double ss = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
      const double r = data[t] - mu;
      sum += r;
      ss += r * r;
    }
    const double d = static_cast<double>(end - begin);
    const double total_var = sigma2 + d * upsilon2;
    return -0.5 * d * kLog2Pi - 0.5 * (d - 1.0) * std::log(sigma2) - 0.5 * std::log(total_var) -
           0.5 / sigma2 * (ss - upsilon2 * sum * sum / total_var);
  };
}

SegmentMarginal flat_marginal() {
  return [](std::size_t, std::size_t) { return 0.0; };
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("tv_distance: support mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace dphmm
