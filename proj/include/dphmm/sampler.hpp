#ifndef DPHMM_SAMPLER_HPP
#define DPHMM_SAMPLER_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dphmm/gibbs.hpp"
#include "dphmm/obs_models.hpp"
#include "dphmm/special_math.hpp"
#include "dphmm/state.hpp"

namespace dphmm {

enum class HyperMode { kFixed, kMap, kMh };

std::string to_string(HyperMode mode);
std::string to_string(SweepRule rule);

struct SamplerConfig {
  std::size_t sweeps = 5000;  // after burn-in
  std::size_t burn_in = 1000;
  std::size_t thin = 50;  // keep every thin-th post-burn-in sweep
  std::size_t init_regimes = 10;
  HyperMode hyper_mode = HyperMode::kMh;
  // Fixed values for kFixed; starting values otherwise.
  double alpha = 1.0;
  double beta = 1.0;
  double prior_a_alpha = 1.0;
  double prior_b_alpha = 1.0;
  double prior_a_beta = 1.0;
  double prior_b_beta = 1.0;
  SweepRule rule = SweepRule::kPaper;
  // Keep shared parameters (mu, upsilon2, ...) at their initial values.
  bool fix_shared = false;
  std::uint64_t seed = 1;
  std::uint64_t stream_id = 0;

  void validate() const;
  DphmmHyper hyper() const;
};

// Paper defaults: simulation studies burn in 5000 sweeps, applications 1000.
SamplerConfig simulation_defaults();
SamplerConfig application_defaults();

struct Draw {
  StateSequence states;
  std::vector<std::vector<double>> regime_params;  // [regime][param]
  std::vector<double> shared_params;
  double alpha;
  double beta;
};

struct ChainOutput {
  std::vector<std::string> regime_param_names;
  std::vector<std::string> shared_param_names;
  std::vector<Draw> draws;
  std::size_t n = 0;
  std::size_t total_sweeps = 0;
  std::size_t mh_alpha_accepted = 0;
  std::size_t mh_beta_accepted = 0;
  std::size_t mh_proposals = 0;
  std::size_t map_nonconverged = 0;
  std::size_t sites_drawn = 0;
  double seconds = 0.0;
  // Change-point count after the final sweep.
  std::size_t final_k = 0;
};

/// Runs burn-in plus `sweeps` Gibbs sweeps. Each sweep draws the states,
/// then the regime and shared parameters, then (alpha, beta). Deterministic
/// given the model, config and stream.
ChainOutput run_chain(ObservationModel& model, const SamplerConfig& config, RngStream& rng);
ChainOutput run_chain(ObservationModel& model, const SamplerConfig& config);

struct ParamSummary {
  std::string name;
  std::size_t regime = 0;  // 1-based; 0 for shared and hyper parameters
  double mean = 0.0;
  double sd = 0.0;
  double lag1_autocorr = 0.0;  // NaN when the draws are constant
  std::size_t count = 0;
};

struct PosteriorSummary {
  std::size_t n = 0;
  std::size_t draws = 0;
  // state_prob[t][i] = P(s_{t+1} = i+1).
  std::vector<std::vector<double>> state_prob;
  // k_distribution[k] = P(k change points).
  std::vector<double> k_distribution;
  std::size_t modal_k = 0;
  std::size_t modal_k_draws = 0;
  // cp_pmf[i][t] = P(tau_{i+1} = t+1) among draws with the modal k.
  std::vector<std::vector<double>> cp_pmf;
  // Regime parameters are summarized over modal-k draws, the rest over all.
  std::vector<ParamSummary> params;

  const ParamSummary* find(const std::string& name, std::size_t regime = 0) const;
  // 1-based location with the largest mass for change point `ordinal` (1-based).
  std::size_t cp_mode(std::size_t ordinal) const;
};

PosteriorSummary summarize(const ChainOutput& out);

// Mean, SD (divisor m-1) and lag-one autocorrelation of a draw sequence.
ParamSummary summarize_series(std::string name, std::size_t regime, std::span<const double> x);

// ---------------------------------------------------------------------------
// Simulation

struct SimSpec {
  ModelKind kind = ModelKind::kNormalKnown;
  std::size_t n = 150;
  std::vector<std::size_t> change_points;  // 1-based last index of each regime
  // Per regime: {theta} normal, {lambda} poisson, {b0, b1, b2, sigma2} ar2.
  std::vector<std::vector<double>> regime_values;
  double sigma2 = 3.0;  // normal noise variance

  void validate() const;
};

SimSpec normal_model1();  // theta (1, 3), sigma2 3, tau 50, n 150
SimSpec normal_model2();  // theta (1, 3, 5), sigma2 3, tau (50, 100), n 150

std::vector<double> simulate(const SimSpec& spec, RngStream& rng);

// ---------------------------------------------------------------------------
// Replication

struct ReplicationPlan {
  ModelKind kind = ModelKind::kNormalKnown;
  ModelSettings settings;
  SamplerConfig config;
  std::optional<SimSpec> sim;        // fresh data per replication when set
  std::vector<double> data;          // used when sim is empty
  std::size_t replications = 1;
  std::size_t parallelism = 1;
};

struct ReplicationRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::size_t k = 0;
  bool failed = false;
  std::string error;
};

struct ReplicationResult {
  std::vector<ReplicationRecord> records;  // ordered by index
  std::map<std::size_t, std::size_t> k_counts;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  double seconds = 0.0;

  double frequency(std::size_t k) const;
};

/// Replication r runs on stream (config.seed, r): simulate (when requested)
/// then sample, recording k of the final retained draw.
ReplicationResult replicate(const ReplicationPlan& plan);

}  // namespace dphmm

#endif  // DPHMM_SAMPLER_HPP
