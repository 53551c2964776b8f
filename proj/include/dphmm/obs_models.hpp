#ifndef DPHMM_OBS_MODELS_HPP
#define DPHMM_OBS_MODELS_HPP

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dphmm/gibbs.hpp"
#include "dphmm/special_math.hpp"
#include "dphmm/state.hpp"

namespace dphmm {

enum class ModelKind { kNormalKnown, kNormalUnknown, kPoisson, kAr2 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Observation model plug-in: per-time likelihood under a parameter slot plus
/// the conjugate full-conditional draws of the regime and shared parameters.
///
/// The model owns a copy of the data and a table of per-regime parameter
/// slots. After construction and after every sweep, slot i holds regime i+1.
class ObservationModel : public SlotLikelihood {
 public:
  ~ObservationModel() override = default;

  virtual std::unique_ptr<ObservationModel> clone() const = 0;
  virtual ModelKind kind() const = 0;

  std::span<const double> data() const { return data_; }
  std::size_t size() const { return data_.size(); }

  // Sites that the state sampler must keep in regime 1.
  virtual std::size_t pinned_prefix() const { return 0; }
  // Whether new_slot_from_prior() is available (needs a proper regime prior).
  virtual bool has_proper_regime_prior() const { return true; }

  // Starting values for shared parameters and one slot per regime of `s`.
  virtual void initialize(const StateSequence& s, RngStream& rng) = 0;
  virtual void draw_regime_params(const StateSequence& s, RngStream& rng) = 0;
  virtual void draw_shared_params(const StateSequence& s, RngStream& rng) = 0;

  // Reorders the slot table so that slot i backs regime i+1; drops the rest.
  virtual void compact(std::span<const std::size_t> regime_slots) = 0;

  // Parameter names and values for recording; one row per regime.
  virtual std::vector<std::string> regime_param_names() const = 0;
  virtual std::vector<std::vector<double>> regime_params() const = 0;
  virtual std::vector<std::string> shared_param_names() const = 0;
  virtual std::vector<double> shared_params() const = 0;

 protected:
  explicit ObservationModel(std::vector<double> data) : data_(std::move(data)) {}
  ObservationModel(const ObservationModel&) = default;

  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Normal mean shift: y_t ~ N(theta_i, sigma2), theta_i ~ N(mu, upsilon2),
// flat prior on mu, upsilon2 ~ InvGamma(a, b); with unknown variance also
// sigma2 ~ InvGamma(c, d).

struct NormalPrior {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double d = 1.0;
};

struct NormalShared {
  double mu = 0.0;
  double upsilon2 = 1.0;
  double sigma2 = 1.0;
};

double normal_log_likelihood(double y, double theta, double sigma2);

/// Full conditional of one regime mean: N(mean, variance).
struct NormalPosterior {
  double mean;
  double variance;
};
NormalPosterior normal_regime_conditional(double segment_mean, std::size_t duration, double mu,
                                          double upsilon2, double sigma2);

class NormalMeanShiftModel final : public ObservationModel {
 public:
  // `known_sigma2` set -> known-variance model; otherwise sigma2 is sampled.
  NormalMeanShiftModel(std::vector<double> data, std::optional<double> known_sigma2,
                       NormalPrior prior = {});

  std::unique_ptr<ObservationModel> clone() const override;
  ModelKind kind() const override;

  double log_likelihood(std::size_t t, std::size_t slot) const override;
  std::size_t new_slot_from_prior(RngStream& rng) override;

  void initialize(const StateSequence& s, RngStream& rng) override;
  void draw_regime_params(const StateSequence& s, RngStream& rng) override;
  void draw_shared_params(const StateSequence& s, RngStream& rng) override;
  void compact(std::span<const std::size_t> regime_slots) override;

  std::vector<std::string> regime_param_names() const override;
  std::vector<std::vector<double>> regime_params() const override;
  std::vector<std::string> shared_param_names() const override;
  std::vector<double> shared_params() const override;

  bool variance_known() const { return known_; }
  const NormalPrior& prior() const { return prior_; }
  const NormalShared& shared() const { return shared_; }
  void set_shared(const NormalShared& shared);
  // Starting values used by initialize() in place of the data moments.
  void preset_shared(const NormalShared& shared);
  const std::vector<double>& thetas() const { return theta_; }
  void set_thetas(std::vector<double> theta) { theta_ = std::move(theta); }

 private:
  bool known_;
  NormalPrior prior_;
  NormalShared shared_;
  std::optional<NormalShared> preset_;
  std::vector<double> theta_;
};

// ---------------------------------------------------------------------------
// Poisson counts: y_t ~ Poisson(lambda_i), lambda_i ~ Gamma(shape, rate).

struct GammaPrior {
  double shape = 2.0;
  double rate = 1.0;
};

double poisson_log_likelihood(double y, double lambda);

/// Gamma(shape, rate) full conditional of lambda_i given U_i and N_i.
GammaPrior poisson_regime_conditional(const GammaPrior& prior, double sum_counts,
                                      std::size_t duration);

class PoissonCountModel final : public ObservationModel {
 public:
  PoissonCountModel(std::vector<double> data, GammaPrior prior = {});

  std::unique_ptr<ObservationModel> clone() const override;
  ModelKind kind() const override { return ModelKind::kPoisson; }

  double log_likelihood(std::size_t t, std::size_t slot) const override;
  std::size_t new_slot_from_prior(RngStream& rng) override;

  void initialize(const StateSequence& s, RngStream& rng) override;
  void draw_regime_params(const StateSequence& s, RngStream& rng) override;
  void draw_shared_params(const StateSequence&, RngStream&) override {}
  void compact(std::span<const std::size_t> regime_slots) override;

  std::vector<std::string> regime_param_names() const override { return {"lambda"}; }
  std::vector<std::vector<double>> regime_params() const override;
  std::vector<std::string> shared_param_names() const override { return {}; }
  std::vector<double> shared_params() const override { return {}; }

  const GammaPrior& prior() const { return prior_; }
  const std::vector<double>& lambdas() const { return lambda_; }
  void set_lambdas(std::vector<double> lambda) { lambda_ = std::move(lambda); }

 private:
  GammaPrior prior_;
  std::vector<double> log_factorial_;
  std::vector<double> lambda_;
};

// ---------------------------------------------------------------------------
// AR(2) with regime-specific coefficients and variances:
// y_t = b0 + b1 y_{t-1} + b2 y_{t-2} + e_t, e_t ~ N(0, sigma2_i),
// beta_i ~ N(mu, diag(v2)), flat mu_j, v2_j ~ InvGamma(a, b), p(sigma2_i) ~ 1/sigma2_i.
// The first two observations are conditioned on; the likelihood runs from
// the third.

struct Ar2Regime {
  std::array<double, 3> beta{};
  double sigma2 = 1.0;
};

struct Ar2Shared {
  std::array<double, 3> mu{};
  std::array<double, 3> v2{1.0, 1.0, 1.0};
};

struct Ar2Prior {
  double a = 1.0;
  double b = 1.0;
};

// Scale floor for the residual sum of squares in the variance draw.
inline constexpr double kAr2ScaleFloor = 1e-12;

double ar2_log_likelihood(double y, double y_lag1, double y_lag2, const Ar2Regime& regime);

/// Sufficient statistics of one regime's regression rows (t >= 3).
struct Ar2SegmentStats {
  std::array<std::array<double, 3>, 3> xtx{};
  std::array<double, 3> xty{};
  std::size_t rows = 0;
};
Ar2SegmentStats ar2_segment_stats(std::span<const double> y, Segment seg);

/// Conjugate normal update for beta_i: mean and covariance of
/// N((X'X/s2 + V^-1)^-1 (X'y/s2 + V^-1 mu), (X'X/s2 + V^-1)^-1).
struct Ar2BetaPosterior {
  std::array<double, 3> mean;
  std::array<std::array<double, 3>, 3> cov;
};
Ar2BetaPosterior ar2_beta_conditional(const Ar2SegmentStats& stats, double sigma2,
                                      const Ar2Shared& shared);

/// Scaled inverse chi-square parameters (nu, s2) of sigma2_i given the
/// segment residual sum of squares, with s2 floored at kAr2ScaleFloor.
struct ScaledInvChiSqParams {
  double nu;
  double s2;
};
ScaledInvChiSqParams ar2_sigma2_conditional(std::size_t rows, double residual_ss);

class Ar2Model final : public ObservationModel {
 public:
  Ar2Model(std::vector<double> data, Ar2Prior prior = {});

  std::unique_ptr<ObservationModel> clone() const override;
  ModelKind kind() const override { return ModelKind::kAr2; }

  // Sites 1..3 stay in regime 1 so that its regression has at least one row.
  std::size_t pinned_prefix() const override { return 3; }
  bool has_proper_regime_prior() const override { return false; }

  double log_likelihood(std::size_t t, std::size_t slot) const override;
  std::size_t new_slot_from_prior(RngStream& rng) override;

  void initialize(const StateSequence& s, RngStream& rng) override;
  void draw_regime_params(const StateSequence& s, RngStream& rng) override;
  void draw_shared_params(const StateSequence& s, RngStream& rng) override;
  void compact(std::span<const std::size_t> regime_slots) override;

  std::vector<std::string> regime_param_names() const override;
  std::vector<std::vector<double>> regime_params() const override;
  std::vector<std::string> shared_param_names() const override;
  std::vector<double> shared_params() const override;

  const Ar2Shared& shared() const { return shared_; }
  void set_shared(const Ar2Shared& shared) { shared_ = shared; }
  const std::vector<Ar2Regime>& regimes() const { return regimes_; }
  void set_regimes(std::vector<Ar2Regime> regimes) { regimes_ = std::move(regimes); }

  // Step-2 pieces, exposed for testing.
  void draw_betas(const StateSequence& s, RngStream& rng);
  void draw_sigma2s(const StateSequence& s, RngStream& rng);

 private:
  Ar2Prior prior_;
  Ar2Shared shared_;
  std::vector<Ar2Regime> regimes_;
};

/// Model construction from a kind plus per-model settings.
struct ModelSettings {
  double known_sigma2 = 3.0;  // normal-known
  NormalPrior normal;
  // Normal models only: start (mu, upsilon2[, sigma2]) here instead of at the
  // data moments. With fix_shared these values hold for the whole chain.
  std::optional<NormalShared> normal_start;
  GammaPrior poisson;
  Ar2Prior ar2;
};

// Throws DataError when `data` is incompatible with `kind`.
void validate_data(ModelKind kind, std::span<const double> data);

std::unique_ptr<ObservationModel> make_model(ModelKind kind, std::vector<double> data,
                                             const ModelSettings& settings = {});

}  // namespace dphmm

#endif  // DPHMM_OBS_MODELS_HPP
