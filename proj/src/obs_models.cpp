#include "dphmm/obs_models.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dphmm/error.hpp"

namespace dphmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double mean_of(std::span<const double> y) {
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double variance_of(std::span<const double> y) {
  if (y.size() < 2) return 0.0;
  const double m = mean_of(y);
  double ss = 0.0;
  for (double v : y) ss += (v - m) * (v - m);
  return ss / static_cast<double>(y.size() - 1);
}

template <typename T>
std::vector<T> reorder(const std::vector<T>& table, std::span<const std::size_t> regime_slots) {
  std::vector<T> out;
  out.reserve(regime_slots.size());
  for (std::size_t slot : regime_slots) {
    if (slot >= table.size()) throw ContractViolation("compact: slot index out of range");
    out.push_back(table[slot]);
  }
  return out;
}

void check_regime_count(const StateSequence& s, std::size_t slots, const char* who) {
  if (s.num_regimes() > slots) {
    throw ContractViolation(std::string(who) + ": fewer parameter slots than regimes");
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kNormalKnown:
      return "normal-known";
    case ModelKind::kNormalUnknown:
      return "normal-unknown";
    case ModelKind::kPoisson:
      return "poisson";
    case ModelKind::kAr2:
      return "ar2";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "normal-known") return ModelKind::kNormalKnown;
  if (name == "normal-unknown") return ModelKind::kNormalUnknown;
  if (name == "poisson") return ModelKind::kPoisson;
  if (name == "ar2") return ModelKind::kAr2;
  throw std::invalid_argument("unknown model '" + name +
                              "' (expected normal-known, normal-unknown, poisson or ar2)");
}

// ---------------------------------------------------------------------------
// Normal

double normal_log_likelihood(double y, double theta, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("normal_log_likelihood: sigma2 must be positive");
  const double r = y - theta;
  return -0.5 * (kLog2Pi + std::log(sigma2)) - 0.5 * r * r / sigma2;
}

NormalPosterior normal_regime_conditional(double segment_mean, std::size_t duration, double mu,
                                          double upsilon2, double sigma2) {
  if (duration == 0) throw ContractViolation("normal_regime_conditional: empty segment");
  const double seg_var = sigma2 / static_cast<double>(duration);
  const double precision = 1.0 / seg_var + 1.0 / upsilon2;
  return {(segment_mean / seg_var + mu / upsilon2) / precision, 1.0 / precision};
}

NormalMeanShiftModel::NormalMeanShiftModel(std::vector<double> data,
                                           std::optional<double> known_sigma2, NormalPrior prior)
    : ObservationModel(std::move(data)), known_(known_sigma2.has_value()), prior_(prior) {
  validate_data(known_ ? ModelKind::kNormalKnown : ModelKind::kNormalUnknown, data_);
  if (!(prior_.a > 0 && prior_.b > 0 && prior_.c > 0 && prior_.d > 0)) {
    throw DomainError("normal model: prior a, b, c, d must be positive");
  }
  if (known_) {
    if (!(*known_sigma2 > 0.0)) throw DomainError("normal model: known sigma2 must be positive");
    shared_.sigma2 = *known_sigma2;
  }
}

std::unique_ptr<ObservationModel> NormalMeanShiftModel::clone() const {
  return std::make_unique<NormalMeanShiftModel>(*this);
}

ModelKind NormalMeanShiftModel::kind() const {
  return known_ ? ModelKind::kNormalKnown : ModelKind::kNormalUnknown;
}

void NormalMeanShiftModel::set_shared(const NormalShared& shared) {
  if (!(shared.upsilon2 > 0.0) || !(shared.sigma2 > 0.0)) {
    throw DomainError("normal model: variances must be positive");
  }
  shared_ = shared;
}

double NormalMeanShiftModel::log_likelihood(std::size_t t, std::size_t slot) const {
  return normal_log_likelihood(data_[t], theta_[slot], shared_.sigma2);
}

std::size_t NormalMeanShiftModel::new_slot_from_prior(RngStream& rng) {
  theta_.push_back(draw_normal(shared_.mu, shared_.upsilon2, rng));
  return theta_.size() - 1;
}

void NormalMeanShiftModel::preset_shared(const NormalShared& shared) {
  if (!(shared.upsilon2 > 0.0) || !(shared.sigma2 > 0.0)) {
    throw DomainError("normal model: variances must be positive");
  }
  preset_ = shared;
}

void NormalMeanShiftModel::initialize(const StateSequence& s, RngStream& rng) {
  if (preset_) {
    const double known_sigma2 = shared_.sigma2;
    shared_ = *preset_;
    if (known_) shared_.sigma2 = known_sigma2;
  } else {
    shared_.mu = mean_of(data_);
    const double v = variance_of(data_);
    shared_.upsilon2 = v > 0.0 ? v : 1.0;
    if (!known_) shared_.sigma2 = v > 0.0 ? v : 1.0;
  }
  theta_.assign(s.num_regimes(), shared_.mu);
  draw_regime_params(s, rng);
}

void NormalMeanShiftModel::draw_regime_params(const StateSequence& s, RngStream& rng) {
  check_regime_count(s, theta_.size(), "normal model");
  const auto segs = segments(s);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto seg = std::span<const double>(data_).subspan(segs[i].begin, segs[i].length());
    const auto post =
        normal_regime_conditional(mean_of(seg), seg.size(), shared_.mu, shared_.upsilon2,
                                  shared_.sigma2);
    theta_[i] = draw_normal(post.mean, post.variance, rng);
  }
}

void NormalMeanShiftModel::draw_shared_params(const StateSequence& s, RngStream& rng) {
  const std::size_t k1 = s.num_regimes();
  check_regime_count(s, theta_.size(), "normal model");
  double theta_bar = 0.0;
  for (std::size_t i = 0; i < k1; ++i) theta_bar += theta_[i];
  theta_bar /= static_cast<double>(k1);
  shared_.mu = draw_normal(theta_bar, shared_.upsilon2 / static_cast<double>(k1), rng);

  double ss = 0.0;
  for (std::size_t i = 0; i < k1; ++i) ss += (theta_[i] - shared_.mu) * (theta_[i] - shared_.mu);
  shared_.upsilon2 =
      draw_inverse_gamma(prior_.a + 0.5 * static_cast<double>(k1), prior_.b + 0.5 * ss, rng);

  if (!known_) {
    double rss = 0.0;
    for (std::size_t t = 0; t < data_.size(); ++t) {
      const double r = data_[t] - theta_[static_cast<std::size_t>(s[t] - 1)];
      rss += r * r;
    }
    shared_.sigma2 = draw_inverse_gamma(prior_.c + 0.5 * static_cast<double>(data_.size()),
                                        prior_.d + 0.5 * rss, rng);
  }
}

void NormalMeanShiftModel::compact(std::span<const std::size_t> regime_slots) {
  theta_ = reorder(theta_, regime_slots);
}

std::vector<std::string> NormalMeanShiftModel::regime_param_names() const { return {"theta"}; }

std::vector<std::vector<double>> NormalMeanShiftModel::regime_params() const {
  std::vector<std::vector<double>> out;
  for (double th : theta_) out.push_back({th});
  return out;
}

std::vector<std::string> NormalMeanShiftModel::shared_param_names() const {
  if (known_) return {"mu", "upsilon2"};
  return {"mu", "upsilon2", "sigma2"};
}

std::vector<double> NormalMeanShiftModel::shared_params() const {
  if (known_) return {shared_.mu, shared_.upsilon2};
  return {shared_.mu, shared_.upsilon2, shared_.sigma2};
}

// ---------------------------------------------------------------------------
// Poisson

double poisson_log_likelihood(double y, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("poisson_log_likelihood: lambda must be positive");
  return y * std::log(lambda) - lambda - ln_gamma(y + 1.0);
}

GammaPrior poisson_regime_conditional(const GammaPrior& prior, double sum_counts,
                                      std::size_t duration) {
  if (duration == 0) throw ContractViolation("poisson_regime_conditional: empty regime");
  return {prior.shape + sum_counts, prior.rate + static_cast<double>(duration)};
}

PoissonCountModel::PoissonCountModel(std::vector<double> data, GammaPrior prior)
    : ObservationModel(std::move(data)), prior_(prior) {
  validate_data(ModelKind::kPoisson, data_);
  if (!(prior_.shape > 0.0 && prior_.rate > 0.0)) {
    throw DomainError("poisson model: prior shape and rate must be positive");
  }
  log_factorial_.reserve(data_.size());
  for (double y : data_) log_factorial_.push_back(ln_gamma(y + 1.0));
}

std::unique_ptr<ObservationModel> PoissonCountModel::clone() const {
  return std::make_unique<PoissonCountModel>(*this);
}

double PoissonCountModel::log_likelihood(std::size_t t, std::size_t slot) const {
  const double lambda = lambda_[slot];
  return data_[t] * std::log(lambda) - lambda - log_factorial_[t];
}

std::size_t PoissonCountModel::new_slot_from_prior(RngStream& rng) {
  lambda_.push_back(draw_gamma(prior_.shape, prior_.rate, rng));
  return lambda_.size() - 1;
}

void PoissonCountModel::initialize(const StateSequence& s, RngStream& rng) {
  lambda_.assign(s.num_regimes(), 1.0);
  draw_regime_params(s, rng);
}

void PoissonCountModel::draw_regime_params(const StateSequence& s, RngStream& rng) {
  check_regime_count(s, lambda_.size(), "poisson model");
  const auto segs = segments(s);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    double u = 0.0;
    for (std::size_t t = segs[i].begin; t < segs[i].end; ++t) u += data_[t];
    const auto post = poisson_regime_conditional(prior_, u, segs[i].length());
    lambda_[i] = draw_gamma(post.shape, post.rate, rng);
  }
}

void PoissonCountModel::compact(std::span<const std::size_t> regime_slots) {
  lambda_ = reorder(lambda_, regime_slots);
}

std::vector<std::vector<double>> PoissonCountModel::regime_params() const {
  std::vector<std::vector<double>> out;
  for (double l : lambda_) out.push_back({l});
  return out;
}

// ---------------------------------------------------------------------------
// AR(2)

double ar2_log_likelihood(double y, double y_lag1, double y_lag2, const Ar2Regime& regime) {
  if (!(regime.sigma2 > 0.0)) throw DomainError("ar2_log_likelihood: sigma2 must be positive");
  const double r = y - regime.beta[0] - regime.beta[1] * y_lag1 - regime.beta[2] * y_lag2;
  return -0.5 * (kLog2Pi + std::log(regime.sigma2)) - 0.5 * r * r / regime.sigma2;
}

Ar2SegmentStats ar2_segment_stats(std::span<const double> y, Segment seg) {
  Ar2SegmentStats st;
  for (std::size_t t = std::max<std::size_t>(seg.begin, 2); t < seg.end; ++t) {
    const std::array<double, 3> x = {1.0, y[t - 1], y[t - 2]};
    for (int i = 0; i < 3; ++i) {
      st.xty[i] += x[i] * y[t];
      for (int j = 0; j < 3; ++j) st.xtx[i][j] += x[i] * x[j];
    }
    ++st.rows;
  }
  return st;
}

Ar2BetaPosterior ar2_beta_conditional(const Ar2SegmentStats& stats, double sigma2,
                                      const Ar2Shared& shared) {
  Eigen::Matrix3d precision;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) precision(i, j) = stats.xtx[i][j] / sigma2;
    precision(i, i) += 1.0 / shared.v2[i];
    rhs(i) = stats.xty[i] / sigma2 + shared.mu[i] / shared.v2[i];
  }
  const Eigen::LLT<Eigen::Matrix3d> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("ar2: posterior precision of beta is not positive definite");
  }
  const Eigen::Vector3d mean = llt.solve(rhs);
  const Eigen::Matrix3d cov = llt.solve(Eigen::Matrix3d::Identity());
  Ar2BetaPosterior out{};
  for (int i = 0; i < 3; ++i) {
    out.mean[i] = mean(i);
    for (int j = 0; j < 3; ++j) out.cov[i][j] = cov(i, j);
  }
  return out;
}

ScaledInvChiSqParams ar2_sigma2_conditional(std::size_t rows, double residual_ss) {
  if (rows == 0) throw ContractViolation("ar2_sigma2_conditional: regime without regression rows");
  const double nu = static_cast<double>(rows);
  return {nu, std::max(residual_ss / nu, kAr2ScaleFloor)};
}

Ar2Model::Ar2Model(std::vector<double> data, Ar2Prior prior)
    : ObservationModel(std::move(data)), prior_(prior) {
  validate_data(ModelKind::kAr2, data_);
  if (!(prior_.a > 0.0 && prior_.b > 0.0)) throw DomainError("ar2 model: a and b must be positive");
}

std::unique_ptr<ObservationModel> Ar2Model::clone() const {
  return std::make_unique<Ar2Model>(*this);
}

double Ar2Model::log_likelihood(std::size_t t, std::size_t slot) const {
  if (t < 2) return 0.0;
  return ar2_log_likelihood(data_[t], data_[t - 1], data_[t - 2], regimes_[slot]);
}

std::size_t Ar2Model::new_slot_from_prior(RngStream&) {
  throw ContractViolation(
      "ar2 model: the regime variance prior is improper; exact sweeps are unavailable");
}

void Ar2Model::initialize(const StateSequence& s, RngStream& rng) {
  const auto whole = ar2_segment_stats(data_, {0, data_.size()});
  Eigen::Matrix3d xtx;
  Eigen::Vector3d xty;
  for (int i = 0; i < 3; ++i) {
    xty(i) = whole.xty[i];
    for (int j = 0; j < 3; ++j) xtx(i, j) = whole.xtx[i][j];
  }
  const Eigen::Vector3d ols = xtx.ldlt().solve(xty);
  double rss = 0.0;
  for (std::size_t t = 2; t < data_.size(); ++t) {
    const double r = data_[t] - ols(0) - ols(1) * data_[t - 1] - ols(2) * data_[t - 2];
    rss += r * r;
  }
  Ar2Regime start;
  for (int i = 0; i < 3; ++i) {
    start.beta[i] = std::isfinite(ols(i)) ? ols(i) : 0.0;
    shared_.mu[i] = start.beta[i];
    shared_.v2[i] = 1.0;
  }
  start.sigma2 = std::max(rss / static_cast<double>(whole.rows), kAr2ScaleFloor);
  regimes_.assign(s.num_regimes(), start);
  draw_regime_params(s, rng);
}

void Ar2Model::draw_betas(const StateSequence& s, RngStream& rng) {
  check_regime_count(s, regimes_.size(), "ar2 model");
  const auto segs = segments(s);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto stats = ar2_segment_stats(data_, segs[i]);
    Ar2BetaPosterior post{};
    try {
      post = ar2_beta_conditional(stats, regimes_[i].sigma2, shared_);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (regime " + std::to_string(i + 1) + ")");
    }
    Eigen::Matrix3d cov;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cov(r, c) = post.cov[r][c];
    const Eigen::LLT<Eigen::Matrix3d> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("ar2: beta covariance not positive definite (regime " +
                           std::to_string(i + 1) + ")");
    }
    const Eigen::Vector3d z(draw_normal(0.0, 1.0, rng), draw_normal(0.0, 1.0, rng),
                            draw_normal(0.0, 1.0, rng));
    const Eigen::Vector3d draw = llt.matrixL() * z;
    for (int j = 0; j < 3; ++j) regimes_[i].beta[j] = post.mean[j] + draw(j);
  }
}

void Ar2Model::draw_sigma2s(const StateSequence& s, RngStream& rng) {
  check_regime_count(s, regimes_.size(), "ar2 model");
  const auto segs = segments(s);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    double rss = 0.0;
    std::size_t rows = 0;
    const auto& b = regimes_[i].beta;
    for (std::size_t t = std::max<std::size_t>(segs[i].begin, 2); t < segs[i].end; ++t) {
      const double r = data_[t] - b[0] - b[1] * data_[t - 1] - b[2] * data_[t - 2];
      rss += r * r;
      ++rows;
    }
    const auto p = ar2_sigma2_conditional(rows, rss);
    regimes_[i].sigma2 = draw_scaled_inv_chi_sq(p.nu, p.s2, rng);
  }
}

void Ar2Model::draw_regime_params(const StateSequence& s, RngStream& rng) {
  draw_betas(s, rng);
  draw_sigma2s(s, rng);
}

void Ar2Model::draw_shared_params(const StateSequence& s, RngStream& rng) {
  const std::size_t k1 = s.num_regimes();
  check_regime_count(s, regimes_.size(), "ar2 model");
  for (int j = 0; j < 3; ++j) {
    double bar = 0.0;
    for (std::size_t i = 0; i < k1; ++i) bar += regimes_[i].beta[j];
    bar /= static_cast<double>(k1);
    shared_.mu[j] = draw_normal(bar, shared_.v2[j] / static_cast<double>(k1), rng);
    double ss = 0.0;
    for (std::size_t i = 0; i < k1; ++i) {
      const double d = regimes_[i].beta[j] - shared_.mu[j];
      ss += d * d;
    }
    shared_.v2[j] =
        draw_inverse_gamma(prior_.a + 0.5 * static_cast<double>(k1), prior_.b + 0.5 * ss, rng);
  }
}

void Ar2Model::compact(std::span<const std::size_t> regime_slots) {
  regimes_ = reorder(regimes_, regime_slots);
}

std::vector<std::string> Ar2Model::regime_param_names() const {
  return {"beta0", "beta1", "beta2", "sigma2"};
}

std::vector<std::vector<double>> Ar2Model::regime_params() const {
  std::vector<std::vector<double>> out;
  for (const auto& r : regimes_) out.push_back({r.beta[0], r.beta[1], r.beta[2], r.sigma2});
  return out;
}

std::vector<std::string> Ar2Model::shared_param_names() const {
  return {"mu0", "mu1", "mu2", "v2_0", "v2_1", "v2_2"};
}

std::vector<double> Ar2Model::shared_params() const {
  return {shared_.mu[0], shared_.mu[1], shared_.mu[2],
          shared_.v2[0], shared_.v2[1], shared_.v2[2]};
}

// ---------------------------------------------------------------------------

void validate_data(ModelKind kind, std::span<const double> data) {
  const std::size_t min_len = kind == ModelKind::kAr2 ? 4 : 2;
  if (data.size() < min_len) {
    throw DataError("data has " + std::to_string(data.size()) + " values; " + to_string(kind) +
                    " needs at least " + std::to_string(min_len));
  }
  for (std::size_t t = 0; t < data.size(); ++t) {
    const double y = data[t];
    if (!std::isfinite(y)) {
      throw DataError("non-finite value at row " + std::to_string(t + 1));
    }
    if (kind == ModelKind::kPoisson && (y < 0.0 || std::floor(y) != y)) {
      throw DataError("poisson data must be nonnegative integers; row " + std::to_string(t + 1) +
                      " holds " + std::to_string(y));
    }
  }
}

std::unique_ptr<ObservationModel> make_model(ModelKind kind, std::vector<double> data,
                                             const ModelSettings& settings) {
  switch (kind) {
    case ModelKind::kNormalKnown:
    case ModelKind::kNormalUnknown: {
      std::optional<double> known;
      if (kind == ModelKind::kNormalKnown) known = settings.known_sigma2;
      auto m = std::make_unique<NormalMeanShiftModel>(std::move(data), known, settings.normal);
      if (settings.normal_start) m->preset_shared(*settings.normal_start);
      return m;
    }
    case ModelKind::kPoisson:
      return std::make_unique<PoissonCountModel>(std::move(data), settings.poisson);
    case ModelKind::kAr2:
      return std::make_unique<Ar2Model>(std::move(data), settings.ar2);
  }
  throw std::invalid_argument("make_model: unknown kind");
}

}  // namespace dphmm
