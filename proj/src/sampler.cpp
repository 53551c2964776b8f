#include "dphmm/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/random/poisson_distribution.hpp>

#include "dphmm/error.hpp"
#include "dphmm/hyper_learn.hpp"

namespace dphmm {

std::string to_string(HyperMode mode) {
  switch (mode) {
    case HyperMode::kFixed: return "fixed";
    case HyperMode::kMap: return "map";
    case HyperMode::kMh: return "mh";
  }
  return "?";
}

std::string to_string(SweepRule rule) {
  return rule == SweepRule::kPaper ? "paper" : "exact";
}

void SamplerConfig::validate() const {
  if (sweeps == 0) throw ContractViolation("sampler config: sweeps must be positive");
  if (thin == 0) throw ContractViolation("sampler config: thin must be positive");
  if (thin > sweeps) throw ContractViolation("sampler config: thin exceeds sweeps");
  if (init_regimes == 0) throw ContractViolation("sampler config: init_regimes must be positive");
  hyper().validate();
}

DphmmHyper SamplerConfig::hyper() const {
  DphmmHyper h;
  h.alpha = alpha;
  h.beta = beta;
  h.prior_a_alpha = prior_a_alpha;
  h.prior_b_alpha = prior_b_alpha;
  h.prior_a_beta = prior_a_beta;
  h.prior_b_beta = prior_b_beta;
  return h;
}

SamplerConfig simulation_defaults() {
  SamplerConfig c;
  c.burn_in = 5000;
  return c;
}

SamplerConfig application_defaults() {
  SamplerConfig c;
  c.burn_in = 1000;
  return c;
}

ChainOutput run_chain(ObservationModel& model, const SamplerConfig& config) {
  RngStream rng(config.seed, config.stream_id);
  return run_chain(model, config, rng);
}

ChainOutput run_chain(ObservationModel& model, const SamplerConfig& config, RngStream& rng) {
  config.validate();
  const std::size_t n = model.size();
  if (n < 2) throw DataError("run_chain: need at least 2 observations");
  if (config.rule == SweepRule::kExact && !model.has_proper_regime_prior()) {
    throw ContractViolation("run_chain: the exact sweep rule needs a proper regime prior; model " +
                            to_string(model.kind()) + " has none");
  }
  if (config.init_regimes > n) {
    throw ContractViolation("run_chain: init_regimes exceeds the series length");
  }

  const auto start = std::chrono::steady_clock::now();
  StateSequence states = init_equidistant(n, config.init_regimes);
  const std::size_t pinned = model.pinned_prefix();
  if (pinned > 0 && segments(states).front().length() < pinned) {
    throw ContractViolation("run_chain: the first initial regime must cover the first " +
                            std::to_string(pinned) + " observations; lower init_regimes");
  }
  model.initialize(states, rng);

  DphmmHyper hyper = config.hyper();
  ChainOutput out;
  out.n = n;
  out.regime_param_names = model.regime_param_names();
  out.shared_param_names = model.shared_param_names();
  out.total_sweeps = config.burn_in + config.sweeps;
  out.draws.reserve(config.sweeps / config.thin);

  const SweepOptions options{config.rule, pinned};
  for (std::size_t sweep = 1; sweep <= out.total_sweeps; ++sweep) {
    SweepResult r = gibbs_sweep(states, model, hyper, rng, options);
    out.sites_drawn += r.sites_drawn;
    model.compact(r.regime_slots);
    states = std::move(r.states);

    model.draw_regime_params(states, rng);
    if (!config.fix_shared) model.draw_shared_params(states, rng);

    if (config.hyper_mode != HyperMode::kFixed) {
      const auto ctx = HyperPosteriorContext::from_states(states, hyper);
      if (config.hyper_mode == HyperMode::kMap) {
        const MapResult m = map_update(ctx, hyper.alpha, hyper.beta);
        if (!m.converged) ++out.map_nonconverged;
        hyper.alpha = m.alpha;
        hyper.beta = m.beta;
      } else {
        const MhResult m = mh_update(hyper.alpha, hyper.beta, ctx, rng);
        ++out.mh_proposals;
        out.mh_alpha_accepted += m.alpha_accepted ? 1 : 0;
        out.mh_beta_accepted += m.beta_accepted ? 1 : 0;
        hyper.alpha = m.alpha;
        hyper.beta = m.beta;
      }
    }

    if (sweep > config.burn_in && (sweep - config.burn_in) % config.thin == 0) {
      out.draws.push_back(
          {states, model.regime_params(), model.shared_params(), hyper.alpha, hyper.beta});
    }
  }
  out.final_k = states.num_change_points();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------

ParamSummary summarize_series(std::string name, std::size_t regime, std::span<const double> x) {
  ParamSummary p;
  p.name = std::move(name);
  p.regime = regime;
  p.count = x.size();
  if (x.empty()) {
    p.mean = p.sd = p.lag1_autocorr = std::numeric_limits<double>::quiet_NaN();
    return p;
  }
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss += (x[i] - m) * (x[i] - m);
    if (i + 1 < x.size()) cross += (x[i] - m) * (x[i + 1] - m);
  }
  p.mean = m;
  p.sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
  p.lag1_autocorr = ss > 0.0 ? cross / ss : std::numeric_limits<double>::quiet_NaN();
  return p;
}

const ParamSummary* PosteriorSummary::find(const std::string& name, std::size_t regime) const {
  for (const auto& p : params)
    if (p.name == name && p.regime == regime) return &p;
  return nullptr;
}

std::size_t PosteriorSummary::cp_mode(std::size_t ordinal) const {
  if (ordinal == 0 || ordinal > cp_pmf.size()) {
    throw ContractViolation("cp_mode: no change point with ordinal " + std::to_string(ordinal));
  }
  const auto& row = cp_pmf[ordinal - 1];
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) + 1;
}

PosteriorSummary summarize(const ChainOutput& out) {
  if (out.draws.empty()) throw ContractViolation("summarize: chain has no retained draws");
  PosteriorSummary s;
  s.n = out.n;
  s.draws = out.draws.size();
  const double w = 1.0 / static_cast<double>(s.draws);

  std::size_t max_regimes = 0;
  for (const auto& d : out.draws) max_regimes = std::max(max_regimes, d.states.num_regimes());

  s.state_prob.assign(out.n, std::vector<double>(max_regimes, 0.0));
  s.k_distribution.assign(max_regimes, 0.0);
  std::vector<std::size_t> k_count(max_regimes, 0);
  for (const auto& d : out.draws) {
    for (std::size_t t = 0; t < out.n; ++t)
      s.state_prob[t][static_cast<std::size_t>(d.states[t] - 1)] += w;
    ++k_count[d.states.num_change_points()];
  }
  for (std::size_t k = 0; k < max_regimes; ++k) s.k_distribution[k] = k_count[k] * w;
  // Ties go to the smaller k.
  s.modal_k = static_cast<std::size_t>(std::max_element(k_count.begin(), k_count.end()) -
                                       k_count.begin());
  s.modal_k_draws = k_count[s.modal_k];

  const double wk = 1.0 / static_cast<double>(s.modal_k_draws);
  s.cp_pmf.assign(s.modal_k, std::vector<double>(out.n, 0.0));
  const std::size_t regimes = s.modal_k + 1;
  const std::size_t np = out.regime_param_names.size();
  std::vector<std::vector<std::vector<double>>> series(
      regimes, std::vector<std::vector<double>>(np));
  for (const auto& d : out.draws) {
    if (d.states.num_change_points() != s.modal_k) continue;
    const auto tau = change_points(d.states);
    for (std::size_t i = 0; i < tau.size(); ++i) s.cp_pmf[i][tau[i] - 1] += wk;
    for (std::size_t r = 0; r < regimes; ++r)
      for (std::size_t j = 0; j < np; ++j) series[r][j].push_back(d.regime_params[r][j]);
  }
  for (std::size_t r = 0; r < regimes; ++r)
    for (std::size_t j = 0; j < np; ++j)
      s.params.push_back(summarize_series(out.regime_param_names[j], r + 1, series[r][j]));

  std::vector<double> col(s.draws);
  for (std::size_t j = 0; j < out.shared_param_names.size(); ++j) {
    for (std::size_t i = 0; i < s.draws; ++i) col[i] = out.draws[i].shared_params[j];
    s.params.push_back(summarize_series(out.shared_param_names[j], 0, col));
  }
  for (std::size_t i = 0; i < s.draws; ++i) col[i] = out.draws[i].alpha;
  s.params.push_back(summarize_series("alpha", 0, col));
  for (std::size_t i = 0; i < s.draws; ++i) col[i] = out.draws[i].beta;
  s.params.push_back(summarize_series("beta", 0, col));
  return s;
}

// ---------------------------------------------------------------------------

void SimSpec::validate() const {
  if (n < 2) throw ContractViolation("sim spec: n must be at least 2");
  std::size_t prev = 0;
  for (std::size_t tau : change_points) {
    if (tau <= prev || tau >= n) {
      throw ContractViolation("sim spec: change points must increase strictly within [1, n-1]");
    }
    prev = tau;
  }
  if (regime_values.size() != change_points.size() + 1) {
    throw ContractViolation("sim spec: need one parameter vector per regime");
  }
  const std::size_t want = kind == ModelKind::kAr2 ? 4 : 1;
  for (const auto& v : regime_values) {
    if (v.size() != want) {
      throw ContractViolation("sim spec: " + to_string(kind) + " regimes take " +
                              std::to_string(want) + " values");
    }
    for (double x : v)
      if (!std::isfinite(x)) throw ContractViolation("sim spec: non-finite regime value");
  }
  if (kind == ModelKind::kPoisson) {
    for (const auto& v : regime_values)
      if (!(v[0] > 0.0)) throw ContractViolation("sim spec: Poisson rates must be positive");
  }
  if (kind == ModelKind::kAr2) {
    for (const auto& v : regime_values)
      if (!(v[3] > 0.0)) throw ContractViolation("sim spec: AR(2) variances must be positive");
  }
  if ((kind == ModelKind::kNormalKnown || kind == ModelKind::kNormalUnknown) &&
      !(sigma2 >= 0.0 && std::isfinite(sigma2))) {
    throw ContractViolation("sim spec: noise variance must be nonnegative");
  }
}

SimSpec normal_model1() {
  SimSpec s;
  s.kind = ModelKind::kNormalKnown;
  s.n = 150;
  s.change_points = {50};
  s.regime_values = {{1.0}, {3.0}};
  s.sigma2 = 3.0;
  return s;
}

SimSpec normal_model2() {
  SimSpec s = normal_model1();
  s.kind = ModelKind::kNormalUnknown;
  s.change_points = {50, 100};
  s.regime_values = {{1.0}, {3.0}, {5.0}};
  return s;
}

std::vector<double> simulate(const SimSpec& spec, RngStream& rng) {
  spec.validate();
  std::vector<double> y(spec.n);
  std::size_t regime = 0;
  for (std::size_t t = 0; t < spec.n; ++t) {
    while (regime < spec.change_points.size() && t >= spec.change_points[regime]) ++regime;
    const auto& v = spec.regime_values[regime];
    switch (spec.kind) {
      case ModelKind::kNormalKnown:
      case ModelKind::kNormalUnknown:
        y[t] = draw_normal(v[0], spec.sigma2, rng);
        break;
      case ModelKind::kPoisson: {
        boost::random::poisson_distribution<int, double> pois(v[0]);
        y[t] = static_cast<double>(pois(rng));
        break;
      }
      case ModelKind::kAr2: {
        if (t < 2) {
          // Start at the regime's stationary mean when it has one.
          const double denom = 1.0 - v[1] - v[2];
          const double level = std::abs(denom) > 1e-8 ? v[0] / denom : v[0];
          y[t] = draw_normal(level, v[3], rng);
        } else {
          y[t] = draw_normal(v[0] + v[1] * y[t - 1] + v[2] * y[t - 2], v[3], rng);
        }
        break;
      }
    }
  }
  return y;
}

// ---------------------------------------------------------------------------

double ReplicationResult::frequency(std::size_t k) const {
  if (succeeded == 0) return 0.0;
  const auto it = k_counts.find(k);
  return it == k_counts.end() ? 0.0
                              : static_cast<double>(it->second) / static_cast<double>(succeeded);
}

ReplicationResult replicate(const ReplicationPlan& plan) {
  if (plan.replications == 0) throw ContractViolation("replicate: need at least one replication");
  plan.config.validate();
  if (plan.sim) {
    plan.sim->validate();
  } else {
    validate_data(plan.kind, plan.data);
  }

  const auto start = std::chrono::steady_clock::now();
  ReplicationResult res;
  res.records.resize(plan.replications);

  auto run_one = [&plan](std::size_t r) {
    ReplicationRecord rec;
    rec.index = r;
    rec.seed = plan.config.seed;
    rec.stream_id = r;
    try {
      RngStream rng(plan.config.seed, r);
      std::vector<double> data = plan.sim ? simulate(*plan.sim, rng) : plan.data;
      auto model = make_model(plan.kind, std::move(data), plan.settings);
      SamplerConfig cfg = plan.config;
      cfg.stream_id = r;
      const ChainOutput out = run_chain(*model, cfg, rng);
      rec.k = out.draws.back().states.num_change_points();
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    return rec;
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(plan.parallelism, plan.replications));
  if (workers == 1) {
    for (std::size_t r = 0; r < plan.replications; ++r) res.records[r] = run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < plan.replications; r = next++) res.records[r] = run_one(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& rec : res.records) {
    if (rec.failed) {
      ++res.failed;
    } else {
      ++res.succeeded;
      ++res.k_counts[rec.k];
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace dphmm
