// Command-line front end: fit, simulate, replicate, oracle-check.
//
// Settings resolve as command-line flags > --config file (key=value lines,
// keys are the long flag names) > built-in defaults.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dphmm/error.hpp"
#include "dphmm/io.hpp"
#include "dphmm/oracle.hpp"
#include "dphmm/sampler.hpp"

namespace fs = std::filesystem;
using namespace dphmm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model;
  std::string data;
  bool gdp_transform = false;
  std::optional<std::size_t> sweeps, burn_in, thin, init_regimes;
  std::string hyper = "mh";
  std::string rule;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string config;
  double prior_shape = 2.0;
  double prior_rate = 1.0;
  double sigma2 = 3.0;
  std::vector<double> prior_alpha{1.0, 1.0};
  std::vector<double> prior_beta{1.0, 1.0};
  std::optional<double> mu, upsilon2;
  // simulate
  bool model1 = false, model2 = false;
  std::size_t n = 150;
  std::vector<std::size_t> tau;
  std::vector<double> values;
  // replicate
  std::size_t replications = 1;
  std::size_t parallelism = 1;
  std::string sim;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--sweeps", o.sweeps, "Retained-phase sweeps after burn-in");
  app->add_option("--burn-in", o.burn_in, "Burn-in sweeps");
  app->add_option("--thin", o.thin, "Keep every thin-th sweep");
  app->add_option("--init-regimes", o.init_regimes, "Equidistant starting regimes");
  app->add_option("--hyper", o.hyper, "fixed:A,B | map | mh");
  app->add_option("--rule", o.rule, "State sweep rule: paper | exact");
  app->add_option("--seed", o.seed, "Master seed");
  app->add_option("--out-dir", o.out_dir, "Directory for result files");
  app->add_option("--prior-alpha", o.prior_alpha, "Gamma shape,rate of alpha")->expected(2)->delimiter(',');
  app->add_option("--prior-beta", o.prior_beta, "Gamma shape,rate of beta")->expected(2)->delimiter(',');
  app->add_option("--prior-shape", o.prior_shape, "Poisson: Gamma prior shape of lambda");
  app->add_option("--prior-rate", o.prior_rate, "Poisson: Gamma prior rate of lambda");
  app->add_option("--sigma2", o.sigma2, "Normal known variance (also simulation noise)");
  app->add_option("--mu", o.mu, "Normal: start (or fixed) mu");
  app->add_option("--upsilon2", o.upsilon2, "Normal: start (or fixed) upsilon2");
  app->add_option("--config", o.config, "key=value settings file");
}

void add_data(CLI::App* app, Options& o, bool required) {
  auto* d = app->add_option("--data", o.data, "CSV dataset");
  if (required) d->required();
  app->add_flag("--gdp-transform", o.gdp_transform, "Data holds (q, p); fit the growth series");
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw UsageError("invalid " + what + ": '" + s + "'");
  return v;
}

ModelKind model_kind(const std::string& name) {
  try {
    return parse_model_kind(name);
  } catch (const std::exception&) {
    throw UsageError("unknown model '" + name +
                     "' (expected normal-known, normal-unknown, poisson or ar2)");
  }
}

SamplerConfig resolve_config(const Options& o, std::size_t default_burn_in) {
  SamplerConfig c;
  c.burn_in = o.burn_in.value_or(default_burn_in);
  if (o.sweeps) c.sweeps = *o.sweeps;
  if (o.thin) c.thin = *o.thin;
  if (o.init_regimes) c.init_regimes = *o.init_regimes;
  c.seed = o.seed;
  c.prior_a_alpha = o.prior_alpha[0];
  c.prior_b_alpha = o.prior_alpha[1];
  c.prior_a_beta = o.prior_beta[0];
  c.prior_b_beta = o.prior_beta[1];

  if (o.hyper == "mh") {
    c.hyper_mode = HyperMode::kMh;
  } else if (o.hyper == "map") {
    c.hyper_mode = HyperMode::kMap;
  } else if (o.hyper.rfind("fixed:", 0) == 0) {
    const std::string rest = o.hyper.substr(6);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw UsageError("--hyper fixed needs A,B");
    c.hyper_mode = HyperMode::kFixed;
    c.alpha = parse_double(rest.substr(0, comma), "alpha");
    c.beta = parse_double(rest.substr(comma + 1), "beta");
  } else {
    throw UsageError("--hyper must be fixed:A,B, map or mh");
  }
  if (!o.rule.empty()) {
    if (o.rule == "paper") {
      c.rule = SweepRule::kPaper;
    } else if (o.rule == "exact") {
      c.rule = SweepRule::kExact;
    } else {
      throw UsageError("--rule must be paper or exact");
    }
  }
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return c;
}

ModelSettings resolve_settings(const Options& o) {
  ModelSettings s;
  s.known_sigma2 = o.sigma2;
  s.poisson = {o.prior_shape, o.prior_rate};
  if (!(o.sigma2 > 0.0)) throw UsageError("--sigma2 must be positive");
  if (!(o.prior_shape > 0.0) || !(o.prior_rate > 0.0)) {
    throw UsageError("--prior-shape and --prior-rate must be positive");
  }
  return s;
}

std::map<std::string, std::string> settings_map(const Options& o, ModelKind kind) {
  std::map<std::string, std::string> m;
  m["model"] = to_string(kind);
  if (kind == ModelKind::kPoisson) {
    m["prior_shape"] = format_double(o.prior_shape);
    m["prior_rate"] = format_double(o.prior_rate);
  }
  if (kind == ModelKind::kNormalKnown) m["sigma2"] = format_double(o.sigma2);
  if (o.mu) m["mu"] = format_double(*o.mu);
  if (o.upsilon2) m["upsilon2"] = format_double(*o.upsilon2);
  if (!o.data.empty()) m["gdp_transform"] = o.gdp_transform ? "true" : "false";
  return m;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

std::string out_path(const Options& o, const std::string& name) {
  return (fs::path(o.out_dir) / name).string();
}

Dataset load(const Options& o, ModelKind kind) {
  Dataset ds = load_dataset(o.data, {o.gdp_transform});
  try {
    validate_data(kind, ds.values);
  } catch (const DataError& e) {
    throw DataError(o.data + ": " + e.what());
  }
  return ds;
}

void apply_normal_start(const Options& o, ModelSettings& s) {
  if (o.mu || o.upsilon2) {
    if (!o.mu || !o.upsilon2) throw UsageError("--mu and --upsilon2 go together");
    s.normal_start = NormalShared{*o.mu, *o.upsilon2, o.sigma2};
  }
}

// ---------------------------------------------------------------------------

int cmd_fit(const Options& o) {
  const ModelKind kind = model_kind(o.model);
  SamplerConfig cfg = resolve_config(o, application_defaults().burn_in);
  ModelSettings settings = resolve_settings(o);
  apply_normal_start(o, settings);
  const Dataset ds = load(o, kind);
  auto model = make_model(kind, ds.values, settings);
  const ChainOutput out = run_chain(*model, cfg);
  const PosteriorSummary s = summarize(out);

  ensure_out_dir(o.out_dir);
  write_file(out_path(o, "state_prob.csv"), state_prob_csv(s));
  write_file(out_path(o, "cp_pmf.csv"), cp_pmf_csv(s));
  write_file(out_path(o, "params.csv"), param_summary_csv(s));
  write_file(out_path(o, "k_distribution.csv"), k_distribution_csv(s));

  RunManifest m;
  m.command = "fit";
  m.config = describe(cfg);
  m.config.merge(settings_map(o, kind));
  m.dataset_path = o.data;
  m.dataset_digest = ds.digest;
  m.dataset_length = ds.values.size();
  m.seed = cfg.seed;
  m.seconds = out.seconds;
  m.stats["retained_draws"] = static_cast<double>(out.draws.size());
  m.stats["modal_k"] = static_cast<double>(s.modal_k);
  if (out.mh_proposals > 0) {
    m.stats["mh_alpha_acceptance"] = double(out.mh_alpha_accepted) / double(out.mh_proposals);
    m.stats["mh_beta_acceptance"] = double(out.mh_beta_accepted) / double(out.mh_proposals);
  }
  if (cfg.hyper_mode == HyperMode::kMap) {
    m.stats["map_nonconverged"] = static_cast<double>(out.map_nonconverged);
  }
  write_file(out_path(o, "manifest.json"), m.to_json());

  std::printf("n=%zu draws=%zu modal_k=%zu (%.3f)\n", ds.values.size(), s.draws, s.modal_k,
              s.k_distribution[s.modal_k]);
  for (std::size_t i = 1; i <= s.modal_k; ++i) {
    const std::size_t t = s.cp_mode(i);
    const std::string& label = ds.labels[t - 1];
    std::printf("tau_%zu mode t=%zu%s%s (p=%.3f)\n", i, t, label.empty() ? "" : " ",
                label.c_str(), s.cp_pmf[i - 1][t - 1]);
  }
  for (const auto& p : s.params) {
    std::printf("%s%s mean=%.6g sd=%.6g r1=%.3f\n", p.name.c_str(),
                p.regime ? ("_" + std::to_string(p.regime)).c_str() : "", p.mean, p.sd,
                p.lag1_autocorr);
  }
  return kExitOk;
}

SimSpec resolve_sim(const Options& o) {
  if (o.model1 && o.model2) throw UsageError("--model1 and --model2 are exclusive");
  if (o.model1) return normal_model1();
  if (o.model2) return normal_model2();
  if (o.model.empty()) throw UsageError("simulate needs --model1, --model2 or --model with --values");
  SimSpec spec;
  spec.kind = model_kind(o.model);
  spec.n = o.n;
  spec.change_points = o.tau;
  spec.sigma2 = o.sigma2;
  const std::size_t per = spec.kind == ModelKind::kAr2 ? 4 : 1;
  if (o.values.size() != per * (o.tau.size() + 1)) {
    throw UsageError("--values needs " + std::to_string(per) + " number(s) per regime");
  }
  for (std::size_t i = 0; i < o.values.size(); i += per)
    spec.regime_values.emplace_back(o.values.begin() + i, o.values.begin() + i + per);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return spec;
}

int cmd_simulate(const Options& o) {
  const SimSpec spec = resolve_sim(o);
  RngStream rng(o.seed, 0);
  const auto y = simulate(spec, rng);
  ensure_out_dir(o.out_dir);
  const std::string csv = series_csv(y);
  write_file(out_path(o, "simulated.csv"), csv);

  RunManifest m;
  m.command = "simulate";
  m.config["model"] = to_string(spec.kind);
  m.config["n"] = std::to_string(spec.n);
  std::string taus, vals;
  for (auto t : spec.change_points) taus += (taus.empty() ? "" : ",") + std::to_string(t);
  for (const auto& r : spec.regime_values)
    for (double v : r) vals += (vals.empty() ? "" : ",") + format_double(v);
  m.config["tau"] = taus;
  m.config["values"] = vals;
  m.config["sigma2"] = format_double(spec.sigma2);
  m.dataset_path = out_path(o, "simulated.csv");
  m.dataset_digest = fnv1a64(csv);
  m.dataset_length = y.size();
  m.seed = o.seed;
  write_file(out_path(o, "manifest.json"), m.to_json());
  std::printf("wrote %zu rows to %s\n", y.size(), m.dataset_path.c_str());
  return kExitOk;
}

int cmd_replicate(const Options& o) {
  ReplicationPlan plan;
  Dataset ds;
  if (!o.sim.empty()) {
    if (!o.data.empty()) throw UsageError("--sim and --data are exclusive");
    if (o.sim == "model1") {
      plan.sim = normal_model1();
    } else if (o.sim == "model2") {
      plan.sim = normal_model2();
    } else {
      throw UsageError("--sim must be model1 or model2");
    }
    plan.kind = o.model.empty() ? plan.sim->kind : model_kind(o.model);
    plan.config = resolve_config(o, simulation_defaults().burn_in);
  } else {
    if (o.data.empty()) throw UsageError("replicate needs --data or --sim");
    if (o.model.empty()) throw UsageError("replicate with --data needs --model");
    plan.kind = model_kind(o.model);
    ds = load(o, plan.kind);
    plan.data = ds.values;
    plan.config = resolve_config(o, application_defaults().burn_in);
  }
  if (o.replications == 0) throw UsageError("--replications must be at least 1");
  plan.settings = resolve_settings(o);
  apply_normal_start(o, plan.settings);
  plan.replications = o.replications;
  plan.parallelism = std::max<std::size_t>(1, o.parallelism);

  const ReplicationResult r = replicate(plan);
  ensure_out_dir(o.out_dir);
  write_file(out_path(o, "k_frequency.csv"), frequency_csv(r));

  RunManifest m;
  m.command = "replicate";
  m.config = describe(plan.config);
  m.config.merge(settings_map(o, plan.kind));
  m.config["replications"] = std::to_string(plan.replications);
  m.config["parallelism"] = std::to_string(plan.parallelism);
  if (plan.sim) m.config["sim"] = o.sim;
  if (!o.data.empty()) {
    m.dataset_path = o.data;
    m.dataset_digest = ds.digest;
    m.dataset_length = ds.values.size();
  }
  m.seed = plan.config.seed;
  m.seconds = r.seconds;
  m.replications = r.records;
  write_file(out_path(o, "manifest.json"), m.to_json());

  for (const auto& [k, c] : r.k_counts) std::printf("k=%zu count=%zu frequency=%.4f\n", k, c, r.frequency(k));
  for (const auto& rec : r.records) {
    if (rec.failed) {
      std::fprintf(stderr, "replication %zu (seed %llu, stream %llu) failed: %s\n", rec.index,
                   static_cast<unsigned long long>(rec.seed),
                   static_cast<unsigned long long>(rec.stream_id), rec.error.c_str());
    }
  }
  return r.failed == 0 ? kExitOk : kExitNumerical;
}

int cmd_oracle_check(const Options& o) {
  const ModelKind kind = model_kind(o.model);
  if (kind != ModelKind::kPoisson && kind != ModelKind::kNormalKnown) {
    throw UsageError("oracle-check supports poisson and normal-known");
  }
  if (o.hyper.rfind("fixed:", 0) != 0) throw UsageError("oracle-check needs --hyper fixed:A,B");
  const Dataset ds = load(o, kind);
  if (ds.values.size() > kOracleMaxLength) {
    throw UsageError("oracle-check: n=" + std::to_string(ds.values.size()) +
                     " exceeds the enumeration bound of " + std::to_string(kOracleMaxLength));
  }

  Options with_defaults = o;
  if (!o.sweeps) with_defaults.sweeps = 50000;
  if (!o.thin) with_defaults.thin = 1;
  if (!o.init_regimes) with_defaults.init_regimes = 1;
  if (o.rule.empty()) with_defaults.rule = "exact";
  SamplerConfig cfg = resolve_config(with_defaults, application_defaults().burn_in);
  cfg.fix_shared = true;

  ModelSettings settings = resolve_settings(o);
  SegmentMarginal marginal;
  if (kind == ModelKind::kPoisson) {
    marginal = poisson_gamma_marginal(ds.values, settings.poisson);
  } else {
    const double n = static_cast<double>(ds.values.size());
    double mean = 0.0;
    for (double v : ds.values) mean += v / n;
    double var = 0.0;
    for (double v : ds.values) var += (v - mean) * (v - mean) / (n - 1.0);
    const NormalShared shared{o.mu.value_or(mean), o.upsilon2.value_or(var > 0.0 ? var : 1.0),
                              o.sigma2};
    settings.normal_start = shared;
    marginal = normal_fixed_marginal(ds.values, shared.mu, shared.upsilon2, shared.sigma2);
  }

  auto model = make_model(kind, ds.values, settings);
  const ChainOutput out = run_chain(*model, cfg);
  const PosteriorSummary s = summarize(out);
  const ExactPosterior exact = enumerate_posterior(ds.values.size(), marginal, cfg.alpha, cfg.beta);

  const std::size_t n = ds.values.size();
  double worst = 0.0;
  std::printf("t,tv\n");
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> mc(n, 0.0);
    for (std::size_t i = 0; i < s.state_prob[t].size(); ++i) mc[i] = s.state_prob[t][i];
    const double tv = tv_distance(mc, exact.state_prob[t]);
    worst = std::max(worst, tv);
    std::printf("%zu,%.6f\n", t + 1, tv);
  }
  std::vector<double> k_mc(n, 0.0);
  for (std::size_t k = 0; k < s.k_distribution.size(); ++k) k_mc[k] = s.k_distribution[k];
  std::printf("max_tv=%.6f k_tv=%.6f draws=%zu rule=%s\n", worst, tv_distance(k_mc, exact.k_pmf),
              s.draws, to_string(cfg.rule).c_str());
  for (std::size_t k = 0; k < n; ++k) {
    if (exact.k_pmf[k] > 1e-4 || k_mc[k] > 0.0) {
      std::printf("P(k=%zu) sampler=%.4f exact=%.4f\n", k, k_mc[k], exact.k_pmf[k]);
    }
  }
  return kExitOk;
}

// Splices key=value lines from --config in front of the real flags so that
// explicit flags win (options take their last value).
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(path)) {
    if (key == "config") continue;
    injected.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian change-point detection with a left-to-right DP-HMM"};
  app.set_version_flag("--version", DPHMM_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options o;

  auto* fit = app.add_subcommand("fit", "Fit a model to a dataset and write posterior summaries");
  fit->add_option("--model", o.model, "normal-known | normal-unknown | poisson | ar2")->required();
  add_data(fit, o, true);
  add_common(fit, o);

  auto* sim = app.add_subcommand("simulate", "Simulate a series with known change points");
  sim->add_flag("--model1", o.model1, "theta (1,3), sigma2 3, tau 50, n 150");
  sim->add_flag("--model2", o.model2, "theta (1,3,5), sigma2 3, tau (50,100), n 150");
  sim->add_option("--model", o.model, "Model kind for a custom spec");
  sim->add_option("--n", o.n, "Series length");
  sim->add_option("--tau", o.tau, "Change points (last index of each regime)")->delimiter(',');
  sim->add_option("--values", o.values, "Regime values, regime by regime")->delimiter(',');
  add_common(sim, o);

  auto* rep = app.add_subcommand("replicate", "Tabulate detected change-point counts over replications");
  rep->add_option("--model", o.model, "Model kind (defaults to the simulation's)");
  add_data(rep, o, false);
  rep->add_option("--sim", o.sim, "model1 | model2: fresh simulated data per replication");
  rep->add_option("--replications", o.replications, "Number of replications");
  rep->add_option("--parallelism", o.parallelism, "Worker threads");
  add_common(rep, o);

  auto* orc = app.add_subcommand("oracle-check", "Compare sampler marginals with exact enumeration");
  orc->add_option("--model", o.model, "poisson | normal-known")->required();
  add_data(orc, o, true);
  add_common(orc, o);

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }

  try {
    if (*fit) return cmd_fit(o);
    if (*sim) return cmd_simulate(o);
    if (*rep) return cmd_replicate(o);
    if (*orc) return cmd_oracle_check(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ContractViolation& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
