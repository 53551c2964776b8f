#include "dphmm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dphmm/error.hpp"

namespace dphmm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string row_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << contents;
  if (!out) throw DataError("write failed for " + path);
}

Dataset parse_dataset(const std::string& text, const LoadOptions& options) {
  const std::size_t value_cols = options.gdp_transform ? 2 : 1;
  Dataset ds;
  ds.digest = fnv1a64(text);

  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_row = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != value_cols && cells.size() != value_cols + 1) {
      throw DataError(row_error(lineno, "expected " + std::to_string(value_cols) + " or " +
                                            std::to_string(value_cols + 1) + " columns, found " +
                                            std::to_string(cells.size())));
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw DataError(row_error(lineno, "column count differs from the first row"));
    }
    const std::size_t first_value = width - value_cols;
    std::vector<double> v(value_cols);
    bool ok = true;
    for (std::size_t j = 0; j < value_cols; ++j)
      ok = ok && parse_number(cells[first_value + j], v[j]);
    if (!ok) {
      if (!seen_row && rows.empty()) {
        seen_row = true;  // header
        continue;
      }
      throw DataError(row_error(lineno, "empty or non-numeric value"));
    }
    seen_row = true;
    for (double x : v)
      if (!std::isfinite(x)) throw DataError(row_error(lineno, "non-finite value"));
    if (options.gdp_transform && (!(v[0] > 0.0) || !(v[1] > 0.0))) {
      throw DataError(row_error(lineno, "GDP levels and deflators must be positive"));
    }
    labels.push_back(first_value ? cells[0] : std::string());
    rows.push_back(std::move(v));
  }

  if (!options.gdp_transform) {
    ds.labels = std::move(labels);
    ds.values.reserve(rows.size());
    for (const auto& r : rows) ds.values.push_back(r[0]);
  } else {
    for (std::size_t t = 1; t < rows.size(); ++t) {
      ds.labels.push_back(labels[t]);
      ds.values.push_back(100.0 * (std::log(rows[t][0] / rows[t - 1][0]) -
                                   std::log(rows[t][1] / rows[t - 1][1])));
    }
  }
  if (ds.values.size() < 2) {
    throw DataError("dataset has " + std::to_string(ds.values.size()) +
                    " observations; at least 2 are required");
  }
  return ds;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  try {
    return parse_dataset(read_file(path), options);
  } catch (const DataError& e) {
    const std::string msg = e.what();
    if (msg.rfind("cannot open", 0) == 0) throw;
    throw DataError(path + ": " + msg);
  }
}

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DataError(row_error(lineno, "expected key=value"));
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw DataError(row_error(lineno, "empty key"));
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  try {
    return parse_config(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string series_csv(std::span<const double> y) {
  std::string out = "t,value\n";
  for (std::size_t t = 0; t < y.size(); ++t)
    out += std::to_string(t + 1) + "," + format_double(y[t]) + "\n";
  return out;
}

std::string state_prob_csv(const PosteriorSummary& s) {
  const std::size_t cols = s.state_prob.empty() ? 0 : s.state_prob.front().size();
  std::string out = "t";
  for (std::size_t i = 1; i <= cols; ++i) out += ",regime_" + std::to_string(i);
  out += "\n";
  for (std::size_t t = 0; t < s.state_prob.size(); ++t) {
    out += std::to_string(t + 1);
    for (double p : s.state_prob[t]) out += "," + format_double(p);
    out += "\n";
  }
  return out;
}

std::string cp_pmf_csv(const PosteriorSummary& s) {
  std::string out = "t";
  for (std::size_t i = 1; i <= s.cp_pmf.size(); ++i) out += ",tau_" + std::to_string(i);
  out += "\n";
  for (std::size_t t = 0; t < s.n; ++t) {
    out += std::to_string(t + 1);
    for (const auto& row : s.cp_pmf) out += "," + format_double(row[t]);
    out += "\n";
  }
  return out;
}

std::string param_summary_csv(const PosteriorSummary& s) {
  std::string out = "parameter,regime,mean,sd,lag1_autocorr,draws\n";
  for (const auto& p : s.params) {
    out += p.name + "," + std::to_string(p.regime) + "," + format_double(p.mean) + "," +
           format_double(p.sd) + "," + format_double(p.lag1_autocorr) + "," +
           std::to_string(p.count) + "\n";
  }
  return out;
}

std::string k_distribution_csv(const PosteriorSummary& s) {
  std::string out = "k,probability\n";
  for (std::size_t k = 0; k < s.k_distribution.size(); ++k)
    out += std::to_string(k) + "," + format_double(s.k_distribution[k]) + "\n";
  return out;
}

std::string frequency_csv(const ReplicationResult& r) {
  std::string out = "k,count,frequency\n";
  for (const auto& [k, c] : r.k_counts)
    out += std::to_string(k) + "," + std::to_string(c) + "," + format_double(r.frequency(k)) + "\n";
  return out;
}

std::map<std::string, std::string> describe(const SamplerConfig& c) {
  std::string hyper = to_string(c.hyper_mode);
  if (c.hyper_mode == HyperMode::kFixed) hyper += ":" + format_double(c.alpha) + "," + format_double(c.beta);
  return {
      {"sweeps", std::to_string(c.sweeps)},
      {"burn_in", std::to_string(c.burn_in)},
      {"thin", std::to_string(c.thin)},
      {"init_regimes", std::to_string(c.init_regimes)},
      {"hyper", hyper},
      {"alpha_start", format_double(c.alpha)},
      {"beta_start", format_double(c.beta)},
      {"prior_alpha", format_double(c.prior_a_alpha) + "," + format_double(c.prior_b_alpha)},
      {"prior_beta", format_double(c.prior_a_beta) + "," + format_double(c.prior_b_beta)},
      {"rule", to_string(c.rule)},
      {"fix_shared", c.fix_shared ? "true" : "false"},
      {"seed", std::to_string(c.seed)},
      {"stream_id", std::to_string(c.stream_id)},
  };
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["software"] = "dphmm";
  j["version"] = DPHMM_VERSION;
  j["command"] = command;
  j["config"] = config;
  if (!dataset_path.empty()) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(dataset_digest));
    j["dataset"] = {{"path", dataset_path}, {"fnv1a64", hex}, {"length", dataset_length}};
  }
  j["seed"] = seed;
  j["seconds"] = seconds;
  if (!stats.empty()) j["stats"] = stats;
  if (!replications.empty()) {
    auto& arr = j["replications"] = nlohmann::ordered_json::array();
    for (const auto& r : replications) {
      nlohmann::ordered_json e{{"index", r.index}, {"seed", r.seed}, {"stream_id", r.stream_id}};
      if (r.failed) {
        e["error"] = r.error;
      } else {
        e["k"] = r.k;
      }
      arr.push_back(std::move(e));
    }
  }
  return j.dump(2) + "\n";
}

}  // namespace dphmm
