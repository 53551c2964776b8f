#ifndef DPHMM_IO_HPP
#define DPHMM_IO_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dphmm/sampler.hpp"

namespace dphmm {

struct Dataset {
  std::vector<std::string> labels;  // empty strings when the file has none
  std::vector<double> values;
  std::uint64_t digest = 0;         // FNV-1a over the raw file bytes
};

struct LoadOptions {
  // Columns are (q, p) and the series is 100 [log(q_t/q_{t-1}) - log(p_t/p_{t-1})];
  // the first row is consumed by the differencing.
  bool gdp_transform = false;
};

/// Reads a comma-separated file: one value column, optionally preceded by a
/// label column (two value columns q, p in GDP mode). A first row whose value
/// cells do not parse is taken as a header. Errors name the 1-based file line.
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});
Dataset parse_dataset(const std::string& text, const LoadOptions& options = {});

std::uint64_t fnv1a64(std::string_view bytes);

// 17 significant digits, C locale, "nan"/"inf" spelled out.
std::string format_double(double x);

// key=value lines; '#' starts a comment; blank lines skipped.
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

std::string series_csv(std::span<const double> y);  // t,value with t = 1..n
std::string state_prob_csv(const PosteriorSummary& s);
std::string cp_pmf_csv(const PosteriorSummary& s);
std::string param_summary_csv(const PosteriorSummary& s);
std::string k_distribution_csv(const PosteriorSummary& s);
std::string frequency_csv(const ReplicationResult& r);

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;  // fully resolved settings
  std::string dataset_path;
  std::uint64_t dataset_digest = 0;
  std::size_t dataset_length = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::map<std::string, double> stats;
  std::vector<ReplicationRecord> replications;

  std::string to_json() const;
};

std::map<std::string, std::string> describe(const SamplerConfig& c);

}  // namespace dphmm

#endif  // DPHMM_IO_HPP
