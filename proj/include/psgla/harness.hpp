#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "psgla/experiments.hpp"
#include "psgla/samplers.hpp"

namespace psgla {

inline constexpr const char* kArtifactVersion = "0.1.0";
/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutDirEnv = "PSGLA_OUT_DIR";

/// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::TruncGauss;
  SamplerKind sampler = SamplerKind::Psgla;
  SamplerConfig sampler_cfg;
  std::size_t num_chains = 1;
  std::vector<std::int64_t> snapshot_steps;  // empty: the final step only
  std::string output_dir;                    // empty: "psgla_out"
  TruncGaussSpec trunc;
  // Data spec of the wishart experiments.
  int n = 50;
  int d = 1;
  std::optional<double> nu;  // default d + 4
  std::uint64_t data_seed = 0;
  std::vector<double> spla_l1_weights;
  std::optional<std::vector<double>> initial;  // packed coordinates
  std::size_t histogram_bins = 60;
  std::size_t bootstrap_resamples = 0;
  unsigned threads = 0;

  [[nodiscard]] double nu_value() const { return nu.value_or(d + 4.0); }
};

/// Parses and validates a config object. Unknown keys, wrong types and
/// inconsistent values throw ConfigError naming the offending field.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical echo of every field, defaults included.
nlohmann::json to_json(const RunConfig& cfg);

/// Potentials, ground truth and start point for a config; throws ConfigError.
struct PreparedRun {
  AssembledExperiment experiment;
  Problem problem;
};
PreparedRun prepare_run(const RunConfig& cfg);

/// Shortest round-trip decimal form.
std::string format_double(double v);
std::string sha256_hex(const std::string& bytes);

struct OutputFile {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<OutputFile> files;
  std::vector<std::string> warnings;
  double wall_time_seconds = 0.0;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// --out, then $PSGLA_OUT_DIR, then the config, then "psgla_out".
std::filesystem::path resolve_output_dir(const RunConfig& cfg,
                                         const std::optional<std::string>& cli_out);

/// CSV header of a trace: step, x columns, optional y columns, feasible.
std::vector<std::string> trace_header(const SpaceDescriptor& desc, bool duals);
std::string trace_csv(const ChainTrace& trace, const SpaceDescriptor& desc, bool duals);

struct HistogramBin {
  double left;
  double right;
  std::size_t count;
};
/// `bins` equal bins over the [0.1%, 99.9%] empirical quantile range.
std::vector<HistogramBin> histogram(std::vector<double> values, std::size_t bins);

/// Writes trace.csv (chain 0) and trace_chain<c>.csv for further chains,
/// then manifest.json. Returns the manifest.
RunManifest cmd_sample(const RunConfig& cfg, const std::filesystem::path& out_dir,
                       std::ostream* progress = nullptr);
/// Writes report.json, histogram.csv (1-D), convergence.csv (when m* is
/// known) and manifest.json.
RunManifest cmd_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                           std::ostream* progress = nullptr);

struct VerifyOptions {
  std::string suite = "all";  // moreau, spectral, lemma2, pdpg, reductions or all
  std::size_t trials = 0;     // 0: suite default
  std::uint64_t seed = 0;
  /// Test hook: "prox" corrupts the box prox used by the suites.
  std::string mutation;
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t trials = 0;
  double worst = 0.0;  // worst observed value of the checked quantity
  std::string criterion;
  std::vector<std::string> failures;  // first few, with replay seeds
};

/// Suite names in run order.
const std::vector<std::string>& verify_suite_names();
/// Throws ConfigError on an unknown suite or mutation.
std::vector<SuiteResult> run_verify(const VerifyOptions& opts);
void print_verify_table(const std::vector<SuiteResult>& results, std::ostream& os);

/// prox of G*/gamma at x/gamma, derived from G* directly rather than through
/// the Moreau identity; throws for potentials without a known conjugate prox.
SpacePoint conjugate_prox_reference(double gamma, const SpacePoint& x,
                                    const NonsmoothPotential& g);

}  // namespace psgla
