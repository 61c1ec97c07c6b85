#include "psgla/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "psgla/diagnostics.hpp"

namespace psgla {

using nlohmann::json;

// --- Config ------------------------------------------------------------------

namespace {

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + where + it.key() + "'");
  }
}

std::int64_t get_count(const json& j, const char* key) {
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(std::string("field '") + key + "' must be an integer");
  }
  return j.at(key).get<std::int64_t>();
}

double get_real(const json& j, const char* key) {
  if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> keys = {
      "experiment",   "sampler",       "gamma",           "num_steps",
      "burn_in",      "minibatch",     "myula_lambda",    "seed",
      "record_every", "record_duals",  "num_chains",      "snapshot_steps",
      "output_dir",   "trunc",         "data",            "spla_l1_weights",
      "initial",      "histogram_bins", "bootstrap_resamples", "threads"};
  reject_unknown(j, keys, "");

  RunConfig c;
  if (!j.contains("experiment")) throw ConfigError("missing field 'experiment'");
  if (!j.contains("sampler")) throw ConfigError("missing field 'sampler'");
  const auto exp = parse_experiment_kind(get_field<std::string>(j, "experiment"));
  if (!exp) throw ConfigError("unknown experiment '" + j["experiment"].get<std::string>() + "'");
  c.experiment = *exp;
  const auto samp = parse_sampler_kind(get_field<std::string>(j, "sampler"));
  if (!samp) throw ConfigError("unknown sampler '" + j["sampler"].get<std::string>() + "'");
  c.sampler = *samp;

  auto& s = c.sampler_cfg;
  if (j.contains("gamma")) s.gamma = get_real(j, "gamma");
  if (j.contains("num_steps")) s.num_steps = get_count(j, "num_steps");
  if (j.contains("burn_in")) s.burn_in = get_count(j, "burn_in");
  if (j.contains("minibatch") && !j["minibatch"].is_null()) {
    const auto b = get_count(j, "minibatch");
    if (b < 1) throw ConfigError("field 'minibatch' must be at least 1");
    s.minibatch = static_cast<std::size_t>(b);
  }
  if (j.contains("myula_lambda")) s.myula_lambda = get_real(j, "myula_lambda");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("field 'seed' must be a nonnegative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("record_every")) s.record_every = get_count(j, "record_every");
  if (j.contains("record_duals")) s.record_duals = get_field<bool>(j, "record_duals");

  if (j.contains("num_chains")) {
    const auto n = get_count(j, "num_chains");
    if (n < 1) throw ConfigError("field 'num_chains' must be at least 1");
    c.num_chains = static_cast<std::size_t>(n);
  }
  if (j.contains("snapshot_steps")) {
    if (!j["snapshot_steps"].is_array()) throw ConfigError("field 'snapshot_steps' must be an array");
    for (const auto& v : j["snapshot_steps"]) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ConfigError("field 'snapshot_steps' must hold nonnegative integers");
      c.snapshot_steps.push_back(v.get<std::int64_t>());
    }
  }
  if (j.contains("output_dir")) c.output_dir = get_field<std::string>(j, "output_dir");

  if (j.contains("trunc")) {
    const auto& t = j["trunc"];
    if (!t.is_object()) throw ConfigError("field 'trunc' must be an object");
    reject_unknown(t, {"m", "a", "b"}, "trunc.");
    if (t.contains("m")) c.trunc.m = get_real(t, "m");
    if (t.contains("a")) c.trunc.a = get_real(t, "a");
    if (t.contains("b")) c.trunc.b = get_real(t, "b");
  }
  if (j.contains("data")) {
    const auto& dj = j["data"];
    if (!dj.is_object()) throw ConfigError("field 'data' must be an object");
    reject_unknown(dj, {"n", "d", "nu", "seed"}, "data.");
    if (dj.contains("n")) c.n = static_cast<int>(get_count(dj, "n"));
    if (dj.contains("d")) c.d = static_cast<int>(get_count(dj, "d"));
    if (dj.contains("nu")) c.nu = get_real(dj, "nu");
    if (dj.contains("seed")) {
      if (!dj["seed"].is_number_unsigned()) throw ConfigError("field 'data.seed' must be a nonnegative integer");
      c.data_seed = dj["seed"].get<std::uint64_t>();
    }
  }
  if (j.contains("spla_l1_weights")) {
    c.spla_l1_weights = get_field<std::vector<double>>(j, "spla_l1_weights");
    for (double w : c.spla_l1_weights)
      if (!(w >= 0.0)) throw ConfigError("field 'spla_l1_weights' must be nonnegative");
  }
  if (j.contains("initial") && !j["initial"].is_null())
    c.initial = get_field<std::vector<double>>(j, "initial");
  if (j.contains("histogram_bins")) {
    const auto b = get_count(j, "histogram_bins");
    if (b < 1) throw ConfigError("field 'histogram_bins' must be at least 1");
    c.histogram_bins = static_cast<std::size_t>(b);
  }
  if (j.contains("bootstrap_resamples")) {
    const auto b = get_count(j, "bootstrap_resamples");
    if (b < 0 || b == 1) throw ConfigError("field 'bootstrap_resamples' must be 0 or >= 2");
    c.bootstrap_resamples = static_cast<std::size_t>(b);
  }
  if (j.contains("threads")) {
    const auto t = get_count(j, "threads");
    if (t < 0) throw ConfigError("field 'threads' must be nonnegative");
    c.threads = static_cast<unsigned>(t);
  }

  // Cross-field checks.
  if (c.sampler == SamplerKind::Myula && !(s.myula_lambda > 0.0))
    throw ConfigError("sampler 'myula' requires field 'myula_lambda' > 0");
  if (c.sampler == SamplerKind::Projected && c.experiment != ExperimentKind::TruncGauss)
    throw ConfigError("sampler 'projected' needs an indicator G (experiment 'trunc-gauss')");
  if (!c.spla_l1_weights.empty() && c.sampler != SamplerKind::Spla)
    throw ConfigError("field 'spla_l1_weights' only applies to sampler 'spla'");
  if (c.experiment != ExperimentKind::WishartPrecision && c.d != 1)
    throw ConfigError("field 'data.d' must be 1 for experiment '" +
                      std::string(to_string(c.experiment)) + "'");
  if (c.n < 1 || c.d < 1) throw ConfigError("fields 'data.n' and 'data.d' must be at least 1");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (auto k : c.snapshot_steps)
    if (k > s.num_steps) throw ConfigError("snapshot step beyond 'num_steps'");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  const auto& s = c.sampler_cfg;
  json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["sampler"] = std::string(to_string(c.sampler));
  j["gamma"] = s.gamma;
  j["num_steps"] = s.num_steps;
  j["burn_in"] = s.burn_in;
  j["minibatch"] = s.minibatch ? json(*s.minibatch) : json(nullptr);
  j["myula_lambda"] = s.myula_lambda;
  j["seed"] = s.seed;
  j["record_every"] = s.record_every;
  j["record_duals"] = s.record_duals;
  j["num_chains"] = c.num_chains;
  j["snapshot_steps"] = c.snapshot_steps;
  j["output_dir"] = c.output_dir;
  j["trunc"] = {{"m", c.trunc.m}, {"a", c.trunc.a}, {"b", c.trunc.b}};
  j["data"] = {{"n", c.n}, {"d", c.d}, {"nu", c.nu_value()}, {"seed", c.data_seed}};
  j["spla_l1_weights"] = c.spla_l1_weights;
  j["initial"] = c.initial ? json(*c.initial) : json(nullptr);
  j["histogram_bins"] = c.histogram_bins;
  j["bootstrap_resamples"] = c.bootstrap_resamples;
  j["threads"] = c.threads;
  return j;
}

PreparedRun prepare_run(const RunConfig& cfg) {
  try {
    ExperimentSetup setup;
    setup.kind = cfg.experiment;
    setup.trunc = cfg.trunc;
    if (cfg.experiment != ExperimentKind::TruncGauss)
      setup.wishart = make_wishart_spec(cfg.d, cfg.nu_value(), cfg.n, cfg.data_seed);
    setup.spla_l1_weights = cfg.spla_l1_weights;
    PreparedRun run{assemble_experiment(setup), Problem{}};
    auto& p = run.problem;
    p.smooth = run.experiment.smooth;
    p.nonsmooth = run.experiment.nonsmooth;
    p.lipschitz = run.experiment.lipschitz;
    const auto desc = p.smooth->space();
    if (cfg.initial) {
      if (cfg.initial->size() != desc.ambient_dim())
        throw ConfigError("field 'initial' needs " + std::to_string(desc.ambient_dim()) +
                          " coordinates");
      p.initial = SpacePoint(desc, *cfg.initial);
    } else {
      p.initial = default_initial_point(run.experiment, cfg.sampler_cfg.gamma);
    }
    p.validate();
    if (step_exceeds_smoothness(cfg.sampler_cfg, *p.smooth))
      run.experiment.warnings.push_back("gamma > 1/L: outside the step range of the bounds");
    return run;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// --- Serialization -------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

json RunManifest::to_json() const {
  json j;
  j["artifact"] = "psgla";
  j["version"] = kArtifactVersion;
  j["command"] = command;
  j["config"] = config;
  j["seeds"] = {{"sampler", config.value("seed", std::uint64_t{0})},
                {"data", config.contains("data") ? config["data"].value("seed", std::uint64_t{0})
                                                 : std::uint64_t{0}}};
  j["wall_time_seconds"] = wall_time_seconds;
  json files = json::array();
  for (const auto& f : this->files)
    files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = files;
  j["warnings"] = warnings;
  return j;
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg,
                                         const std::optional<std::string>& cli_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return "psgla_out";
}

namespace {

std::vector<std::string> coord_names(const SpaceDescriptor& desc, const std::string& prefix) {
  std::vector<std::string> out;
  if (desc.is_matrix()) {
    for (int i = 0; i < desc.d; ++i)
      for (int j = i; j < desc.d; ++j)
        out.push_back(prefix + "_" + std::to_string(i) + "_" + std::to_string(j));
  } else if (desc.d == 1) {
    out.push_back(prefix);
  } else {
    for (int i = 0; i < desc.d; ++i) out.push_back(prefix + "_" + std::to_string(i));
  }
  return out;
}

void append_coords(std::string& line, const SpacePoint& p) {
  for (double v : p.coords()) {
    line += ',';
    line += format_double(v);
  }
}

OutputFile write_output(const std::filesystem::path& dir, const std::string& name,
                        const std::string& content) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + (dir / name).string());
  return {name, sha256_hex(content), content.size()};
}

void finish_manifest(RunManifest& m, const std::filesystem::path& dir,
                     std::chrono::steady_clock::time_point start) {
  m.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << m.to_json().dump(2) << '\n';
}

void note(std::ostream* os, const std::string& msg) {
  if (os) *os << msg << std::endl;
}

}  // namespace

std::vector<std::string> trace_header(const SpaceDescriptor& desc, bool duals) {
  std::vector<std::string> h{"step"};
  for (auto& n : coord_names(desc, "x")) h.push_back(n);
  if (duals)
    for (auto& n : coord_names(desc, "y")) h.push_back(n);
  h.push_back("feasible");
  return h;
}

std::string trace_csv(const ChainTrace& trace, const SpaceDescriptor& desc, bool duals) {
  std::string out;
  const auto header = trace_header(desc, duals);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (std::size_t r = 0; r < trace.size(); ++r) {
    std::string line = std::to_string(trace.steps[r]);
    append_coords(line, trace.primal[r]);
    if (duals) append_coords(line, trace.duals[r]);
    line += trace.feasible[r] ? ",1\n" : ",0\n";
    out += line;
  }
  return out;
}

std::vector<HistogramBin> histogram(std::vector<double> values, std::size_t bins) {
  if (values.empty()) throw std::invalid_argument("histogram of no values");
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  double left = quantile(0.001);
  double right = quantile(0.999);
  if (!(right > left)) {
    left -= 0.5;
    right += 0.5;
  }
  const double width = (right - left) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = left + width * static_cast<double>(b);
    out[b].right = b + 1 == bins ? right : left + width * static_cast<double>(b + 1);
    out[b].count = 0;
  }
  for (double v : values) {
    if (v < left || v > right) continue;
    auto b = static_cast<std::size_t>((v - left) / width);
    if (b >= bins) b = bins - 1;
    ++out[b].count;
  }
  return out;
}

RunManifest cmd_sample(const RunConfig& cfg, const std::filesystem::path& out_dir,
                       std::ostream* progress) {
  const auto start = std::chrono::steady_clock::now();
  PreparedRun run = prepare_run(cfg);
  RunManifest m;
  m.command = "sample";
  m.config = to_json(cfg);
  m.warnings = run.experiment.warnings;
  for (const auto& w : m.warnings) note(progress, "warning: " + w);

  std::vector<ChainTrace> traces;
  for (std::size_t c = 0; c < cfg.num_chains; ++c) {
    note(progress, "sampling chain " + std::to_string(c) + " (" +
                       std::string(to_string(cfg.sampler)) + ", " +
                       std::to_string(cfg.sampler_cfg.num_steps) + " steps)");
    traces.push_back(run_chain(cfg.sampler, run.problem, cfg.sampler_cfg, c));
  }
  std::filesystem::create_directories(out_dir);
  const auto desc = run.problem.space();
  for (std::size_t c = 0; c < traces.size(); ++c) {
    const std::string name = c == 0 ? "trace.csv" : "trace_chain" + std::to_string(c) + ".csv";
    m.files.push_back(
        write_output(out_dir, name, trace_csv(traces[c], desc, cfg.sampler_cfg.record_duals)));
  }
  finish_manifest(m, out_dir, start);
  return m;
}

RunManifest cmd_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                           std::ostream* progress) {
  const auto start = std::chrono::steady_clock::now();
  PreparedRun run = prepare_run(cfg);
  RunManifest m;
  m.command = "experiment";
  m.config = to_json(cfg);
  m.warnings = run.experiment.warnings;
  for (const auto& w : m.warnings) note(progress, "warning: " + w);

  const auto& scfg = cfg.sampler_cfg;
  const auto desc = run.problem.space();
  const bool one_d = desc.ambient_dim() == 1;
  EnsembleOptions opts;
  opts.num_chains = cfg.num_chains;
  opts.snapshot_steps = cfg.snapshot_steps;
  opts.snapshot_steps.push_back(scfg.num_steps);
  opts.keep_traces = one_d && cfg.num_chains == 1;
  opts.threads = cfg.threads;
  note(progress, "running " + std::to_string(cfg.num_chains) + " chain(s) of " +
                     std::string(to_string(cfg.sampler)) + " on " +
                     std::string(to_string(cfg.experiment)));
  const EnsembleResult ens = run_ensemble(cfg.sampler, run.problem, scfg, opts);

  const auto& exp = run.experiment;
  json report;
  report["experiment"] = std::string(to_string(cfg.experiment));
  report["sampler"] = std::string(to_string(cfg.sampler));
  report["space"] = desc.to_string();
  report["gamma"] = scfg.gamma;
  report["num_steps"] = scfg.num_steps;
  report["num_chains"] = cfg.num_chains;
  if (exp.truth) report["m_star"] = std::vector<double>(exp.truth->m_star.coords().begin(),
                                                        exp.truth->m_star.coords().end());

  json snaps = json::array();
  double min_feasible = 1.0;
  std::string convergence = "step,frobenius_to_mstar\n";
  for (const auto& s : ens.snapshots) {
    json sj;
    sj["step"] = s.step;
    sj["feasibility_fraction"] = s.feasibility_fraction;
    if (s.step > 0) min_feasible = std::min(min_feasible, s.feasibility_fraction);
    if (exp.oracle && one_d) {
      std::vector<double> xs;
      for (const auto& p : s.points) xs.push_back(p[0]);
      sj["w2_sq"] = wasserstein2_1d(xs, *exp.oracle);
      if (cfg.bootstrap_resamples > 0 && xs.size() > 1) {
        RngStream brng(scfg.seed, 0xB0075742ULL + static_cast<std::uint64_t>(s.step));
        sj["w2_sq_bootstrap_se"] =
            bootstrap_w2_standard_error(xs, *exp.oracle, cfg.bootstrap_resamples, brng);
      }
    }
    if (s.ergodic_mean) {
      sj["ergodic_mean"] =
          std::vector<double>(s.ergodic_mean->coords().begin(), s.ergodic_mean->coords().end());
      if (exp.truth) {
        const double fro = distance(*s.ergodic_mean, exp.truth->m_star);
        sj["frobenius_to_mstar"] = fro;
        convergence += std::to_string(s.step) + "," + format_double(fro) + "\n";
      }
    }
    snaps.push_back(sj);
  }
  report["snapshots"] = snaps;
  report["feasibility_fraction"] = min_feasible;
  const auto& last = ens.snapshots.back();
  if (last.ergodic_mean)
    report["ergodic_mean"] =
        std::vector<double>(last.ergodic_mean->coords().begin(), last.ergodic_mean->coords().end());

  // C from target draws when the law is known, else from the final cross section.
  std::vector<SpacePoint> c_points;
  if (exp.oracle && one_d) {
    constexpr std::size_t kDraws = 4096;
    for (std::size_t i = 0; i < kDraws; ++i)
      c_points.push_back(SpacePoint::scalar(
          exp.oracle->quantile((static_cast<double>(i) + 0.5) / static_cast<double>(kDraws))));
  } else {
    c_points = last.points;
  }
  try {
    const auto& f = *run.problem.smooth;
    const CEstimate ce = estimate_C(EmpiricalMeasure(c_points), *run.problem.nonsmooth, f.L(),
                                    desc.ambient_dim(), f.sigma_F(scfg.minibatch));
    report["C_estimate"] = {{"value", ce.value},
                            {"gradient_term", ce.gradient_term},
                            {"used", ce.used},
                            {"skipped", ce.skipped}};
  } catch (const DomainError&) {
    report["C_estimate"] = nullptr;
  }
  report["warnings"] = exp.warnings;

  std::filesystem::create_directories(out_dir);
  m.files.push_back(write_output(out_dir, "report.json", report.dump(2) + "\n"));
  if (one_d) {
    std::vector<double> values;
    if (!ens.traces.empty()) {
      for (const auto& p : ens.traces.front().primal) values.push_back(p[0]);
    } else {
      for (const auto& p : last.points) values.push_back(p[0]);
    }
    std::string csv = "bin_left,bin_right,count\n";
    for (const auto& b : histogram(std::move(values), cfg.histogram_bins))
      csv += format_double(b.left) + "," + format_double(b.right) + "," + std::to_string(b.count) +
             "\n";
    m.files.push_back(write_output(out_dir, "histogram.csv", csv));
  }
  if (exp.truth) m.files.push_back(write_output(out_dir, "convergence.csv", convergence));
  finish_manifest(m, out_dir, start);
  return m;
}

// --- Verify --------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxListedFailures = 5;

double scalar_conjugate_prox(double gamma, double v, double alpha, double beta) {
  // argmin_y G*(y)/gamma + (y - v)^2/2 with G*(y) = alpha log(alpha/(beta - y)) - alpha.
  if (alpha == 0.0) return std::min(v, beta);
  auto h = [&](double y) { return alpha / (gamma * (beta - y)) + y - v; };
  double hi = beta;
  double lo = std::min(v, beta) - 1.0;
  while (h(lo) >= 0.0) lo = beta - 2.0 * (beta - lo);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Box indicator whose prox is shifted off the box; for the mutation hook.
class CorruptedBox final : public NonsmoothPotential {
 public:
  explicit CorruptedBox(BoxIndicator inner) : inner_(std::move(inner)) {}
  SpaceDescriptor space() const override { return inner_.space(); }
  double evaluate(const SpacePoint& x) const override { return inner_.evaluate(x); }
  SpacePoint prox(double gamma, const SpacePoint& x) const override {
    SpacePoint p = inner_.prox(gamma, x);
    for (auto& c : p.coords()) c += 1e-3;
    return p;
  }
  bool in_domain(const SpacePoint& x) const override { return inner_.in_domain(x); }
  std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const override {
    return inner_.try_subgradient_min(x);
  }
  bool has_conjugate() const override { return true; }
  double conjugate_evaluate(const SpacePoint& y) const override {
    return inner_.conjugate_evaluate(y);
  }
  bool is_indicator() const override { return true; }
  std::string name() const override { return "box"; }
  const BoxIndicator& inner() const { return inner_; }

 private:
  BoxIndicator inner_;
};

struct VerifyContext {
  const VerifyOptions& opts;
  bool corrupt() const { return opts.mutation == "prox"; }
  std::size_t trials(std::size_t def) const { return opts.trials ? opts.trials : def; }
};

double log_uniform(RngStream& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

NonsmoothPtr random_box(RngStream& rng, int d, bool corrupt) {
  std::vector<double> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    const double a = 2.0 * rng.normal();
    const double w = 0.1 + 3.0 * rng.uniform();
    lo[i] = a;
    hi[i] = a + w;
  }
  BoxIndicator box(lo, hi);
  if (corrupt) return std::make_shared<CorruptedBox>(std::move(box));
  return std::make_shared<BoxIndicator>(std::move(box));
}

SpacePoint random_point(const SpaceDescriptor& desc, RngStream& rng) {
  SpacePoint x = gaussian_standard(desc, rng);
  return x *= log_uniform(rng, 0.1, 10.0);
}

void record(SuiteResult& r, bool ok, double value, bool worst_is_max, const std::string& ctx) {
  ++r.trials;
  if (r.trials == 1) {
    r.worst = value;
  } else {
    r.worst = worst_is_max ? std::max(r.worst, value) : std::min(r.worst, value);
  }
  if (!ok) {
    r.passed = false;
    if (r.failures.size() < kMaxListedFailures) r.failures.push_back(ctx);
  }
}

std::string replay(const VerifyContext& ctx, std::size_t trial) {
  return "seed " + std::to_string(ctx.opts.seed) + " trial " + std::to_string(trial);
}

SuiteResult suite_moreau(const VerifyContext& ctx) {
  SuiteResult r{"moreau", true, 0, 0.0, "||x - prox(x) - gamma y'|| <= 1e-10 max(1, ||x||)", {}};
  const std::size_t n = ctx.trials(1000);
  const double gammas[] = {0.01, 0.1, 1.0, 10.0};
  for (std::size_t t = 0; t < n; ++t) {
    RngStream rng(ctx.opts.seed, 0x4D4F5245ULL + t);
    const int d = 1 + static_cast<int>(rng.uniform_index(5));
    const int md = 2 + static_cast<int>(rng.uniform_index(3));
    const double alpha = rng.uniform() < 0.1 ? 0.0 : log_uniform(rng, 0.01, 10.0);
    const double beta = 2.0 * rng.normal();
    std::vector<NonsmoothPtr> catalog = {
        std::make_shared<ZeroNonsmooth>(SpaceDescriptor::flat(d)),
        random_box(rng, d, ctx.corrupt()),
        std::make_shared<PsdIndicator>(md),
        std::make_shared<LogBarrier>(alpha, beta),
        std::make_shared<LogDetBarrier>(md, alpha, beta),
        std::make_shared<L1Norm>(SpaceDescriptor::flat(d), log_uniform(rng, 0.01, 3.0)),
        std::make_shared<L1Norm>(SpaceDescriptor::symmetric(md), log_uniform(rng, 0.01, 3.0))};
    for (const auto& g : catalog) {
      const SpacePoint x = random_point(g->space(), rng);
      for (double gamma : gammas) {
        const SpacePoint y = conjugate_prox_reference(gamma, x, *g);
        SpacePoint resid = x - g->prox(gamma, x);
        resid.axpy(-gamma, y);
        const double err = norm(resid) / std::max(1.0, norm(x));
        record(r, err <= 1e-10, err, true,
               replay(ctx, t) + " " + g->name() + " gamma " + format_double(gamma) +
                   " relative error " + format_double(err));
      }
    }
  }
  return r;
}

// Minimizer over t > 0 of -alpha log t + beta t + (t - s)^2 / (2 gamma), by
// golden-section search. Points are compared through the exact difference
// phi(a) - phi(b), which keeps full precision near the minimum.
double golden_logbarrier(double gamma, double s, double alpha, double beta) {
  auto less = [&](double a, double b) {
    const double diff = (a - b) * (beta + (a + b - 2.0 * s) / (2.0 * gamma)) -
                        alpha * std::log1p((a - b) / b);
    return diff < 0.0;
  };
  const double shifted = s - gamma * beta;
  double lo = 0.0;
  double hi = std::max(shifted, 0.0) + std::sqrt(gamma * alpha) + 1.0;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    if (c > 0.0 && less(c, d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - invphi * (hi - lo);
    d = lo + invphi * (hi - lo);
  }
  return 0.5 * (lo + hi);
}

SuiteResult suite_spectral(const VerifyContext& ctx) {
  SuiteResult r{"spectral", true, 0, 0.0, "||prox_logdet - golden-section oracle||_F <= 1e-8", {}};
  const std::size_t n = ctx.trials(200);
  const int dims[] = {2, 5, 10};
  for (std::size_t t = 0; t < n; ++t) {
    RngStream rng(ctx.opts.seed, 0x53504543ULL + t);
    const int d = dims[t % 3];
    const double gamma = log_uniform(rng, 0.01, 10.0);
    const double alpha = log_uniform(rng, 0.01, 10.0);
    const double beta = rng.uniform();
    SpacePoint s = gaussian_standard(SpaceDescriptor::symmetric(d), rng);
    s *= log_uniform(rng, 0.3, 3.0);
    SpacePoint got = prox_logdet(gamma, s, alpha, beta);
    if (ctx.corrupt()) got[0] += 1e-3;
    const auto eig = sym_eigendecomposition(s);
    std::vector<double> vals;
    for (double lam : eig.eigenvalues) vals.push_back(golden_logbarrier(gamma, lam, alpha, beta));
    const double err = distance(got, eig.reassemble(vals));
    record(r, err <= 1e-8, err, true,
           replay(ctx, t) + " d " + std::to_string(d) + " error " + format_double(err));
  }
  return r;
}

SuiteResult suite_lemma2(const VerifyContext& ctx) {
  SuiteResult r{"lemma2", true, 0, 0.0, "one-step primal-dual residual >= -1e-10", {}};
  const std::size_t n = ctx.trials(10000);
  for (std::size_t t = 0; t < n; ++t) {
    RngStream rng(ctx.opts.seed, 0x4C454D32ULL + t);
    const int d = 1 + static_cast<int>(rng.uniform_index(5));
    const auto g = random_box(rng, d, ctx.corrupt());
    const double gamma = log_uniform(rng, 1e-3, 10.0);
    const auto desc = SpaceDescriptor::flat(d);
    const SpacePoint x = random_point(desc, rng);
    const SpacePoint xs = random_point(desc, rng);
    const SpacePoint ys = random_point(desc, rng);
    const double res = lemma2_residual(gamma, x, xs, ys, *g);
    record(r, res >= -1e-10, res, false,
           replay(ctx, t) + " gamma " + format_double(gamma) + " residual " + format_double(res));
  }
  return r;
}

SuiteResult suite_pdpg(const VerifyContext& ctx) {
  SuiteResult r{"pdpg", true, 0, 0.0, "pdpg residual and duality gap >= -1e-8", {}};
  const std::size_t n = ctx.trials(100);
  for (std::size_t t = 0; t < n; ++t) {
    RngStream rng(ctx.opts.seed, 0x50445047ULL + t);
    const int d = 2 + static_cast<int>(rng.uniform_index(4));
    DenseMatrix q(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) q(i, j) = rng.normal();
    DenseMatrix a = q.transpose() * q;
    for (int i = 0; i < d; ++i) a(i, i) += 0.5;
    std::vector<double> center(d);
    for (auto& c : center) c = 3.0 * rng.normal();
    const QuadraticForm f(a, center);
    const auto g = random_box(rng, d, ctx.corrupt());
    const double gamma = (0.1 + 0.9 * rng.uniform()) / f.L();
    const SpacePoint x0 = random_point(f.space(), rng);
    const PdpgReport rep = pdpg_gap_check(f, *g, gamma, x0, 50);
    const double worst = std::min(rep.min_residual, rep.min_gap);
    record(r, worst >= -1e-8, worst, false,
           replay(ctx, t) + " min residual " + format_double(rep.min_residual) + " min gap " +
               format_double(rep.min_gap));
  }
  return r;
}

SuiteResult suite_reductions(const VerifyContext& ctx) {
  SuiteResult r{"reductions", true, 0, 0.0,
                "psgla(G=0) == ula and spla(R=0) == psgla, bit for bit", {}};
  const std::size_t steps = ctx.trials(1000);
  RngStream data_rng(ctx.opts.seed, 0x52454455ULL);
  const int d = 3;
  std::vector<SpacePoint> data;
  for (int i = 0; i < 5; ++i) data.push_back(gaussian_standard(SpaceDescriptor::flat(d), data_rng));
  const QuadraticSum f(data);
  const ZeroNonsmooth zero(f.space());
  const auto box = random_box(data_rng, d, ctx.corrupt());
  const auto r_zero = LipschitzProxTerm::zero(f.space());
  SamplerConfig cfg;
  cfg.gamma = 0.05;
  cfg.minibatch = 2;

  RngStream a(ctx.opts.seed, 1), b(ctx.opts.seed, 1);
  SpacePoint xa(f.space()), xb(f.space());
  std::size_t diverged_at = 0;
  for (std::size_t k = 1; k <= steps && !diverged_at; ++k) {
    xa = step_psgla(xa, f, zero, cfg, a).next;
    xb = step_ula(xb, f, cfg, b);
    if (!(xa == xb)) diverged_at = k;
  }
  record(r, diverged_at == 0, static_cast<double>(diverged_at), true,
         "psgla(G=0) vs ula differ at step " + std::to_string(diverged_at));

  // The reference PSGLA always uses the exact box so a corrupted prox on the
  // SPLA side shows up as a mismatch.
  const auto exact = random_box(data_rng, d, false);
  const auto& spla_g = ctx.corrupt() ? *box : *exact;
  RngStream c(ctx.opts.seed, 2), e(ctx.opts.seed, 2);
  SpacePoint xc(f.space()), xe(f.space());
  diverged_at = 0;
  for (std::size_t k = 1; k <= steps && !diverged_at; ++k) {
    xc = step_spla(xc, f, r_zero, spla_g, cfg, c).next;
    xe = step_psgla(xe, f, *exact, cfg, e).next;
    if (!(xc == xe)) diverged_at = k;
  }
  record(r, diverged_at == 0, static_cast<double>(diverged_at), true,
         "spla(R=0) vs psgla differ at step " + std::to_string(diverged_at));
  return r;
}

}  // namespace

SpacePoint conjugate_prox_reference(double gamma, const SpacePoint& x,
                                    const NonsmoothPotential& g) {
  const SpacePoint v = (1.0 / gamma) * x;
  if (const auto* cb = dynamic_cast<const CorruptedBox*>(&g))
    return conjugate_prox_reference(gamma, x, cb->inner());
  if (dynamic_cast<const ZeroNonsmooth*>(&g)) return SpacePoint(x.descriptor());
  if (const auto* box = dynamic_cast<const BoxIndicator*>(&g)) {
    // G* is the support function; its prox is a shifted dead zone per coordinate.
    SpacePoint y(x.descriptor());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double hi = box->hi()[i] / gamma;
      const double lo = box->lo()[i] / gamma;
      y[i] = v[i] > hi ? v[i] - hi : (v[i] < lo ? v[i] - lo : 0.0);
    }
    return y;
  }
  if (dynamic_cast<const PsdIndicator*>(&g))
    return spectral_apply([](double t) { return std::min(t, 0.0); }, v);
  if (const auto* l1 = dynamic_cast<const L1Norm*>(&g)) {
    SpacePoint y = v;
    for (auto& c : y.coords()) c = std::clamp(c, -l1->weight(), l1->weight());
    return y;
  }
  if (const auto* lb = dynamic_cast<const LogBarrier*>(&g))
    return SpacePoint::scalar(scalar_conjugate_prox(gamma, v[0], lb->alpha(), lb->beta()));
  if (const auto* ld = dynamic_cast<const LogDetBarrier*>(&g)) {
    const double a = ld->alpha(), b = ld->beta();
    return spectral_apply([=](double t) { return scalar_conjugate_prox(gamma, t, a, b); }, v);
  }
  throw std::invalid_argument("no conjugate prox reference for " + g.name());
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"moreau", "spectral", "lemma2", "pdpg",
                                                 "reductions"};
  return names;
}

std::vector<SuiteResult> run_verify(const VerifyOptions& opts) {
  if (!opts.mutation.empty() && opts.mutation != "prox")
    throw ConfigError("unknown mutation '" + opts.mutation + "'");
  const auto& names = verify_suite_names();
  if (opts.suite != "all" && std::find(names.begin(), names.end(), opts.suite) == names.end())
    throw ConfigError("unknown suite '" + opts.suite + "'");
  const VerifyContext ctx{opts};
  std::vector<SuiteResult> out;
  auto want = [&](const char* n) { return opts.suite == "all" || opts.suite == n; };
  if (want("moreau")) out.push_back(suite_moreau(ctx));
  if (want("spectral")) out.push_back(suite_spectral(ctx));
  if (want("lemma2")) out.push_back(suite_lemma2(ctx));
  if (want("pdpg")) out.push_back(suite_pdpg(ctx));
  if (want("reductions")) out.push_back(suite_reductions(ctx));
  return out;
}

void print_verify_table(const std::vector<SuiteResult>& results, std::ostream& os) {
  os << std::left << std::setw(12) << "suite" << std::setw(6) << "ok" << std::setw(10)
     << "trials" << std::setw(24) << "worst" << "criterion\n";
  for (const auto& r : results) {
    os << std::left << std::setw(12) << r.name << std::setw(6) << (r.passed ? "PASS" : "FAIL")
       << std::setw(10) << r.trials << std::setw(24) << format_double(r.worst) << r.criterion
       << '\n';
    for (const auto& f : r.failures) os << "    failed: " << f << '\n';
  }
}

}  // namespace psgla
