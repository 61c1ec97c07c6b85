#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "psgla/harness.hpp"

using namespace psgla;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("psgla_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::size_t columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

std::string message_of(const json& j) {
  try {
    parse_run_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, RejectsBadInput) {
  EXPECT_NE(message_of(json::parse(R"({"experiment": "trunc-gauss", "sampler": "psgla", "gamma": 0.1, "num_steps": 10, "bogus": 1})")).find("bogus"),
            std::string::npos);
  EXPECT_NE(message_of(json::parse(R"({"experiment": "trunc-gauss", "sampler": "myula", "gamma": 0.1, "num_steps": 10})"))
                .find("myula_lambda"),
            std::string::npos);
  EXPECT_NE(message_of(json::parse(R"({"experiment": "trunc-gauss", "sampler": "psgla", "gamma": 0.1, "num_steps": 10, "trunc": {"c": 1}})")), "");
  EXPECT_NE(message_of(json::parse(R"({"gamma": "big", "num_steps": 10})")), "");
  EXPECT_NE(message_of(json::parse(
                R"({"experiment": "wishart-precision", "sampler": "projected", "gamma": 0.1, "num_steps": 10})")),
            "");
  EXPECT_EQ(message_of(json::parse(R"({"experiment": "trunc-gauss", "sampler": "psgla", "gamma": 0.1, "num_steps": 10})")), "");
}

TEST(Config, RoundTripsThroughJson) {
  const auto c = parse_run_config(json::parse(
      R"({"experiment": "wishart-precision", "sampler": "psgla", "gamma": 0.05, "num_steps": 30, "data": {"d": 2, "n": 5}})"));
  const auto again = parse_run_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
  EXPECT_DOUBLE_EQ(c.nu_value(), 6.0);
}

TEST(Sample, WritesTraceAndManifest) {
  const auto dir = scratch("sample");
  const auto c = parse_run_config(json::parse(
      R"({"experiment": "wishart-precision", "sampler": "psgla", "gamma": 0.05, "num_steps": 10, "data": {"d": 2, "n": 5}})"));
  const auto m = cmd_sample(c, dir);
  const auto rows = lines(slurp(dir / "trace.csv"));
  ASSERT_EQ(rows.size(), 11u);
  // step, 3 packed coordinates, feasible
  EXPECT_EQ(columns(rows[0]), 5u);
  for (const auto& r : rows) EXPECT_EQ(columns(r), columns(rows[0]));
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["files"].size(), m.files.size());
  EXPECT_EQ(m.files.front().sha256, sha256_hex(slurp(dir / "trace.csv")));
}

TEST(Experiment, DeterministicReportAndConvergence) {
  const auto c = parse_run_config(json::parse(R"({
    "experiment": "wishart-precision", "sampler": "psgla", "gamma": 0.05, "num_steps": 300, "num_chains": 3,
    "snapshot_steps": [10, 100], "data": {"d": 2, "n": 10, "seed": 4}, "seed": 5})"));
  const auto a = scratch("exp_a"), b = scratch("exp_b");
  const auto ma = cmd_experiment(c, a);
  const auto mb = cmd_experiment(c, b);
  ASSERT_EQ(ma.files.size(), mb.files.size());
  for (std::size_t i = 0; i < ma.files.size(); ++i) EXPECT_EQ(ma.files[i].sha256, mb.files[i].sha256);

  const auto report = json::parse(slurp(a / "report.json"));
  const auto truth = posterior_ground_truth(make_wishart_spec(2, 6.0, 10, 4));
  const auto m_star = report["m_star"].get<std::vector<double>>();
  ASSERT_EQ(m_star.size(), truth.m_star.coords().size());
  for (std::size_t i = 0; i < m_star.size(); ++i) EXPECT_DOUBLE_EQ(m_star[i], truth.m_star.coords()[i]);

  const auto conv = lines(slurp(a / "convergence.csv"));
  ASSERT_GE(conv.size(), 3u);
  for (std::size_t i = 1; i < conv.size(); ++i) {
    const double v = std::stod(conv[i].substr(conv[i].find(',') + 1));
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
  }
}

TEST(OutputDir, Precedence) {
  RunConfig c;
  EXPECT_EQ(resolve_output_dir(c, std::nullopt), fs::path("psgla_out"));
  c.output_dir = "from_config";
  EXPECT_EQ(resolve_output_dir(c, std::nullopt), fs::path("from_config"));
  ::setenv(kOutDirEnv, "from_env", 1);
  EXPECT_EQ(resolve_output_dir(c, std::nullopt), fs::path("from_env"));
  EXPECT_EQ(resolve_output_dir(c, std::string("from_cli")), fs::path("from_cli"));
  ::unsetenv(kOutDirEnv);
}

TEST(Histogram, CountsEverySampleInRange) {
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(i / 999.0);
  const auto h = histogram(v, 10);
  ASSERT_EQ(h.size(), 10u);
  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  EXPECT_GE(total, 990u);
  EXPECT_LE(total, 1000u);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

#ifdef PSGLA_CLI_PATH
namespace {
int run_cli(const std::string& args) {
  const std::string cmd = std::string(PSGLA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}
}  // namespace

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  {
    std::ofstream(dir / "bad.json") << R"({"experiment": "trunc-gauss", "sampler": "psgla", "gamma": 0.1, "num_steps": 10, "bogus": true})";
    std::ofstream(dir / "good.json") << R"({"experiment": "trunc-gauss", "sampler": "psgla", "gamma": 0.1, "num_steps": 10})";
  }
  EXPECT_EQ(run_cli("sample --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("sample --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("sample --config " + (dir / "good.json").string() + " --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "trace.csv"));
  EXPECT_EQ(run_cli("verify --suite lemma2 --trials 2000"), 0);
  EXPECT_EQ(run_cli("verify --suite moreau --trials 50 --mutate prox"), 1);
  EXPECT_EQ(run_cli("verify --suite nope"), 2);
}
#endif
