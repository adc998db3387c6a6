#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "thermodiff/harness/commands.hpp"
#include "thermodiff/harness/config.hpp"

using namespace thermodiff::harness;
using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args, std::optional<std::string> seed_env = std::nullopt) {
  std::ostringstream out, err;
  const int code = run(args, out, err, seed_env);
  return {code, out.str(), err.str()};
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream is(csv);
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string c; std::getline(is, c, ',');) out.push_back(c);
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("thermodiff_test_" + name);
}

}  // namespace

TEST(Cli, ScalesJson) {
  const auto r = invoke({"scales", "--units", "natural", "--temperature", "1", "--mass", "1", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["scales"]["dp"], 1.0);
  EXPECT_EQ(j["scales"]["dx0"], 0.5);
  EXPECT_EQ(j["scales"]["D"], 0.5);
  EXPECT_EQ(j["scales"]["rate"], 2.0);
  EXPECT_EQ(j["metadata"]["config"]["command"], "scales");
  EXPECT_EQ(j["timestep"]["verdict"], "good");
}

TEST(Cli, RatesCsv) {
  const auto r = invoke({"rates", "--units", "natural", "--temperature", "1", "--mass", "1", "--dt", "1e-6",
                         "--steps", "100", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 101u);
  EXPECT_EQ(lines[0], "n,dt,t,rate_cond,rate_block,rate_exact");
  const auto first = cells(lines[1]);
  EXPECT_NEAR(std::stod(first[3]), 1.999998, 1e-6);
  EXPECT_EQ(first[5], "2");
}

TEST(Cli, EvolveReportsVariance) {
  const auto r = invoke({"evolve", "--t", "1", "--grid-points", "16384", "--grid-span-sigmas", "40"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  const auto& row = j["results"][0];
  EXPECT_EQ(row["t"], 1.0);
  EXPECT_LE(std::abs(row["variance"].get<double>() - 1.25) / 1.25, 1e-6);
  EXPECT_LE(row["variance_rel_err"].get<double>(), 1e-6);
}

TEST(Cli, EvolveGridTooSmallIsComputationFailure) {
  const auto r = invoke({"evolve", "--grid-span", "2"});
  EXPECT_EQ(r.code, kExitComputationFailure);
  EXPECT_NE(r.err.find("GridTooSmall"), std::string::npos);
}

TEST(Cli, NegativeDtIsUsageError) {
  const auto r = invoke({"sample", "--particles", "100", "--steps", "10", "--dt", "-1"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--dt"), std::string::npos);
  EXPECT_NE(r.err.find("fix:"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, OtherUsageErrors) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"scales", "--units", "cgs"}).code, kExitUsage);
  EXPECT_EQ(invoke({"scales", "--temperature", "abc"}).code, kExitUsage);
  EXPECT_EQ(invoke({"scales", "--hbar", "2"}).code, kExitUsage);
  EXPECT_EQ(invoke({"sample", "--particles", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"estimate", "--steps", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"evolve", "--grid-points", "1000"}).code, kExitUsage);
  EXPECT_EQ(invoke({"scales", "--no-such-flag", "1"}).code, kExitUsage);
  const auto r = invoke({"sweep", "--dt-list", ""});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("dt-list"), std::string::npos);
}

TEST(Cli, Help) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--dt"), std::string::npos);
}

TEST(Cli, VarianceCsv) {
  const auto r = invoke({"variance", "--t-list", "0,1,3"});
  ASSERT_EQ(r.code, 0);
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "t,quantum_static,quantum_drift,classical,total,factored,entropy");
  EXPECT_EQ(cells(lines[2])[4], "2.25");
  EXPECT_EQ(cells(lines[3])[4], "12.25");
}

TEST(Cli, SampleStatsAndEnsembleDump) {
  auto r = invoke({"sample", "--particles", "1000", "--steps", "3", "--dt", "0.01"});
  ASSERT_EQ(r.code, 0);
  auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "step,t,mean,var,se,var_analytic");

  r = invoke({"sample", "--particles", "10", "--steps", "2", "--dt", "0.01", "--dump", "ensemble"});
  ASSERT_EQ(r.code, 0);
  lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 31u);
  EXPECT_EQ(lines[0], "particle,step,t,x");
}

TEST(Cli, EstimateCsv) {
  const auto r = invoke({"estimate", "--particles", "20000", "--steps", "3", "--dt", "0.001"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "n,t,rate,se,rate_analytic");
  EXPECT_NEAR(std::stod(cells(lines[1])[4]), 1.998002662673, 1e-9);
}

TEST(Cli, SweepGapsShrinkWithStep) {
  const auto r = invoke({"sweep", "--dt-list", "1e-2,1e-4,1e-6", "--n-list", "0"});
  ASSERT_EQ(r.code, 0);
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "n,dt,n_dt,rate_cond,rate_block,rate_exact,gap_cond,gap_block");
  std::vector<double> ratio;
  for (int i = 1; i <= 3; ++i) {
    const auto c = cells(lines[i]);
    ratio.push_back(std::stod(c[6]) / std::stod(c[1]));
  }
  // gap ~ 2 dt (second-order term of log1p)
  EXPECT_NEAR(ratio[0], 1.973727038202870, 1e-10);
  EXPECT_NEAR(ratio[2], 1.999997333337333, 1e-10);
}

TEST(Cli, SweepFixedElapsedTime) {
  const auto r = invoke({"sweep", "--dt-list", "0.5,0.05,0.005", "--ndt-list", "0.5"});
  ASSERT_EQ(r.code, 0);
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  for (int i = 1; i <= 3; ++i) EXPECT_NEAR(std::stod(cells(lines[i])[4]), 1.386294361119891, 1e-12);
}

TEST(Cli, SweepRecordsCellErrorsAndDiagnostics) {
  const auto r = invoke({"sweep", "--dt-list", "0,1e-2", "--n-list", "0,1,10"});
  ASSERT_EQ(r.code, 0);
  const auto lines = data_lines(r.out);
  EXPECT_EQ(cells(lines[1])[3], "error:NonPositiveDt");
  const auto pos = r.out.find("# diagnostics: ");
  ASSERT_NE(pos, std::string::npos);
  const auto d = json::parse(r.out.substr(pos + 15));
  EXPECT_TRUE(d["conditional_monotone_all"].get<bool>());
  EXPECT_TRUE(d["block_monotone_in_n_dt"].get<bool>());
  EXPECT_TRUE(d["all_rates_at_most_exact"].get<bool>());
}

TEST(Config, DefaultsAndEnvironmentSeed) {
  auto c = parse_run_config({"scales"}, std::nullopt);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->seed, kDefaultSeed);
  c = parse_run_config({"scales"}, std::string("99"));
  EXPECT_EQ(c->seed, 99u);
  c = parse_run_config({"scales", "--seed", "5"}, std::string("99"));
  EXPECT_EQ(c->seed, 5u);
  EXPECT_THROW(parse_run_config({"scales"}, std::string("-3")), UsageError);
}

TEST(Config, DefaultFormatPerCommand) {
  EXPECT_EQ(parse_run_config({"scales"}, std::nullopt)->format, Format::json);
  EXPECT_EQ(parse_run_config({"rates"}, std::nullopt)->format, Format::csv);
}

TEST(Config, FileThenFlags) {
  const auto path = temp_file("precedence.cfg");
  {
    std::ofstream f(path);
    f << "# run file\ncommand=rates\ndt = 0.5\nsteps=7\nseed=11\n";
  }
  auto c = parse_run_config({"--config", path.string(), "--dt", "0.1"}, std::string("99"));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->command, Command::rates);
  EXPECT_EQ(c->dt, 0.1);
  EXPECT_EQ(c->steps, 7);
  EXPECT_EQ(c->seed, 11u);
  std::filesystem::remove(path);
  EXPECT_THROW(parse_run_config({"--config", "/no/such/file.cfg"}, std::nullopt), UsageError);
}

TEST(Config, SerializedConfigReproducesRun) {
  const std::vector<std::string> args = {"rates", "--dt", "3e-3", "--steps", "12", "--temperature", "2.5",
                                         "--mass", "0.3"};
  const auto first = invoke(args);
  ASSERT_EQ(first.code, 0);

  // the CSV preamble is itself a config file
  const auto path = temp_file("preamble.cfg");
  {
    std::ofstream f(path);
    std::istringstream is(first.out);
    for (std::string line; std::getline(is, line);) {
      if (line.rfind("# ", 0) == 0 && line.find('=') != std::string::npos) f << line.substr(2) << '\n';
    }
  }
  const auto second = invoke({"--config", path.string()});
  std::filesystem::remove(path);
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(first.out, second.out);
}

TEST(Config, SerializeRoundTrip) {
  auto c = parse_run_config({"sweep", "--units", "si", "--temperature", "300", "--mass", "9.1093837e-31",
                             "--hbar", "1.05e-34", "--dt-list", "1e-15,1e-16", "--ndt-list", "1e-14",
                             "--estimator", "nn", "--scheme", "classical_only", "--grid-span", "3.5"},
                            std::nullopt);
  ASSERT_TRUE(c);
  const auto path = temp_file("roundtrip.cfg");
  {
    std::ofstream f(path);
    for (const auto& [k, v] : serialize(*c)) f << k << '=' << v << '\n';
  }
  const auto again = parse_run_config({"--config", path.string()}, std::nullopt);
  std::filesystem::remove(path);
  ASSERT_TRUE(again);
  EXPECT_EQ(serialize(*again), serialize(*c));
  EXPECT_EQ(again->hbar, 1.05e-34);
  EXPECT_EQ(again->mass, 9.1093837e-31);
}

TEST(Config, JsonMetadataEmbedsConfig) {
  const auto r = invoke({"scales", "--temperature", "3"});
  const auto j = json::parse(r.out);
  const auto c = parse_run_config({"scales", "--temperature", "3"}, std::nullopt);
  for (const auto& [k, v] : serialize(*c)) EXPECT_EQ(j["metadata"]["config"][k], v) << k;
}

TEST(Artifact, OutputFileIsWrittenAtomically) {
  const auto path = temp_file("out.csv");
  std::filesystem::remove(path);
  const auto r = invoke({"rates", "--steps", "3", "--output", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::stringstream content;
  content << f.rdbuf();
  EXPECT_EQ(data_lines(content.str()).size(), 4u);
  for (const auto& entry : std::filesystem::directory_iterator(path.parent_path())) {
    EXPECT_EQ(entry.path().string().find(path.string() + ".tmp"), std::string::npos);
  }
  std::filesystem::remove(path);
}
