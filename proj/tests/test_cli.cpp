#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "coneflow/cli.hpp"
#include "coneflow/error.hpp"
#include "coneflow/textio.hpp"

using namespace coneflow;
using namespace coneflow::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("coneflow_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string lookup(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  return {};
}

RunConfig parsed(const KeyValues& flags) { return parse_config({std::nullopt, flags, true}).config; }

}  // namespace

TEST(ParseConfig, Defaults) {
  const ParsedConfig p = parse_config({});
  EXPECT_EQ(p.config.scenario, Scenario::onedim_blowup);
  EXPECT_EQ(p.config.epsilon, 1.0);
  EXPECT_EQ(p.config.n, 513);
  EXPECT_EQ(p.config.preset, "paper-blowup");
  EXPECT_EQ(p.config.cfl, 0.4);
  EXPECT_TRUE(p.warnings.empty());
}

TEST(ParseConfig, ScenarioDefaults) {
  const RunConfig e = parsed({{"scenario", "elliptic-validate"}});
  EXPECT_EQ(e.nr, 33);
  EXPECT_EQ(e.ntheta, 17);
  const RunConfig n = parsed({{"scenario", "axisym-noswirl"}});
  EXPECT_EQ(n.preset, "sine");
  EXPECT_EQ(n.cfl, 0.8);
  ASSERT_TRUE(n.t_end.has_value());
  EXPECT_EQ(*n.t_end, 2.0);
  EXPECT_FALSE(parsed({{"scenario", "axisym-blowup"}}).t_end.has_value());
  EXPECT_EQ(parsed({{"scenario", "axisym-blowup"}, {"cfl", "0.5"}}).cfl, 0.5);
}

TEST(ParseConfig, NegativeEpsilonNamesTheKey) {
  try {
    (void)parsed({{"epsilon", "-1"}});
    FAIL() << "accepted epsilon = -1";
  } catch (const InvalidParameter& e) {
    EXPECT_EQ(e.name(), "epsilon");
  }
}

TEST(ParseConfig, MalformedValuesNameTheKey) {
  for (const auto& [k, v] : KeyValues{{"n", "12.5"}, {"epsilon", "abc"}, {"scenario", "warp"}, {"advection", "x"}}) {
    try {
      (void)parsed({{k, v}});
      FAIL() << k << "=" << v << " accepted";
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key(), k);
    }
  }
}

TEST(ParseConfig, FlagOverridesFileWithWarning) {
  TempDir dir("precedence");
  write_text(dir.path() / "run.cfg", "# run\nscenario = onedim-blowup\nt_end = 1\n\nn = 65\n");
  const ParsedConfig p = parse_config({dir.path() / "run.cfg", {{"t_end", "2"}}, true});
  ASSERT_TRUE(p.config.t_end.has_value());
  EXPECT_EQ(*p.config.t_end, 2.0);
  EXPECT_EQ(p.config.n, 65);
  ASSERT_EQ(p.warnings.size(), 1u);
  EXPECT_NE(p.warnings[0].find("t_end"), std::string::npos);
  EXPECT_TRUE(parse_config({dir.path() / "run.cfg", {{"t_end", "1"}}, true}).warnings.empty());
}

TEST(ParseConfig, UnknownKeys) {
  try {
    (void)parse_config({std::nullopt, {{"epsilonn", "1"}}, true});
    FAIL() << "unknown key accepted in strict mode";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "epsilonn");
  }
  const ParsedConfig p = parse_config({std::nullopt, {{"epsilonn", "1"}}, false});
  ASSERT_EQ(p.warnings.size(), 1u);
  EXPECT_NE(p.warnings[0].find("epsilonn"), std::string::npos);
}

TEST(ParseConfig, FileErrors) {
  TempDir dir("file_errors");
  write_text(dir.path() / "dup.cfg", "n = 65\nn = 129\n");
  EXPECT_THROW((void)parse_config({dir.path() / "dup.cfg", {}, true}), ConfigError);
  EXPECT_THROW((void)parse_config({dir.path() / "missing.cfg", {}, true}), ConfigError);
  EXPECT_THROW((void)parsed({{"preset", "custom"}}), ConfigError);
}

TEST(ParseConfig, KeyValuesRoundTrip) {
  const RunConfig c = parsed({{"epsilon", "0.25"}, {"r_min", "4e-4"}, {"t_end", "1.5"}});
  const KeyValues kv = to_key_values(c);
  EXPECT_EQ(kv.size(), config_keys().size());
  EXPECT_EQ(std::stod(lookup(kv, "r_min")), 4e-4);
  RunConfig back;
  for (const auto& [k, v] : kv)
    if (!v.empty()) set_key(back, k, v);
  EXPECT_EQ(to_key_values(back), kv);
}

TEST(ParseSweep, Forms) {
  const Sweep s = parse_sweep("epsilon=0.5,1,2");
  EXPECT_EQ(s.key, "epsilon");
  EXPECT_EQ(s.values, (std::vector<std::string>{"0.5", "1", "2"}));
  EXPECT_THROW((void)parse_sweep("epsilon"), ConfigError);
  EXPECT_THROW((void)parse_sweep("bogus=1,2"), ConfigError);
  EXPECT_THROW((void)parse_sweep("epsilon=1,,2"), ConfigError);
  EXPECT_THROW((void)parse_sweep("out=a,b"), ConfigError);
}

TEST(ExitCodes, ErrorKindsMapToContract) {
  EXPECT_EQ(exit_code_for(InvalidParameter("epsilon", "")), kExitConfig);
  EXPECT_EQ(exit_code_for(ConfigError("n", "")), kExitConfig);
  EXPECT_EQ(exit_code_for(StepRejected(1e-3, "")), kExitCflExhausted);
  EXPECT_EQ(exit_code_for(Error(ErrorKind::io, "")), kExitIo);
  EXPECT_EQ(exit_code_for(Error(ErrorKind::solver_failure, "")), kExitSolverFailure);
  EXPECT_EQ(exit_code_for(Error(ErrorKind::support_escape, "")), kExitSolverFailure);
  EXPECT_EQ(exit_code_for(std::runtime_error("")), kExitFailure);
}

TEST(CliRun, OnedimBlowupWritesArtifacts) {
  TempDir dir("onedim");
  RunConfig c = parsed({{"n", "65"}});
  c.out = dir.path();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitBlowup) << log.str();
  const CsvTable t = read_csv(dir.path() / "diagnostics.csv");
  const std::size_t ig = t.column("integral_g");
  for (std::size_t k = 1; k < t.rows.size(); ++k) EXPECT_GE(t.rows[k][ig] - t.rows[k - 1][ig], -1e-8);
  EXPECT_TRUE(fs::exists(dir.path() / "final_state.csv"));
  const KeyValues summary = read_key_values(dir.path() / "summary.txt");
  EXPECT_EQ(lookup(summary, "reason"), "blowup");
  EXPECT_EQ(lookup(summary, "exit_code"), "3");
  EXPECT_NE(lookup(summary, "t_star"), "none");
}

TEST(CliRun, ManifestRecordsEveryKnob) {
  TempDir dir("manifest");
  RunConfig c = parsed({{"n", "33"}, {"t_end", "0.1"}});
  c.out = dir.path();
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  const KeyValues m = read_key_values(dir.path() / "manifest.txt");
  std::set<std::string> keys;
  for (const auto& [k, v] : m) keys.insert(k);
  for (const std::string& k : config_keys()) EXPECT_TRUE(keys.count(k)) << k;
  for (const char* k : {"version", "beta", "l"}) EXPECT_TRUE(keys.count(k)) << k;
  EXPECT_EQ(lookup(m, "n"), "33");
  EXPECT_EQ(lookup(m, "t_end"), "0.1");
}

TEST(CliRun, AxisOnedimFinishes) {
  TempDir dir("axis");
  RunConfig c = parsed({{"scenario", "axis-onedim"}, {"n", "65"}, {"t_end", "0.5"}});
  c.out = dir.path();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitOk) << log.str();
  EXPECT_TRUE(fs::exists(dir.path() / "diagnostics.csv"));
}

TEST(CliRun, EllipticValidatePasses) {
  TempDir dir("elliptic");
  RunConfig c = parsed({{"scenario", "elliptic-validate"}, {"nr", "17"}, {"ntheta", "9"}});
  c.out = dir.path();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitOk) << log.str();
  const CsvTable t = read_csv(dir.path() / "convergence.csv");
  EXPECT_EQ(t.rows.size(), 3u);
  const KeyValues s = read_key_values(dir.path() / "summary.txt");
  EXPECT_EQ(lookup(s, "verdict"), "pass");
  EXPECT_GE(std::stod(lookup(s, "order_fd")), 1.8);
}

TEST(CliRun, NoswirlConservesAtSmallScale) {
  TempDir dir("noswirl");
  RunConfig c =
      parsed({{"scenario", "axisym-noswirl"}, {"nr", "64"}, {"ntheta", "17"}, {"r_min", "4e-3"}, {"t_end", "0.5"}});
  c.out = dir.path();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitOk) << log.str();
  const CsvTable t = read_csv(dir.path() / "diagnostics.csv");
  for (const char* col : {"sup_omega_over_r", "l1_omega", "energy"}) {
    const std::size_t k = t.column(col);
    const double a = t.rows.front()[k], b = t.rows.back()[k];
    EXPECT_LE(std::fabs(b - a) / a, 0.02) << col;
  }
  for (const char* f : {"final_omega.hdr", "final_omega.bin", "final_u.bin", "final_psi.bin"})
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
}

TEST(CliRun, CustomInitialDataMustMatchNodes) {
  TempDir dir("custom");
  {
    std::ofstream f(dir.path() / "bad.csv");
    f << "theta,g,P\n0,0,0\n0.5,0,0.25\n";
  }
  RunConfig c = parsed({{"n", "33"}, {"preset", "custom"}, {"initial_data", (dir.path() / "bad.csv").string()}});
  c.out = dir.path() / "out";
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitConfig) << log.str();
  c.initial_data = dir.path() / "absent.csv";
  EXPECT_EQ(run(c, log), kExitIo) << log.str();
}

TEST(CliRun, UnwritableOutputIsAnIoError) {
  TempDir dir("io");
  write_text(dir.path() / "file", "x");
  RunConfig c = parsed({{"n", "33"}});
  c.out = dir.path() / "file" / "sub";
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitIo);
  EXPECT_NE(log.str().find("error"), std::string::npos);
}

TEST(CliRun, RepeatedRunsAreByteIdentical) {
  TempDir dir("determinism");
  RunConfig c = parsed({{"scenario", "axisym-noswirl"}, {"nr", "40"}, {"ntheta", "9"}, {"r_min", "1e-2"},
                        {"t_end", "0.2"}});
  std::ostringstream log;
  c.out = dir.path() / "a";
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  c.out = dir.path() / "b";
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  for (const char* f : {"diagnostics.csv", "final_omega.bin", "summary.txt"})
    EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;
}

TEST(Sweep, RunsEachValueInItsOwnDirectory) {
  TempDir dir("sweep");
  const ConfigSources base{std::nullopt, {{"n", "33"}, {"t_end", "0.2"}, {"out", dir.path().string()}}, true};
  std::ostringstream log;
  EXPECT_EQ(run_sweep(base, parse_sweep("epsilon=0.5,1,2"), 3, log), kExitOk) << log.str();
  for (const char* d : {"epsilon=0.5", "epsilon=1", "epsilon=2"}) {
    EXPECT_TRUE(fs::exists(dir.path() / d / "manifest.txt")) << d;
    EXPECT_EQ(lookup(read_key_values(dir.path() / d / "manifest.txt"), "out"), (dir.path() / d).string());
  }
  EXPECT_EQ(slurp(dir.path() / "sweep.csv"), "index,epsilon,exit_code\n0,0.5,0\n1,1,0\n2,2,0\n");
}

TEST(Sweep, ReportsWorstFailure) {
  TempDir dir("sweep_fail");
  const ConfigSources base{std::nullopt, {{"n", "33"}, {"t_end", "0.2"}, {"out", dir.path().string()}}, true};
  std::ostringstream log;
  EXPECT_EQ(run_sweep(base, parse_sweep("epsilon=1,-1"), 2, log), kExitConfig);
  EXPECT_EQ(slurp(dir.path() / "sweep.csv"), "index,epsilon,exit_code\n0,1,0\n1,-1,2\n");
}
