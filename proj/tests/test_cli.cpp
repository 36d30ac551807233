#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "config.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ddtool_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = ddtool::run_cli(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  void write(const fs::path& p, const std::string& text) const { std::ofstream(p) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, ddtool::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, ddtool::kExitUsage);
  EXPECT_EQ(run({"generate"}).code, ddtool::kExitUsage);
  EXPECT_EQ(run({"generate", "2", "--jacobian", "magic"}).code, ddtool::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, ddtool::kExitSuccess);
}

TEST_F(CliTest, GenerateThenVerifyRoundTrip) {
  const auto g = run({"generate", "3", "--out", out("gen")});
  ASSERT_EQ(g.code, ddtool::kExitSuccess) << g.err;
  const auto file = dir_ / "gen" / "schedule_K3.json";
  ASSERT_TRUE(fs::exists(file));
  const auto v = run({"verify", file.string(), "--out", out("ver")});
  EXPECT_EQ(v.code, ddtool::kExitSuccess) << v.out << v.err;
  EXPECT_NE(v.out.find("PASS"), std::string::npos);
  EXPECT_EQ(run({"verify", file.string(), "--K", "4", "--out", out("ver")}).code, ddtool::kExitVerificationFailed);
}

TEST_F(CliTest, VerifyRejectsMalformedInput) {
  write(dir_ / "bad.json", "{\"version\": 7}");
  EXPECT_EQ(run({"verify", (dir_ / "bad.json").string(), "--out", out("v")}).code, ddtool::kExitUsage);
  EXPECT_EQ(run({"verify", (dir_ / "missing.json").string(), "--out", out("v")}).code, ddtool::kExitUsage);
}

TEST_F(CliTest, VerifyAxesOption) {
  write(dir_ / "echo.json",
        R"({"version":1,"K":1,"group":["I","X"],"cut_times":[0.5],"labels":[0,1],"cyclic_closure":true})");
  const auto path = (dir_ / "echo.json").string();
  EXPECT_EQ(run({"verify", path, "--axes", "Y,Z", "--out", out("v")}).code, ddtool::kExitSuccess);
  EXPECT_EQ(run({"verify", path, "--axes", "Y,Z", "--K", "2", "--out", out("v")}).code,
            ddtool::kExitVerificationFailed);
}

TEST_F(CliTest, TableSchedulesPassVerification) {
  ASSERT_EQ(run({"table-s1", "--K", "5", "--out", out("t")}).code, ddtool::kExitSuccess);
  const auto file = dir_ / "t" / "schedule_table_s1_K5.json";
  EXPECT_EQ(run({"verify", file.string(), "--tol", "1e-9", "--out", out("v")}).code, ddtool::kExitSuccess);
  EXPECT_EQ(run({"table-s1", "--K", "9", "--out", out("t")}).code, ddtool::kExitUsage);
}

TEST_F(CliTest, BudgetExhaustionIsNumericalFailure) {
  const auto r = run({"generate", "6", "--restarts", "1", "--max-evals", "2", "--out", out("g")});
  EXPECT_EQ(r.code, ddtool::kExitNumerical);
  EXPECT_TRUE(fs::exists(dir_ / "g" / "schedule_K6.json"));
}

TEST_F(CliTest, ManifestRecordsEveryRunWithDigests) {
  ASSERT_EQ(run({"generate", "2", "--out", out("m")}).code, 0);
  ASSERT_EQ(run({"generate", "2", "--seed", "5", "--output", "other.json", "--out", out("m")}).code, 0);
  const auto runs = ddtool::read_manifest(dir_ / "m");
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[1]["master_seed"], 5);
  EXPECT_EQ(runs[0]["exit_code"], 0);
  EXPECT_EQ(runs[0]["command_line"][1], "generate");
  const auto& o = runs[1]["outputs"][0];
  EXPECT_EQ(o["sha256"].get<std::string>(), ddtool::sha256_file(o["path"].get<std::string>()));
  EXPECT_FALSE(runs[0]["version"].get<std::string>().empty());
}

TEST_F(CliTest, Sha256KnownVector) {
  EXPECT_EQ(ddtool::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(CliTest, SweepOutputIsReproducible) {
  write(dir_ / "s.cfg",
        "format = hodd-sweep/1\n"
        "sequences = table-s1:2, qdd:2\n"
        "J = 1e-3\n"
        "T_min = 1e-3\nT_max = 1\nT_points = 16\n"
        "seeds = 1, 2\n"
        "metric = mean_trace_distance\nstates = 4\nmaster_seed = 3\n");
  const auto cfg = (dir_ / "s.cfg").string();
  ASSERT_EQ(run({"sweep", cfg, "--out", out("a")}).code, 0);
  ASSERT_EQ(run({"sweep", cfg, "--jobs", "2", "--out", out("b")}).code, 0);
  const auto a = slurp(dir_ / "a" / "sweep_seed3.csv");
  EXPECT_EQ(a, slurp(dir_ / "b" / "sweep_seed3.csv"));
  EXPECT_EQ(ddtool::sha256_file(dir_ / "a" / "sweep_seed3.json"), ddtool::sha256_file(dir_ / "b" / "sweep_seed3.json"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 16 * 2);
  const auto runs = ddtool::read_manifest(dir_ / "a");
  EXPECT_EQ(runs[0]["inputs"][0]["sha256"].get<std::string>(), ddtool::sha256_file(dir_ / "s.cfg"));
}

TEST_F(CliTest, SweepConfigErrors) {
  write(dir_ / "wrong.cfg", "format = hodd-sweep/2\n");
  EXPECT_EQ(run({"sweep", (dir_ / "wrong.cfg").string(), "--out", out("x")}).code, ddtool::kExitUsage);
  write(dir_ / "unknown.cfg",
        "format = hodd-sweep/1\nsequences = xy4\nJ = 1e-3\nT_min = 0.1\nT_max = 1\nT_points = 5\nbogus = 1\n");
  EXPECT_EQ(run({"sweep", (dir_ / "unknown.cfg").string(), "--out", out("x")}).code, ddtool::kExitUsage);
  write(dir_ / "seq.cfg", "format = hodd-sweep/1\nsequences = nope:3\nJ = 1e-3\nT_min = 0.1\nT_max = 1\nT_points = 5\n");
  EXPECT_EQ(run({"sweep", (dir_ / "seq.cfg").string(), "--out", out("x")}).code, ddtool::kExitUsage);
}

TEST_F(CliTest, OutputRootFromEnvironment) {
  ::setenv(ddtool::kOutputRootEnv, dir_.c_str(), 1);
  const auto r = run({"certify", "--K", "3", "--flips", "0.3,0.6"});
  ::unsetenv(ddtool::kOutputRootEnv);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "certify" / "certify_K3.json"));
  EXPECT_TRUE(fs::exists(dir_ / "certify" / "manifest.json"));
}

TEST_F(CliTest, CertifyChecks) {
  EXPECT_EQ(run({"certify", "--K", "2", "--flips", "0.3,0.6", "--out", out("c")}).code, ddtool::kExitUsage);
  EXPECT_EQ(run({"certify", "--K", "4", "--random", "200", "--grid", "60", "--out", out("c")}).code, 0);
  EXPECT_EQ(run({"certify", "--K", "2", "--grid", "50", "--threshold", "0.5", "--out", out("c")}).code,
            ddtool::kExitVerificationFailed);
}

TEST_F(CliTest, SimulateCompareAndJitterWriteOutputs) {
  EXPECT_EQ(run({"simulate", "--sequence", "xy4", "--T", "0.1,0.2", "--states", "3", "--out", out("s")}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "simulate_seed0.csv"));
  EXPECT_EQ(run({"simulate", "--T", "0.1", "--out", out("s")}).code, ddtool::kExitUsage);
  const auto c = run({"compare", "--ours", "3", "--qdd", "2", "--J", "1e-4", "--states", "3", "--T-points", "4",
                      "--T-min", "0.1", "--out", out("c")});
  EXPECT_EQ(c.code, 0) << c.err;
  EXPECT_TRUE(fs::exists(dir_ / "c" / "compare_seed0.json"));
  const auto j = run({"jitter", "--K", "2", "--digits", "3,5", "--T-points", "21", "--out", out("j")});
  EXPECT_EQ(j.code, 0) << j.err;
  EXPECT_TRUE(fs::exists(dir_ / "j" / "jitter_seed1.json"));
}

TEST(KeyValueConfig, ParsesListsAndRejectsDuplicates) {
  const auto c = ddtool::KeyValueConfig::parse("# c\nformat = f/1\nJ = 1e-3, 2e-3\nseeds = 1,2\n", "f", 1);
  EXPECT_EQ(c.get_doubles("J"), (std::vector<double>{1e-3, 2e-3}));
  EXPECT_EQ(c.get_seeds("seeds"), (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(c.get_int("missing", 7), 7);
  EXPECT_THROW(c.get_double("missing"), ddtool::ConfigError);
  EXPECT_THROW(ddtool::KeyValueConfig::parse("format = f/1\na = 1\na = 2\n", "f", 1), ddtool::ConfigError);
  EXPECT_THROW(ddtool::KeyValueConfig::parse("a = 1\nformat = f/1\n", "f", 1), ddtool::ConfigError);
  EXPECT_THROW(ddtool::KeyValueConfig::parse("format = f/1\nJ = abc\n", "f", 1).get_double("J"), ddtool::ConfigError);
}
