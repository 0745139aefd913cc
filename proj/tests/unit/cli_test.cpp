#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "aircomp/cli.hpp"

namespace aircomp {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aircomp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("aircomp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // A short run of the default scenario with few users.
  std::vector<std::string> small(std::vector<std::string> args) const {
    for (const char* a : {"--users-per-town", "5", "--override", "sim.duration=2200"}) {
      args.emplace_back(a);
    }
    return args;
  }

  fs::path root_;
};

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

TEST(ParseList, Forms) {
  EXPECT_EQ(cli::parse_list("7"), (std::vector<std::uint64_t>{7}));
  EXPECT_EQ(cli::parse_list("1,2,5"), (std::vector<std::uint64_t>{1, 2, 5}));
  EXPECT_EQ(cli::parse_list("4..6"), (std::vector<std::uint64_t>{4, 5, 6}));
  EXPECT_TRUE(cli::parse_list("6..4").empty());
  EXPECT_THROW(cli::parse_list("a"), InvalidValue);
  EXPECT_THROW(cli::parse_override("novalue"), InvalidValue);
  EXPECT_EQ(cli::parse_override("a.b=c=d").second, "c=d");
}

TEST_F(CliTest, RunWritesOneDirectoryPerSeed) {
  const auto r = cli(small({"run", "--policy", "lsi", "--uavs", "2", "--seeds", "1,2", "--out",
                            root_.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* seed : {"1", "2"}) {
    EXPECT_TRUE(fs::exists(root_ / "lsi" / "2" / seed / "summary.csv"));
    EXPECT_TRUE(fs::exists(root_ / "lsi" / "2" / seed / "timeseries.csv"));
  }
  EXPECT_NE(r.out.find("policy=lsi uavs=2 seed=1 overall="), std::string::npos);
  EXPECT_NE(r.out.find("[1000,2200)="), std::string::npos);
}

TEST_F(CliTest, NoUavRunCollapsesTownOne) {
  const auto r = cli(small({"run", "--policy", "none", "--uavs", "0", "--seed", "7", "--out",
                            root_.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("  T1 [0,1000)=1.000000 [1000,2000)=0.000000 [2000,2200)=0.000000 "
                       "[1000,2200)=0.000000"),
            std::string::npos)
      << r.out;
}

TEST_F(CliTest, BogusPolicyListsValidOnes) {
  const auto r = cli({"run", "--policy", "bogus", "--out", root_.string()});
  EXPECT_EQ(r.code, 2);
  for (const char* p : {"none", "random", "load-balancing", "emergency", "lsi"}) {
    EXPECT_NE(r.err.find(p), std::string::npos) << p;
  }
  EXPECT_FALSE(fs::exists(root_));
}

TEST_F(CliTest, ValidationFailureNamesTheField) {
  auto r = cli({"run", "--policy", "none", "--override", "sim.duration=-1", "--out",
                root_.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sim.duration"), std::string::npos);

  r = cli({"run", "--policy", "none", "--override", "sim.nope=1", "--out", root_.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sim.nope"), std::string::npos);

  r = cli({"run", "--policy", "none", "--override", "policy.nope=1", "--out", root_.string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, MissingScenarioFileIsIoFailure) {
  const auto r = cli({"run", "--policy", "none", "--scenario", (root_ / "missing.json").string(),
                      "--out", root_.string()});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, UnwritableOutputIsIoFailure) {
  fs::create_directories(root_);
  { std::ofstream(root_ / "file") << "x"; }
  const auto r = cli(small({"run", "--policy", "none", "--seed", "1", "--out",
                            (root_ / "file").string()}));
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, ScenarioFileRoundTripsThroughCli) {
  fs::create_directories(root_);
  const auto r = cli({"scenario", "--users-per-town", "3"});
  ASSERT_EQ(r.code, 0);
  { std::ofstream(root_ / "s.json") << r.out; }
  const auto again = cli({"scenario", "--scenario", (root_ / "s.json").string()});
  EXPECT_EQ(again.code, 0);
  EXPECT_EQ(again.out, r.out);
}

TEST_F(CliTest, SameSeedSameTree) {
  const auto a = root_ / "a";
  const auto b = root_ / "b";
  ASSERT_EQ(cli(small({"run", "--policy", "emergency", "--uavs", "3", "--seed", "7", "--out",
                       a.string()}))
                .code,
            0);
  ASSERT_EQ(cli(small({"run", "--policy", "emergency", "--uavs", "3", "--seed", "7", "--out",
                       b.string()}))
                .code,
            0);
  EXPECT_EQ(tree(a), tree(b));
}

TEST_F(CliTest, OutFallsBackToEnvironment) {
  ::setenv("AIRCOMP_OUT", root_.c_str(), 1);
  const auto r = cli(small({"run", "--policy", "none", "--uavs", "0", "--seed", "3"}));
  ::unsetenv("AIRCOMP_OUT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(root_ / "none" / "0" / "3" / "summary.csv"));
}

TEST_F(CliTest, SweepIsFullFactorial) {
  const auto r = cli(small({"sweep", "--policy", "emergency,lsi", "--uav-range", "4..8",
                            "--seeds", "1..3", "--jobs", "2", "--out", root_.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cells=30 ran=30 skipped=0"), std::string::npos) << r.out;

  std::ifstream runs(root_ / "runs.csv");
  std::ifstream cmp(root_ / "comparison.csv");
  int run_rows = -1, cmp_rows = -1;
  for (std::string line; std::getline(runs, line);) ++run_rows;
  for (std::string line; std::getline(cmp, line);) ++cmp_rows;
  EXPECT_EQ(run_rows, 30 * 4);
  EXPECT_EQ(cmp_rows, 2 * 5 * 4);
}

TEST_F(CliTest, EmptyRangeIsUsageError) {
  const auto r = cli({"sweep", "--uav-range", "6..4", "--out", root_.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(root_));
}

TEST_F(CliTest, ResumeSkipsFinishedCellsWithIdenticalOutput) {
  const auto fresh = root_ / "fresh";
  const auto resumed = root_ / "resumed";
  auto args = [&](const fs::path& out) {
    return small({"sweep", "--policy", "lsi,random", "--uav-range", "2,4", "--seeds", "1,2",
                  "--out", out.string()});
  };
  ASSERT_EQ(cli(args(fresh)).code, 0);

  // Partial run: only the lsi cells, then resume the full sweep.
  ASSERT_EQ(cli(small({"sweep", "--policy", "lsi", "--uav-range", "2,4", "--seeds", "1,2",
                       "--out", resumed.string()}))
                .code,
            0);
  auto resume_args = args(resumed);
  resume_args.push_back("--resume");
  const auto r = cli(resume_args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cells=8 ran=4 skipped=4"), std::string::npos) << r.out;
  EXPECT_EQ(tree(fresh), tree(resumed));
}

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({}).code, 2);
}

}  // namespace
}  // namespace aircomp
