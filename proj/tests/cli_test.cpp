#include "cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mwsmpc::cli {
namespace {

namespace fs = std::filesystem;

const std::string kCaseStudy = std::string(MWSMPC_CONFIG_DIR) + "/case_study.cfg";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mwsmpc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mwsmpc_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Dispatch, LqrPrintsGainAndTerminalWeight) {
  const auto r = run({"lqr", "--config", kCaseStudy});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("K = [-0.6167, -1.2703]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Q_N = [[2.0599, 0.5916], [0.5916, 1.4228]]"), std::string::npos) << r.out;
}

TEST(Dispatch, SurfaceWritesGrid) {
  const auto dir = scratch("surface");
  const auto r = run({"surface", "--out", dir.string(), "--n-max", "11", "--s-step", "0.5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = read_file(dir / "swps_surface.csv");
  EXPECT_EQ(csv.rfind("N,S,bound\n1,0.000000,0.000000\n1,0.500000,0.500000\n", 0), 0u);
  EXPECT_NE(csv.find("11,0.500000,0.954545\n"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 11 * 3);
}

TEST(Dispatch, MissionWritesTrace) {
  const auto dir = scratch("mission");
  const auto r = run({"mission", "--config", kCaseStudy, "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = read_file(dir / "mission_trace.csv");
  EXPECT_EQ(csv.rfind("k,s1,s2,u1,Sk,Nk,qp_status,fallback,safe\n0,-8,0,", 0), 0u);
  EXPECT_NE(csv.find(",0.98,2482,optimal,0,1\n"), std::string::npos);
}

TEST(Dispatch, BatchIsReproducible) {
  const auto a = scratch("batch_a"), b = scratch("batch_b");
  const auto ra = run({"batch", "--config", kCaseStudy, "--missions", "3", "--seed", "5", "--out",
                       a.string(), "--workers", "1"});
  const auto rb = run({"batch", "--config", kCaseStudy, "--missions", "3", "--seed", "5", "--out",
                       b.string(), "--workers", "2", "--traces"});
  ASSERT_EQ(ra.code, kExitOk) << ra.err;
  ASSERT_EQ(rb.code, kExitOk) << rb.err;
  EXPECT_EQ(read_file(a / "batch_summary.csv"), read_file(b / "batch_summary.csv"));
  EXPECT_EQ(read_file(a / "batch_steps.csv"), read_file(b / "batch_steps.csv"));
  EXPECT_EQ(read_file(a / "batch_summary.csv").rfind("missions,successes,ratio,S_certified\n3,", 0), 0u);
  EXPECT_TRUE(fs::exists(b / "traces" / "mission_2.csv"));
}

TEST(Dispatch, OracleChecksPass) {
  const auto r = run({"oracle", "--instances", "200", "--seed", "3"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("switching bound violations = 0"), std::string::npos);
}

TEST(Dispatch, ConfigErrorsExitOne) {
  EXPECT_EQ(run({"lqr", "--config", "/nonexistent.cfg"}).code, kExitConfig);
  EXPECT_EQ(run({"lqr"}).code, kExitConfig);
  EXPECT_EQ(run({"batch", "--config", kCaseStudy, "--missions", "0"}).code, kExitConfig);
  EXPECT_EQ(run({"surface", "--s-step", "0"}).code, kExitConfig);
  const auto bad = run({"lqr", "--config", kCaseStudy, "--seed", "x"});
  EXPECT_EQ(bad.code, kExitConfig);
}

TEST(Dispatch, UnknownSubcommandPrintsUsage) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
  EXPECT_EQ(run({}).code, kExitConfig);
}

TEST(Dispatch, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("batch"), std::string::npos);
}

TEST(Dispatch, RuntimeErrorsExitTwo) {
  const auto dir = scratch("blocked");
  fs::create_directories(dir.parent_path());
  std::ofstream(dir.string()) << "not a directory";
  const auto r = run({"surface", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitRuntime) << r.err;
  fs::remove(dir);
}

}  // namespace
}  // namespace mwsmpc::cli
