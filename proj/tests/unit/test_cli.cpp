#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "harrisflow");
  std::ostringstream out, err;
  const int code = hflow::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("harrisflow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const json& j) {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump();
    return p.string();
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"simulate"}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  const std::string cfg = write("flow.json", {{"flow", "arratia"}, {"colour", "red"}});
  const Result r = run({"simulate", "-c", cfg, "-o", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("valid keys"), std::string::npos);
  EXPECT_EQ(run({"experiment", "-n", "lemma1", "-o", dir.string(), "replicas=ten"}).code, 2);
  EXPECT_EQ(run({"experiment", "-n", "lemma1", "-o", dir.string(), "nope=1"}).code, 2);
}

TEST_F(Cli, Version) {
  const Result r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("harrisflow"), std::string::npos);
}

TEST_F(Cli, SimulateMatchesGolden) {
  const std::string cfg = write("flow.json", {{"flow", "arratia"}, {"points", {0.5}}, {"seed", 7}});
  ASSERT_EQ(run({"simulate", "-c", cfg, "-o", dir.string()}).code, 0);
  EXPECT_EQ(slurp(dir / "path.csv"), slurp(fs::path(HARRISFLOW_TEST_DATA) / "simulate_n1_arratia.csv"));
  const json meta = json::parse(slurp(dir / "path.json"));
  EXPECT_EQ(meta["master_seed"], 7);
  EXPECT_EQ(meta["schema_version"], 1);
  EXPECT_EQ(meta["config_hash"].get<std::string>().size(), 16u);
}

TEST_F(Cli, FullPathHasOneRowPerGridTime) {
  const std::string cfg = write("flow.json", {{"flow", "harris"}, {"points", {0.1, 0.105, 0.5}}, {"dt", 0.01}});
  ASSERT_EQ(run({"simulate", "-c", cfg, "-o", dir.string(), "--full-path"}).code, 0);
  const std::string csv = slurp(dir / "path.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 101);
}

TEST_F(Cli, CoupleReportsInfiniteGluing) {
  const std::string cfg = write("flow.json", {{"flow", "identity"}, {"points", {0.0, 1.0}}, {"dt", 0.1}, {"epsilon", 0.1}});
  const Result r = run({"couple", "-c", cfg, "-o", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(dir / "coupling.json"));
  EXPECT_EQ(j["coupling"]["sigma"], json::array({"inf"}));
  EXPECT_EQ(j["coupling"]["cost"], 0.0);
}

TEST_F(Cli, CoupleGapNotAboveEpsilonExitsThree) {
  const std::string cfg = write("flow.json", {{"flow", "arratia"}, {"points", {0.0, 0.05}}, {"dt", 0.01}});
  EXPECT_EQ(run({"couple", "-c", cfg, "--epsilon", "0.05", "-o", dir.string()}).code, 3);
}

TEST_F(Cli, CoupleGluesCloseParticles) {
  const std::string cfg = write("flow.json", {{"flow", "arratia"}, {"points", {0.0, 0.05}}, {"dt", 0.001}, {"seed", 3}});
  const Result r = run({"couple", "-c", cfg, "--epsilon", "0.04", "-o", dir.string(), "--debug"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(dir / "coupling.json"));
  ASSERT_TRUE(j["coupling"]["sigma"][0].is_number());
  EXPECT_EQ(j["coupling"]["partition_sizes"][0], json::array({2}));
  EXPECT_TRUE(fs::exists(dir / "stage_2.csv"));
  // the stage path read back through --path gives the same gluing
  ASSERT_EQ(run({"simulate", "-c", cfg, "-o", (dir / "p").string(), "--full-path", "dt=0.001"}).code, 0);
  const Result again = run({"couple", "--path", (dir / "p" / "path.csv").string(), "--epsilon", "0.04", "-o",
                            (dir / "q").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(json::parse(slurp(dir / "q" / "coupling.json"))["coupling"]["sigma"], j["coupling"]["sigma"]);
}

TEST_F(Cli, WassersteinOfTwoMeasures) {
  const std::string a = write("a.json", {{"atoms", {0.0}}, {"weights", {1.0}}});
  const std::string b = write("b.json", {{"atoms", {0.0, 1.0}}, {"weights", {0.5, 0.5}}});
  const Result r = run({"wasserstein", a, b, "-o", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.5\n");
}

TEST_F(Cli, HypothesisViolationExitsThree) {
  const Result r = run({"experiment", "-n", "theorem1-chain", "-o", dir.string(), "d_gamma=0.02"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("hypothesis"), std::string::npos);
}

TEST_F(Cli, FailedCheckExitsOne) {
  // a frozen flow against an Arratia reference: the endpoint laws differ
  const Result r = run({"experiment", "-n", "theorem3-bridge", "-o", dir.string(), "flow=identity",
                        "replicas=200", "dt=0.01"});
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("overall fail"), std::string::npos);
}

TEST_F(Cli, ExperimentWritesReports) {
  const Result r = run({"experiment", "-n", "lemma3", "-o", dir.string(), "replicas=50", "dt=0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "lemma3.csv"));
  const json j = json::parse(slurp(dir / "lemma3.json"));
  EXPECT_EQ(j["experiment"], "lemma3");
  EXPECT_NE(r.out.find("overall pass"), std::string::npos);
}

TEST_F(Cli, Selftest) {
  const Result r = run({"selftest"});
  EXPECT_EQ(r.code, 0) << r.out;
}
