#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + CAMOE_CLI + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("camoe_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("generate --count -1 --out " + at("g")), 1);
  EXPECT_EQ(run("generate --set bogus=1 --out " + at("g")), 1);
  EXPECT_EQ(run("evaluate --models " + at("missing.json") + " --graphs " + at("missing.json") + " --out " + at("e")), 2);
  std::ofstream(at("broken.json")) << "{not json";
  EXPECT_EQ(run("evaluate --models " + at("broken.json") + " --graphs " + at("broken.json") + " --out " + at("e")),
            2);
}

TEST_F(Cli, GenerateWritesManifestAndRegeneratesIdentically) {
  ASSERT_EQ(run("generate --count 3 --n 20 --rho 2 --seed 4 --out " + at("a")), 0);
  const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(m["format"], "camoe-manifest");
  EXPECT_EQ(m["files"].size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "a" / "run.lock"));
  ASSERT_EQ(run("generate --from-manifest " + at("a/manifest.json") + " --out " + at("b")), 0);
  for (int i = 0; i < 3; ++i) {
    const std::string f = "graph_" + std::to_string(i) + ".json";
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f));
  }
  ASSERT_EQ(run("generate --count 0 --out " + at("c")), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "c" / "manifest.json"))["files"].size(), 0u);
}

TEST_F(Cli, SeedFromEnvironmentAndFlagPrecedence) {
  ASSERT_EQ(run("generate --count 1 --n 10 --out " + at("env"), "CAMOE_SEED=77"), 0);
  ASSERT_EQ(run("generate --count 1 --n 10 --seed 77 --out " + at("flag")), 0);
  ASSERT_EQ(run("generate --count 1 --n 10 --seed 77 --out " + at("both"), "CAMOE_SEED=3"), 0);
  EXPECT_EQ(slurp(dir / "env" / "graph_0.json"), slurp(dir / "flag" / "graph_0.json"));
  EXPECT_EQ(slurp(dir / "both" / "graph_0.json"), slurp(dir / "flag" / "graph_0.json"));
}

TEST_F(Cli, PipelineRunsAndRerunsIdentically) {
  ASSERT_EQ(run("generate --count 2 --n 10 --rho 5 --out " + at("t")), 0);
  ASSERT_EQ(run("generate --count 2 --n 10 --rho 2 --seed 2 --out " + at("s")), 0);
  const std::string pre = "pretrain --tensile-graphs " + at("t/manifest.json") + " --sparse-graphs " +
                          at("s/manifest.json") + " --iterations 50 --out ";
  ASSERT_EQ(run(pre + at("p1")), 0);
  ASSERT_EQ(run(pre + at("p2")), 0);
  EXPECT_EQ(slurp(dir / "p1" / "models.json"), slurp(dir / "p2" / "models.json"));

  const std::string online = "run-online --models " + at("p1/models.json") + " --graphs " + at("s/manifest.json") +
                             " --set iter_ft=20 --set iter_router=20 --set router_pairs=3 --out ";
  ASSERT_EQ(run(online + at("o1")), 0);
  ASSERT_EQ(run(online + at("o2")), 0);
  EXPECT_EQ(slurp(dir / "o1" / "steps.jsonl"), slurp(dir / "o2" / "steps.jsonl"));
  EXPECT_EQ(slurp(dir / "o1" / "models.json"), slurp(dir / "o2" / "models.json"));

  ASSERT_EQ(run("evaluate --models " + at("o1/models.json") + " --graphs " + at("s/manifest.json") +
                " --policy shortest-oracle --policy ca-moe --traces --out " + at("e")),
            0);
  const auto report = nlohmann::json::parse(slurp(dir / "e" / "report.json"));
  for (const auto& row : report)
    if (row["policy"] == "shortest-oracle" && row["pairs"].get<int>() > 0) EXPECT_EQ(row["accuracy"], 1.0);
  EXPECT_TRUE(fs::exists(dir / "e" / "traces.jsonl"));
  EXPECT_EQ(run("evaluate --models " + at("o1/models.json") + " --graphs " + at("s/manifest.json") +
                " --policy teleport --out " + at("e2")),
            1);
}

// A resumed run skips the graphs the checkpoint has already consumed.
TEST_F(Cli, ResumeMatchesStraightRun) {
  ASSERT_EQ(run("generate --count 3 --n 12 --rho 2 --out " + at("s")), 0);
  const auto j = nlohmann::json::parse(slurp(dir / "s" / "manifest.json"));
  auto first = j;
  first["files"] = nlohmann::json::array({j["files"][0], j["files"][1]});
  first["seeds"] = nlohmann::json::array({j["seeds"][0], j["seeds"][1]});
  std::ofstream(dir / "s" / "first.json") << first.dump();
  const std::string opts = " --random-init --set iter_ft=20 --set iter_router=20 --set router_pairs=3";
  ASSERT_EQ(run("run-online --graphs " + at("s/manifest.json") + opts + " --out " + at("full")), 0);
  ASSERT_EQ(run("run-online --graphs " + at("s/first.json") + opts + " --out " + at("part")), 0);
  ASSERT_EQ(run("run-online --graphs " + at("s/manifest.json") + opts + " --resume " + at("part/checkpoint.json") +
                " --out " + at("part")),
            0);
  EXPECT_EQ(slurp(dir / "full" / "checkpoint.json"), slurp(dir / "part" / "checkpoint.json"));
  EXPECT_EQ(slurp(dir / "full" / "steps.jsonl"), slurp(dir / "part" / "steps.jsonl"));
}
