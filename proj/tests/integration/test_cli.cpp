#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "advprobe-cli-test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + ADVPROBE_BIN + " " + args + " >" +
                          (work() / "last.out").string() + " 2>" + (work() / "last.err").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return json::parse(line);
}

std::string scenario() { return ADVPROBE_SCENARIO; }

const std::string& trained_policy() {
  static const std::string path = [] {
    const auto out = work() / "train";
    EXPECT_EQ(run("train --scenario " + scenario() +
                  " --algo a2c --curriculum deterministic --budget 3000 --seed 1 --tag T --quiet"
                  " --out " + out.string()),
              0);
    return (out / "policy.json").string();
  }();
  return path;
}

const std::string& collected_dataset() {
  static const std::string path = [] {
    const auto out = work() / "collect";
    EXPECT_EQ(run("collect --policy " + trained_policy() + " --scenario " + scenario() +
                  " --n 400 --seed 2 --out " + out.string()),
              0);
    return (out / "dataset.jsonl").string();
  }();
  return path;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const auto p = work() / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST(Cli, TrainWritesPolicyAndManifest) {
  const fs::path policy = trained_policy();
  ASSERT_TRUE(fs::exists(policy));
  const auto manifest = json::parse(slurp(policy.parent_path() / "manifest.json"));
  EXPECT_EQ(manifest.at("stage"), "train");
  EXPECT_EQ(manifest.at("seed"), 1);
  EXPECT_TRUE(manifest.contains("outputs"));
  EXPECT_EQ(first_line(policy.parent_path() / "training_log.jsonl").at("format"),
            "advprobe.training_log");

  const auto again = work() / "train-again";
  ASSERT_EQ(run("train --scenario " + scenario() +
                " --algo a2c --curriculum deterministic --budget 3000 --seed 1 --tag T --quiet"
                " --out " + again.string()),
            0);
  EXPECT_EQ(slurp(again / "policy.json"), slurp(policy));
}

TEST(Cli, CollectIsByteIdenticalOnRerun) {
  const fs::path ds = collected_dataset();
  const auto again = work() / "collect-again";
  ASSERT_EQ(run("collect --policy " + trained_policy() + " --scenario " + scenario() +
                " --n 400 --seed 2 --workers 2 --out " + again.string()),
            0);
  EXPECT_EQ(slurp(again / "dataset.jsonl"), slurp(ds));
  EXPECT_EQ(slurp(again / "dataset.jsonl.bin"), slurp(fs::path(ds.string() + ".bin")));
  EXPECT_EQ(first_line(ds).at("format"), "advprobe.dataset");
  const auto manifest = json::parse(slurp(ds.parent_path() / "manifest.json"));
  EXPECT_EQ(manifest.at("inputs").size(), 2u);
}

TEST(Cli, AttackAnalyzeEmbedPipeline) {
  const auto cfg = write_config(
      "campaign.json",
      R"({"target":"noop","indices":"all","epsilon":1.0,"sampling":{"per_stratum":5},"trials_per_point":1})");
  const auto att = work() / "attack";
  ASSERT_EQ(run("attack --config " + cfg.string() + " --dataset " + collected_dataset() +
                " --policy " + trained_policy() + " --scenario " + scenario() +
                " --seed 3 --out " + att.string()),
            0)
      << slurp(work() / "last.err");
  EXPECT_EQ(first_line(att / "impact_samples.jsonl").at("format"), "advprobe.impact_samples");
  EXPECT_EQ(first_line(att / "attacks.jsonl").at("format"), "advprobe.attacks");
  const auto cost = json::parse(slurp(att / "cost.json"));
  EXPECT_GT(cost.at("points").get<int>(), 0);

  const auto att2 = work() / "attack-again";
  ASSERT_EQ(run("attack --config " + cfg.string() + " --dataset " + collected_dataset() +
                " --policy " + trained_policy() + " --scenario " + scenario() +
                " --seed 3 --workers 2 --out " + att2.string()),
            0);
  EXPECT_EQ(slurp(att2 / "impact_samples.jsonl"), slurp(att / "impact_samples.jsonl"));

  const auto an = work() / "analyze";
  ASSERT_EQ(run("analyze --impact " + (att / "impact_samples.jsonl").string() + " --scenario " +
                scenario() + " --group-by step --property red_count --out " + an.string()),
            0);
  EXPECT_EQ(first_line(an / "aggregate.jsonl").at("format"), "advprobe.impact_aggregate");

  const auto em = work() / "embed";
  ASSERT_EQ(run("embed --dataset " + collected_dataset() + " --impact " +
                (att / "impact_samples.jsonl").string() +
                " --perplexity 3 --iterations 300 --critical-distance 1 --seed 4 --out " +
                em.string()),
            0)
      << slurp(work() / "last.err");
  EXPECT_EQ(first_line(em / "embedding.jsonl").at("format"), "advprobe.embedding");
  EXPECT_EQ(first_line(em / "transitions.jsonl").at("format"), "advprobe.transitions");
}

TEST(Cli, TransferTable) {
  const auto out = work() / "transfer";
  ASSERT_EQ(run("transfer --policies " + trained_policy() + " --datasets " + collected_dataset() +
                " --scenario " + scenario() + " --out " + out.string()),
            0)
      << slurp(work() / "last.err");
  std::ifstream in(out / "transfer.jsonl");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(json::parse(line).at("format"), "advprobe.transfer");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Cli, PlayUsesOutRootVariable) {
  const auto root = work() / "root";
  ASSERT_EQ(run("play --scenario " + scenario() + " --episodes 2 --seed 5",
                "ADVPROBE_OUT_ROOT=" + root.string()),
            0);
  EXPECT_TRUE(fs::exists(root / "play" / "trajectory.jsonl"));
  EXPECT_TRUE(fs::exists(root / "play" / "manifest.json"));
  EXPECT_EQ(first_line(root / "play" / "trajectory.jsonl").at("format"), "advprobe.trajectory");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("train --scenario " + scenario() + " --bogus"), 2);
  EXPECT_EQ(run("collect --policy x --scenario " + scenario()), 2);  // --seed missing
  EXPECT_EQ(run("collect --policy " + (work() / "missing.json").string() + " --scenario " +
                scenario() + " --seed 1 --out " + (work() / "bad").string()),
            3);
  const auto bad_cfg = write_config("bad.json", R"({"target":"noop","indices":"all","colour":1})");
  EXPECT_EQ(run("attack --config " + bad_cfg.string() + " --dataset " + collected_dataset() +
                " --policy " + trained_policy() + " --scenario " + scenario() +
                " --seed 1 --out " + (work() / "bad").string()),
            2);
  const auto bad_yaml = write_config("bad.yml", "scenario: [unclosed");
  EXPECT_EQ(run("play --scenario " + bad_yaml.string() + " --seed 1 --out " +
                (work() / "bad").string()),
            2);
  std::ofstream(work() / "garbage.jsonl") << "not json\n";
  EXPECT_EQ(run("analyze --impact " + (work() / "garbage.jsonl").string() + " --scenario " +
                scenario() + " --out " + (work() / "bad").string()),
            3);
}
