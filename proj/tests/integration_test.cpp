// Drives the advsub executable end to end on a slice of the bundled digits.

#include <cstdio>
#include <sys/wait.h>

#include "support.hpp"

namespace advsub {
namespace {

struct CliRun {
  int status;
  std::string out;
  std::string err;
};

CliRun cli(const std::string& args, const testing::TempDir& dir, const std::string& env = "") {
  const auto err_path = dir / "stderr.txt";
  const std::string cmd =
      env + " " + ADVSUB_CLI + " " + args + " 2>" + err_path.string();
  CliRun r{};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, "", "popen failed"};
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = testing::read_bytes(err_path);
  return r;
}

std::string small_config(const testing::TempDir& dir, const std::string& extra = "") {
  const auto path = dir / "config.json";
  testing::write_bytes(path, std::string(R"({"epochs": 2, "batch_size": 64, )") + extra +
                                 R"("dataset": {"dir": ")" + ADVSUB_MNIST_DIR +
                                 R"(", "train_limit": 600, "test_limit": 200}})");
  return path.string();
}

TEST(Cli, IntervalDemo) {
  testing::TempDir dir;
  const CliRun r = cli("interval-demo", dir);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["interior_exceeds_corners"], true);
  EXPECT_NEAR(j["interior_output"]["probs"][0].get<double>(), 0.9975, 5e-5);
  EXPECT_EQ(j["point_outputs"]["probs"][0].get<double>(), 0.5);
}

TEST(Cli, TrainEvalFilterRoundTrip) {
  testing::TempDir dir;
  const std::string cfg = small_config(dir);
  const std::string out1 = (dir / "run1").string();
  const std::string out2 = (dir / "run2").string();
  const CliRun a = cli("train --config " + cfg + " --seed 3 --out " + out1 + " --reproducible --quiet", dir);
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_TRUE(nlohmann::json::parse(a.out).contains("final_robust_acc"));
  const CliRun b = cli("train --config " + cfg + " --seed 3 --out " + out2 + " --reproducible --quiet", dir);
  ASSERT_EQ(b.status, 0) << b.err;
  EXPECT_EQ(testing::read_bytes(dir / "run1" / "metrics.csv"),
            testing::read_bytes(dir / "run2" / "metrics.csv"));
  EXPECT_EQ(testing::read_bytes(dir / "run1" / "checkpoint.bin"),
            testing::read_bytes(dir / "run2" / "checkpoint.bin"));
  const auto summary = nlohmann::json::parse(testing::read_bytes(dir / "run1" / "summary.json"));
  EXPECT_EQ(summary["config"]["seed"], 3);

  const std::string ck = (dir / "run1" / "checkpoint.bin").string();
  const CliRun e = cli("eval --config " + cfg + " --checkpoint " + ck + " --epsilon 0.1", dir);
  ASSERT_EQ(e.status, 0) << e.err;
  const auto ej = nlohmann::json::parse(e.out);
  EXPECT_EQ(ej["samples"], 200);
  EXPECT_DOUBLE_EQ(ej["vanilla_acc"].get<double>(), summary["runs"][0]["final_vanilla_acc"].get<double>());
  EXPECT_LE(ej["robust_acc"].get<double>(), ej["vanilla_acc"].get<double>());

  const std::string subset = (dir / "subset.json").string();
  const CliRun f = cli("filter --config " + cfg + " --checkpoint " + ck + " --epoch 4 --seed 3 --out " + subset, dir);
  ASSERT_EQ(f.status, 0) << f.err;
  const auto fj = nlohmann::json::parse(testing::read_bytes(subset));
  EXPECT_EQ(fj["epoch"], 4);
  EXPECT_DOUBLE_EQ(fj["fraction"].get<double>(), fj["indices"].size() / 600.0);
  const Network net = load_checkpoint(ck);
  const auto data = load_mnist_dir(ADVSUB_MNIST_DIR, true).head(600);
  EXPECT_EQ(fj["indices"].get<std::vector<std::size_t>>(),
            filter_subset(net, data, ScreenConfig{}, 4, 3).indices);
}

TEST(Cli, RepeatsAndEnvironmentOverride) {
  testing::TempDir dir;
  const std::string cfg = small_config(dir);
  const CliRun r = cli("train --config " + cfg + " --repeats 2 --quiet --out " + (dir / "rep").string(),
                    dir, "ADVSUB_EPOCHS=1 ADVSUB_MODE=vanilla");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto summary = nlohmann::json::parse(testing::read_bytes(dir / "rep" / "summary.json"));
  EXPECT_EQ(summary["runs"].size(), 2u);
  EXPECT_EQ(summary["config"]["epochs"], 1);
  EXPECT_EQ(summary["config"]["mode"], "vanilla");
  EXPECT_TRUE(std::filesystem::exists(dir / "rep" / "seed-1" / "metrics.csv"));
}

TEST(Cli, SweepRatio) {
  testing::TempDir dir;
  const std::string cfg = small_config(dir);
  const CliRun r = cli("sweep-ratio --config " + cfg + " --ratios 0,2 --out " + (dir / "sw").string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1]["ratio"], 2);
  EXPECT_GT(j[0]["adversarial_iterations"].get<int>(), j[1]["adversarial_iterations"].get<int>());
  EXPECT_TRUE(std::filesystem::exists(dir / "sw" / "sweep.csv"));
}

TEST(Cli, StructuredErrors) {
  testing::TempDir dir;
  testing::write_bytes(dir / "junk.bin", "not a checkpoint");
  const CliRun bad = cli("eval --config " + small_config(dir) + " --checkpoint " + (dir / "junk.bin").string(), dir);
  EXPECT_EQ(bad.status, 2);
  EXPECT_EQ(nlohmann::json::parse(bad.err)["error"]["kind"], "format_error");

  testing::write_bytes(dir / "unknown.json", R"({"learning_rate": 0.1})");
  const CliRun cfg = cli("train --config " + (dir / "unknown.json").string() + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(cfg.status, 2);
  const auto ej = nlohmann::json::parse(cfg.err);
  EXPECT_EQ(ej["error"]["kind"], "config_error");
  EXPECT_NE(ej["error"]["message"].get<std::string>().find("learning_rate"), std::string::npos);

  const CliRun ratios = cli("sweep-ratio --ratios 1,x", dir);
  EXPECT_EQ(ratios.status, 2);

  const CliRun none = cli("", dir);
  EXPECT_NE(none.status, 0);
}

}  // namespace
}  // namespace advsub
