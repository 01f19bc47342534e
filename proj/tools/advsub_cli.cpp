// Command-line front end: train, eval, filter, sweep-ratio, interval-demo.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "advsub/advsub.hpp"

namespace {

using advsub::RunConfig;

#ifndef ADVSUB_DEFAULT_MNIST_DIR
#define ADVSUB_DEFAULT_MNIST_DIR ""
#endif

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

RunConfig resolve(const CommonFlags& flags) {
  RunConfig rc = flags.config_path.empty()
                     ? advsub::resolve_run_config(nlohmann::json())
                     : advsub::load_run_config(flags.config_path);
  if (flags.seed) rc.train.seed = *flags.seed;
  if (!flags.out.empty()) rc.out = flags.out;
  if (rc.dataset.dir.empty()) rc.dataset.dir = ADVSUB_DEFAULT_MNIST_DIR;
  return rc;
}

std::vector<std::uint32_t> parse_ratios(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      advsub::require(used == item.size() && v >= 0, advsub::ErrorKind::kConfig, "");
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      advsub::fail(advsub::ErrorKind::kConfig, "bad ratio '" + item + "' in --ratios");
    }
  }
  advsub::require(!out.empty(), advsub::ErrorKind::kConfig, "--ratios is empty");
  return out;
}

void emit(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  advsub::require(static_cast<bool>(out), advsub::ErrorKind::kIo, "cannot write " + path);
  out << j.dump(2) << "\n";
}

int cmd_train(const CommonFlags& flags, std::uint32_t repeats, bool reproducible, bool quiet) {
  const RunConfig rc = resolve(flags);
  const auto data = advsub::load_datasets(rc.dataset);
  advsub::RunOptions opts;
  opts.repeats = repeats;
  opts.wall_clock_in_metrics = !reproducible;
  opts.log = quiet ? nullptr : &std::cerr;
  const auto result = advsub::run_experiment(rc, data, opts);
  std::cout << result.summary["mean"].dump(2) << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& checkpoint, double epsilon) {
  const RunConfig rc = resolve(flags);
  const auto data = advsub::load_datasets(rc.dataset);
  const advsub::Network net = advsub::load_checkpoint(checkpoint);
  const advsub::AttackConfig attack{static_cast<advsub::real>(epsilon)};
  emit({{"checkpoint", checkpoint},
        {"epsilon", epsilon},
        {"samples", data.test.size()},
        {"vanilla_acc", advsub::accuracy(net, data.test)},
        {"robust_acc", advsub::robust_accuracy(net, data.test, attack)}},
       "");
  return 0;
}

int cmd_filter(const CommonFlags& flags, const std::string& checkpoint, int epoch) {
  const RunConfig rc = resolve(flags);
  const auto data = advsub::load_datasets(rc.dataset);
  const advsub::Network net = advsub::load_checkpoint(checkpoint);
  const auto subset = advsub::filter_subset(net, data.train, rc.train.screen, epoch, rc.train.seed);
  emit(subset.to_json(), flags.out);
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& ratios_text) {
  const RunConfig rc = resolve(flags);
  const auto ratios = parse_ratios(ratios_text);
  const auto data = advsub::load_datasets(rc.dataset);
  const auto rows = advsub::sweep_ratio(
      [&] {
        return advsub::make_model(rc.model, data.train.geometry(), data.train.num_classes,
                                  rc.train.seed);
      },
      data.train, data.test, rc.train, ratios);
  nlohmann::json table = nlohmann::json::array();
  std::string csv = "ratio,robust_acc,vanilla_acc,wall_ms,adversarial_iterations\n";
  for (const auto& r : rows) {
    table.push_back({{"ratio", r.ratio},
                     {"robust_acc", r.robust_acc},
                     {"vanilla_acc", r.vanilla_acc},
                     {"wall_ms", r.wall_ms},
                     {"adversarial_iterations", r.adversarial_iterations}});
    csv += std::to_string(r.ratio) + "," + std::to_string(r.robust_acc) + "," +
           std::to_string(r.vanilla_acc) + "," + std::to_string(r.wall_ms) + "," +
           std::to_string(r.adversarial_iterations) + "\n";
  }
  if (!rc.out.empty()) {
    std::filesystem::create_directories(rc.out);
    std::ofstream(std::filesystem::path(rc.out) / "sweep.csv") << csv;
  }
  std::cout << table.dump(2) << "\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_out) {
  cmd->add_option("--config", flags.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Override the configured seed");
  if (with_out) cmd->add_option("--out", flags.out, "Output location");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subset-filtered adversarial training toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint32_t repeats = 1;
  bool reproducible = false;
  bool quiet = false;
  std::string checkpoint;
  double epsilon = 0.3;
  int epoch = 0;
  std::string ratios = "0,1,2,3,4";

  auto* train = app.add_subcommand("train", "Train with the configured mode");
  add_common(train, flags, true);
  train->add_option("--repeats", repeats, "Runs with seeds seed, seed+1, ...")->check(CLI::PositiveNumber);
  train->add_flag("--reproducible", reproducible,
                  "Write wall_ms as 0 in metrics.csv so identical runs are byte-identical");
  train->add_flag("--quiet", quiet, "No per-epoch log on stderr");

  auto* eval = app.add_subcommand("eval", "Clean and FGSM accuracy of a checkpoint on the test split");
  add_common(eval, flags, false);
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--epsilon", epsilon, "FGSM epsilon on the [0, 1] pixel scale");

  auto* filter = app.add_subcommand("filter", "Emit the adversarially-prone subset as JSON");
  add_common(filter, flags, true);
  filter->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  filter->add_option("--epoch", epoch, "Epoch stamp; also selects the screening streams");

  auto* sweep = app.add_subcommand("sweep-ratio", "Mixed-mode training across vanilla:adversarial ratios");
  add_common(sweep, flags, true);
  sweep->add_option("--ratios", ratios, "Comma-separated ratios");

  auto* demo = app.add_subcommand("interval-demo", "Endpoint-vs-interior interval demonstration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(flags, repeats, reproducible, quiet);
    if (*eval) return cmd_eval(flags, checkpoint, epsilon);
    if (*filter) return cmd_filter(flags, checkpoint, epoch);
    if (*sweep) return cmd_sweep(flags, ratios);
    if (*demo) {
      std::cout << advsub::interval_demo().to_json().dump(2) << "\n";
      return 0;
    }
  } catch (const advsub::Error& e) {
    std::cerr << nlohmann::json{{"error", {{"kind", advsub::to_string(e.kind())},
                                           {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  }
  return 0;
}
