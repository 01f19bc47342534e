#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advsub/checkpoint.hpp"
#include "advsub/config.hpp"
#include "advsub/trainer.hpp"

namespace advsub {

inline constexpr const char* kMetricsVersionLine = "# advsub metrics v1";
inline constexpr const char* kMetricsHeader =
    "epoch,phase_vanilla,phase_adv,train_loss,vanilla_acc,robust_acc,prone_fraction,wall_ms";

namespace detail {

inline std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace detail

/// metrics.csv body. With `with_wall_clock` false the wall_ms column is 0 so
/// that identical runs produce identical bytes.
inline std::string metrics_csv(const TrainReport& report, bool with_wall_clock = true) {
  std::string s = std::string(kMetricsVersionLine) + "\n" + kMetricsHeader + "\n";
  for (const EpochRow& r : report.epochs) {
    s += std::to_string(r.epoch) + "," + std::to_string(r.phase_vanilla) + "," +
         std::to_string(r.phase_adv) + "," + detail::fmt_real(r.train_loss) + "," +
         detail::fmt_real(r.vanilla_acc) + "," + detail::fmt_real(r.robust_acc) + "," +
         (r.prone_fraction ? detail::fmt_real(*r.prone_fraction) : std::string()) + "," +
         detail::fmt_real(with_wall_clock ? r.wall_ms : 0.0) + "\n";
  }
  return s;
}

inline std::string timing_csv(const TrainReport& report) {
  std::string s = "epoch,wall_ms\n";
  for (const EpochRow& r : report.epochs)
    s += std::to_string(r.epoch) + "," + detail::fmt_real(r.wall_ms) + "\n";
  return s;
}

inline nlohmann::json run_record(const TrainReport& rep, std::uint64_t seed) {
  nlohmann::json refreshes = nlohmann::json::array();
  for (const auto& r : rep.refreshes)
    refreshes.push_back(
        {{"epoch", r.epoch}, {"fraction", r.fraction}, {"size", r.size}, {"wall_ms", r.wall_ms}});
  return {{"seed", seed},
          {"final_vanilla_acc", rep.final_vanilla_acc()},
          {"final_robust_acc", rep.final_robust_acc()},
          {"final_train_loss", rep.final_train_loss()},
          {"total_wall_ms", rep.total_wall_ms},
          {"eval_wall_ms", rep.eval_wall_ms},
          {"vanilla_iterations", rep.vanilla_iterations},
          {"adversarial_iterations", rep.adversarial_iterations},
          {"fallback_iterations", rep.fallback_iterations},
          {"refreshes", refreshes}};
}

struct RunOptions {
  std::uint32_t repeats = 1;
  bool wall_clock_in_metrics = true;
  std::ostream* log = nullptr;
};

struct ExperimentResult {
  std::vector<TrainReport> reports;
  nlohmann::json summary;
};

/// Trains `repeats` fresh models with seeds seed, seed + 1, ... and writes
/// metrics.csv, timing.csv and checkpoint.bin per run plus summary.json. A
/// single run writes straight into cfg.out; repeats go to cfg.out/seed-<s>/.
inline ExperimentResult run_experiment(const RunConfig& cfg, const DatasetPair& data,
                                       const RunOptions& opts = {}) {
  require(opts.repeats > 0, ErrorKind::kConfig, "repeats must be positive");
  require(!cfg.out.empty(), ErrorKind::kConfig, "output directory is not set");
  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);

  ExperimentResult result;
  nlohmann::json runs = nlohmann::json::array();
  const char* mean_keys[] = {"final_vanilla_acc", "final_robust_acc", "final_train_loss",
                             "total_wall_ms"};
  std::vector<double> sums(std::size(mean_keys), 0.0);

  for (std::uint32_t k = 0; k < opts.repeats; ++k) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed + k;
    const std::filesystem::path dir = opts.repeats == 1 ? out : out / ("seed-" + std::to_string(tc.seed));
    std::filesystem::create_directories(dir);

    Network net = make_model(cfg.model, data.train.geometry(), data.train.num_classes, tc.seed);
    TrainHooks hooks;
    if (opts.log) {
      hooks.on_epoch = [&](const EpochRow& r) {
        *opts.log << "seed " << tc.seed << " epoch " << r.epoch << " loss "
                  << detail::fmt_real(r.train_loss) << " acc " << detail::fmt_real(r.vanilla_acc)
                  << " robust " << detail::fmt_real(r.robust_acc) << " ms "
                  << detail::fmt_real(r.wall_ms) << "\n";
      };
    }
    TrainReport rep = train(net, data.train, data.test, tc, hooks);

    detail::write_text(dir / "metrics.csv", metrics_csv(rep, opts.wall_clock_in_metrics));
    detail::write_text(dir / "timing.csv", timing_csv(rep));
    save_checkpoint(net, dir / "checkpoint.bin");

    nlohmann::json rec = run_record(rep, tc.seed);
    rec["dir"] = dir.string();
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += rec[mean_keys[i]].get<double>();
    runs.push_back(std::move(rec));
    result.reports.push_back(std::move(rep));
  }

  nlohmann::json mean;
  for (std::size_t i = 0; i < sums.size(); ++i) mean[mean_keys[i]] = sums[i] / opts.repeats;
  result.summary = {{"format", "advsub-summary-v1"},
                    {"config", to_json(cfg)},
                    {"repeats", opts.repeats},
                    {"runs", runs},
                    {"mean", mean}};
  detail::write_text(out / "summary.json", result.summary.dump(2) + "\n");
  return result;
}

}  // namespace advsub
