#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advsub/attacks.hpp"
#include "advsub/dataset.hpp"
#include "advsub/nn.hpp"
#include "advsub/rng.hpp"
#include "advsub/subset_filter.hpp"

namespace advsub {

enum class TrainMode { kVanilla, kFullAdversarial, kMixed, kFreeReplay };

inline std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kVanilla: return "vanilla";
    case TrainMode::kFullAdversarial: return "full_adversarial";
    case TrainMode::kMixed: return "mixed";
    case TrainMode::kFreeReplay: return "free_replay";
  }
  return "unknown";
}

inline TrainMode parse_train_mode(std::string_view s) {
  if (s == "vanilla") return TrainMode::kVanilla;
  if (s == "full_adversarial") return TrainMode::kFullAdversarial;
  if (s == "mixed") return TrainMode::kMixed;
  if (s == "free_replay") return TrainMode::kFreeReplay;
  fail(ErrorKind::kConfig, "unknown training mode '" + std::string(s) + "'");
}

enum class Phase { kVanilla, kAdversarial };

/// Iteration `iteration` (0-based, counted from the end of warm-up) is
/// adversarial iff (iteration + 1) is a multiple of ratio_r + 1.
constexpr Phase schedule(std::uint64_t iteration, std::uint64_t ratio_r) {
  return (iteration + 1) % (ratio_r + 1) == 0 ? Phase::kAdversarial : Phase::kVanilla;
}

struct TrainConfig {
  TrainMode mode = TrainMode::kMixed;
  std::uint32_t ratio_r = 2;  // vanilla iterations per adversarial iteration
  std::uint32_t refilter_period_epochs = 4;
  std::uint32_t warmup_epochs = 1;
  std::uint32_t epochs = 12;
  std::uint32_t batch_size = 128;
  AttackConfig attack;
  ScreenConfig screen;
  SGDConfig sgd;
  std::uint32_t replay_m = 4;
  std::uint64_t seed = 0;

  void validate() const {
    require(refilter_period_epochs > 0, ErrorKind::kConfig, "refilter_period_epochs must be positive");
    require(epochs > 0, ErrorKind::kConfig, "epochs must be positive");
    require(batch_size > 0, ErrorKind::kConfig, "batch_size must be positive");
    require(replay_m > 0, ErrorKind::kConfig, "replay_m must be positive");
    attack.validate();
    screen.validate();
    sgd.validate();
  }
};

struct EpochRow {
  int epoch = 0;
  std::size_t phase_vanilla = 0;
  std::size_t phase_adv = 0;
  std::size_t fallbacks = 0;  // adversarial slots run as vanilla for lack of a subset
  double train_loss = 0;
  double vanilla_acc = 0;
  double robust_acc = 0;
  std::optional<double> prone_fraction;  // mixed mode only
  double wall_ms = 0;                    // training and filtering; evaluation excluded
};

struct RefreshEvent {
  int epoch = 0;
  double fraction = 0;
  std::size_t size = 0;
  double wall_ms = 0;
};

struct TrainReport {
  TrainMode mode = TrainMode::kVanilla;
  std::vector<EpochRow> epochs;
  std::vector<RefreshEvent> refreshes;
  std::size_t vanilla_iterations = 0;
  std::size_t adversarial_iterations = 0;
  std::size_t fallback_iterations = 0;
  double total_wall_ms = 0;
  double eval_wall_ms = 0;

  double final_vanilla_acc() const { return epochs.empty() ? 0 : epochs.back().vanilla_acc; }
  double final_robust_acc() const { return epochs.empty() ? 0 : epochs.back().robust_acc; }
  double final_train_loss() const { return epochs.empty() ? 0 : epochs.back().train_loss; }
};

/// Observation points for tests and logging; every member is optional.
struct TrainHooks {
  struct Iteration {
    int epoch;
    std::size_t step;  // global optimizer-step counter
    Phase phase;
    bool fallback;
    std::span<const std::size_t> indices;
  };
  std::function<void(const Iteration&)> on_iteration;
  std::function<void(const ProneSubset&)> on_refresh;
  std::function<void(const EpochRow&)> on_epoch;
};

inline constexpr std::size_t kEvalChunk = 500;

/// Fraction of `data` classified correctly.
inline double accuracy(const Network& net, const DatasetHandle& data) {
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, data.size() - start);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = start + i;
    const auto pred = argmax_rows(forward(net, data.batch(idx)));
    for (std::size_t i = 0; i < n; ++i) correct += pred[i] == data.labels[start + i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

/// Fraction of `data` still classified correctly after FGSM at cfg.epsilon.
inline double robust_accuracy(const Network& net, const DatasetHandle& data,
                              const AttackConfig& cfg) {
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, data.size() - start);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = start + i;
    const auto labels = data.batch_labels(idx);
    const auto pred = argmax_rows(forward(net, fgsm(net, data.batch(idx), labels, cfg)));
    for (std::size_t i = 0; i < n; ++i) correct += pred[i] == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

/// Sequential batches over reshuffled passes of [0, n). The final batch of a
/// pass is short when batch_size does not divide n.
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch_size, std::uint64_t seed)
      : n_(n), batch_size_(batch_size), rng_(seed) {}

  std::vector<std::size_t> next() {
    if (pos_ >= order_.size()) {
      order_ = rng_.permutation(n_);
      pos_ = 0;
    }
    const std::size_t take = std::min(batch_size_, order_.size() - pos_);
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(pos_ + take));
    pos_ += take;
    return out;
  }

 private:
  std::size_t n_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline real sgd_on(Network& net, const Tensor& batch, std::span<const Label> labels,
                   const TrainConfig& cfg, SgdState& state) {
  const BackwardResult r = backward(net, batch, labels, {.param_grads = true, .input_grad = false});
  sgd_step(net, r.grads, cfg.sgd, state);
  return r.loss;
}

}  // namespace detail

/// Trains `net` in place and evaluates on `test` after every epoch.
///
/// Every mode runs ceil(N / batch_size) iterations per epoch (times replay_m
/// for free_replay). In mixed mode, iterations after warm-up follow
/// schedule(): vanilla slots take the next sequential batch of the full
/// training set, adversarial slots draw batch_size indices uniformly with
/// replacement from the current prone subset and train on their FGSM images.
/// The subset is recomputed at the start of epochs warmup, warmup + period, ...
inline TrainReport train(Network& net, const DatasetHandle& train_set,
                         const DatasetHandle& test_set, const TrainConfig& cfg,
                         const TrainHooks& hooks = {}) {
  cfg.validate();
  require(train_set.size() > 0 && test_set.size() > 0, ErrorKind::kInvalidInput,
          "training and test sets must be non-empty");
  require(train_set.geometry().size() == net.input_size() &&
              test_set.geometry().size() == net.input_size(),
          ErrorKind::kInvalidInput, "dataset images do not match the network input");

  const std::size_t n = train_set.size();
  const std::size_t iters_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  BatchStream stream(n, cfg.batch_size, derive_seed(cfg.seed, 0xBA7C4, 0));
  Rng subset_rng(derive_seed(cfg.seed, 0xAD5, 0));
  SgdState state;
  ProneSubset subset;
  bool have_subset = false;
  std::uint64_t post_warmup_iter = 0;
  std::size_t step = 0;

  TrainReport report;
  report.mode = cfg.mode;

  auto notify = [&](int epoch, Phase phase, bool fallback, std::span<const std::size_t> idx) {
    if (hooks.on_iteration) hooks.on_iteration({epoch, step, phase, fallback, idx});
    ++step;
  };

  for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
    const int epoch = static_cast<int>(e);
    EpochRow row;
    row.epoch = epoch;
    double loss_sum = 0;
    std::size_t loss_count = 0;
    const auto t0 = detail::Clock::now();

    const bool warm = cfg.mode == TrainMode::kMixed && e < cfg.warmup_epochs;
    if (cfg.mode == TrainMode::kMixed && !warm &&
        (e - cfg.warmup_epochs) % cfg.refilter_period_epochs == 0) {
      const auto tf = detail::Clock::now();
      subset = filter_subset(net, train_set, cfg.screen, epoch, cfg.seed);
      have_subset = true;
      report.refreshes.push_back(
          {epoch, subset.fraction, subset.indices.size(), detail::ms_since(tf)});
      if (hooks.on_refresh) hooks.on_refresh(subset);
    }

    for (std::size_t it = 0; it < iters_per_epoch; ++it) {
      switch (cfg.mode) {
        case TrainMode::kVanilla: {
          const auto idx = stream.next();
          const auto labels = train_set.batch_labels(idx);
          loss_sum += detail::sgd_on(net, train_set.batch(idx), labels, cfg, state);
          ++loss_count;
          ++row.phase_vanilla;
          notify(epoch, Phase::kVanilla, false, idx);
          break;
        }
        case TrainMode::kFullAdversarial: {
          const auto idx = stream.next();
          const auto labels = train_set.batch_labels(idx);
          const Tensor adv = fgsm(net, train_set.batch(idx), labels, cfg.attack);
          loss_sum += detail::sgd_on(net, adv, labels, cfg, state);
          ++loss_count;
          ++row.phase_adv;
          notify(epoch, Phase::kAdversarial, false, idx);
          break;
        }
        case TrainMode::kMixed: {
          const Phase phase = warm ? Phase::kVanilla : schedule(post_warmup_iter, cfg.ratio_r);
          if (!warm) ++post_warmup_iter;
          const bool fallback = phase == Phase::kAdversarial && (!have_subset || subset.empty());
          if (phase == Phase::kVanilla || fallback) {
            const auto idx = stream.next();
            const auto labels = train_set.batch_labels(idx);
            loss_sum += detail::sgd_on(net, train_set.batch(idx), labels, cfg, state);
            ++row.phase_vanilla;
            row.fallbacks += fallback;
            notify(epoch, Phase::kVanilla, fallback, idx);
          } else {
            std::vector<std::size_t> idx(cfg.batch_size);
            for (auto& i : idx) i = subset.indices[subset_rng.below(subset.indices.size())];
            const auto labels = train_set.batch_labels(idx);
            const Tensor adv = fgsm(net, train_set.batch(idx), labels, cfg.attack);
            loss_sum += detail::sgd_on(net, adv, labels, cfg, state);
            ++row.phase_adv;
            notify(epoch, Phase::kAdversarial, false, idx);
          }
          ++loss_count;
          break;
        }
        case TrainMode::kFreeReplay: {
          const auto idx = stream.next();
          const auto labels = train_set.batch_labels(idx);
          const Tensor clean = train_set.batch(idx);
          Tensor delta(clean.shape());
          const real eps = cfg.attack.epsilon;
          for (std::uint32_t m = 0; m < cfg.replay_m; ++m) {
            Tensor x(clean.shape());
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = clip01(clean[i] + delta[i]);
            const BackwardResult r = backward(net, x, labels);
            sgd_step(net, r.grads, cfg.sgd, state);
            for (std::size_t i = 0; i < delta.size(); ++i)
              delta[i] = std::clamp(delta[i] + eps * sign_of(r.grads.input_grad[i]), -eps, eps);
            loss_sum += r.loss;
            ++loss_count;
            ++row.phase_adv;
            notify(epoch, Phase::kAdversarial, false, idx);
          }
          break;
        }
      }
    }
    row.wall_ms = detail::ms_since(t0);
    row.train_loss = loss_sum / static_cast<double>(loss_count);
    if (cfg.mode == TrainMode::kMixed && have_subset) row.prone_fraction = subset.fraction;

    const auto te = detail::Clock::now();
    row.vanilla_acc = accuracy(net, test_set);
    row.robust_acc = robust_accuracy(net, test_set, cfg.attack);
    report.eval_wall_ms += detail::ms_since(te);

    report.vanilla_iterations += row.phase_vanilla;
    report.adversarial_iterations += row.phase_adv;
    report.fallback_iterations += row.fallbacks;
    report.total_wall_ms += row.wall_ms;
    if (hooks.on_epoch) hooks.on_epoch(row);
    report.epochs.push_back(row);
  }
  return report;
}

struct SweepRow {
  std::uint32_t ratio = 0;
  double robust_acc = 0;
  double vanilla_acc = 0;
  double wall_ms = 0;
  std::size_t adversarial_iterations = 0;
};

/// Trains one fresh model per ratio in mixed mode with identical seeds.
inline std::vector<SweepRow> sweep_ratio(const std::function<Network()>& net_factory,
                                         const DatasetHandle& train_set,
                                         const DatasetHandle& test_set, TrainConfig cfg,
                                         std::span<const std::uint32_t> ratios) {
  require(!ratios.empty(), ErrorKind::kInvalidInput, "sweep needs at least one ratio");
  cfg.mode = TrainMode::kMixed;
  std::vector<SweepRow> rows;
  for (std::uint32_t r : ratios) {
    cfg.ratio_r = r;
    Network net = net_factory();
    const TrainReport rep = train(net, train_set, test_set, cfg);
    rows.push_back({r, rep.final_robust_acc(), rep.final_vanilla_acc(), rep.total_wall_ms,
                    rep.adversarial_iterations});
  }
  return rows;
}

}  // namespace advsub
