#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "advsub/attacks.hpp"
#include "advsub/dataset.hpp"
#include "advsub/nn.hpp"
#include "advsub/rng.hpp"

namespace advsub {

/// Model outputs of one sample over its clean evaluation and every screening
/// trial.
struct PredictionRange {
  std::size_t sample_index = 0;
  Label clean_argmax = 0;
  std::vector<Label> trial_argmaxes;  // random-noise trials first, then grid-line trials
  Tensor clean_probs;
  Tensor prob_min;  // elementwise over clean and all trials
  Tensor prob_max;
};

struct ProneSubset {
  std::vector<std::size_t> indices;  // strictly increasing
  int computed_at_epoch = 0;
  double fraction = 0;

  bool empty() const noexcept { return indices.empty(); }

  nlohmann::json to_json() const {
    return {{"epoch", computed_at_epoch}, {"fraction", fraction}, {"indices", indices}};
  }
};

/// Prone iff some screening trial moves the top class away from the clean one.
inline bool is_prone(const PredictionRange& range) {
  return std::any_of(range.trial_argmaxes.begin(), range.trial_argmaxes.end(),
                     [&](Label t) { return t != range.clean_argmax; });
}

/// Clean image followed by trials_per_attack noise trials and
/// trials_per_attack grid-line trials, all drawn from `rng` in that order.
inline std::vector<Tensor> screening_inputs(const Tensor& image, const ScreenConfig& cfg,
                                            Rng& rng) {
  std::vector<Tensor> out;
  out.reserve(1 + 2 * cfg.trials_per_attack);
  out.push_back(image);
  for (std::size_t t = 0; t < cfg.trials_per_attack; ++t)
    out.push_back(random_perturb(image, cfg, rng));
  for (std::size_t t = 0; t < cfg.trials_per_attack; ++t) out.push_back(grid_lines(image, cfg, rng));
  return out;
}

namespace detail {

/// Builds a range from probability rows [first, first + 1 + trials) of `probs`,
/// the first being the clean evaluation.
inline PredictionRange range_from_rows(std::size_t sample_index, const Tensor& probs,
                                       std::size_t first, std::size_t trials) {
  const std::size_t c = probs.dim(1);
  PredictionRange r;
  r.sample_index = sample_index;
  auto clean = probs.row(first);
  r.clean_probs = Tensor({c}, std::vector<real>(clean.begin(), clean.end()));
  r.prob_min = r.clean_probs;
  r.prob_max = r.clean_probs;
  r.clean_argmax = static_cast<Label>(argmax(clean));
  for (std::size_t t = 1; t <= trials; ++t) {
    auto p = probs.row(first + t);
    r.trial_argmaxes.push_back(static_cast<Label>(argmax(p)));
    for (std::size_t j = 0; j < c; ++j) {
      r.prob_min[j] = std::min(r.prob_min[j], p[j]);
      r.prob_max[j] = std::max(r.prob_max[j], p[j]);
    }
  }
  return r;
}

}  // namespace detail

/// Evaluates the clean image and its 2 * trials_per_attack screening variants.
inline PredictionRange prediction_range(const Network& net, const Tensor& image,
                                        const ScreenConfig& cfg, Rng& rng,
                                        std::size_t sample_index = 0) {
  const std::vector<Tensor> inputs = screening_inputs(image, cfg, rng);
  Shape shape = image.shape();
  shape.insert(shape.begin(), inputs.size());
  Tensor batch(shape);
  for (std::size_t k = 0; k < inputs.size(); ++k)
    std::copy(inputs[k].data(), inputs[k].data() + image.size(), batch.data() + k * image.size());
  const Tensor probs = softmax_probs(forward(net, batch));
  return detail::range_from_rows(sample_index, probs, 0, inputs.size() - 1);
}

/// Per-sample screening seed: independent of evaluation order.
inline std::uint64_t screening_seed(std::uint64_t master_seed, int epoch, std::size_t index) {
  return derive_seed(master_seed, 0x5C4EE11ULL + static_cast<std::uint64_t>(epoch), index);
}

/// Screens every sample of `data`, drawing sample i's trials from
/// Rng(seed_for(i)). Samples are evaluated in chunks; rows are independent, so
/// chunking does not change any result.
template <class SeedFn>
ProneSubset filter_subset_seeded(const Network& net, const DatasetHandle& data,
                                 const ScreenConfig& cfg, int epoch, SeedFn&& seed_for) {
  require(data.size() > 0, ErrorKind::kInvalidInput, "cannot filter an empty dataset");
  cfg.validate();
  constexpr std::size_t kChunk = 32;
  const std::size_t per_sample = 1 + 2 * cfg.trials_per_attack;
  const std::size_t pixels = data.geometry().size();
  ProneSubset subset;
  subset.computed_at_epoch = epoch;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, data.size() - start);
    Tensor batch({count * per_sample, pixels});
    for (std::size_t s = 0; s < count; ++s) {
      Rng rng(seed_for(start + s));
      const auto inputs = screening_inputs(data.image(start + s), cfg, rng);
      for (std::size_t k = 0; k < per_sample; ++k)
        std::copy(inputs[k].data(), inputs[k].data() + pixels,
                  batch.data() + (s * per_sample + k) * pixels);
    }
    const Tensor probs = softmax_probs(forward(net, batch));
    for (std::size_t s = 0; s < count; ++s) {
      const auto range =
          detail::range_from_rows(start + s, probs, s * per_sample, per_sample - 1);
      if (is_prone(range)) subset.indices.push_back(start + s);
    }
  }
  subset.fraction = static_cast<double>(subset.indices.size()) / static_cast<double>(data.size());
  return subset;
}

inline ProneSubset filter_subset(const Network& net, const DatasetHandle& data,
                                 const ScreenConfig& cfg, int epoch, std::uint64_t master_seed) {
  return filter_subset_seeded(net, data, cfg, epoch, [&](std::size_t i) {
    return screening_seed(master_seed, epoch, i);
  });
}

}  // namespace advsub
