#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "advsub/error.hpp"
#include "advsub/nn.hpp"
#include "advsub/rng.hpp"
#include "advsub/tensor.hpp"

namespace advsub {

/// FGSM step size on the [0, 1] pixel scale.
struct AttackConfig {
  real epsilon = real(0.3);

  void validate() const {
    require(epsilon > 0 && epsilon <= 1, ErrorKind::kConfig, "epsilon must lie in (0, 1]");
  }
};

/// Parameters of the two screening attacks. Amplitudes are on the [0, 1]
/// scale; 60/255 is the +-60 grey-level interval.
struct ScreenConfig {
  real amplitude = real(60.0 / 255.0);
  std::size_t trials_per_attack = 3;
  std::size_t grid_line_cap = 5;  // 0 disables the grid-line attack
  real grid_fraction = real(0.05);
  real grid_value = 1;

  void validate() const {
    require(amplitude >= 0 && amplitude <= 1, ErrorKind::kConfig, "amplitude must lie in [0, 1]");
    require(trials_per_attack > 0, ErrorKind::kConfig, "trials_per_attack must be positive");
    require(grid_fraction > 0 && grid_fraction < 1, ErrorKind::kConfig,
            "grid_fraction must lie in (0, 1)");
    require(grid_value >= 0 && grid_value <= 1, ErrorKind::kConfig,
            "grid_value must lie in [0, 1]");
  }
};

inline real clip01(real v) { return std::clamp(v, real{0}, real{1}); }

inline real sign_of(real v) { return v > 0 ? real{1} : (v < 0 ? real{-1} : real{0}); }

/// x_adv = clip01(x + epsilon * sign(d loss / d x)), with sign(0) = 0.
inline Tensor fgsm(const Network& net, const Tensor& batch, std::span<const Label> labels,
                   const AttackConfig& cfg) {
  cfg.validate();
  const BackwardResult r = backward(net, batch, labels, {.param_grads = false, .input_grad = true});
  Tensor adv(batch.shape());
  const Tensor& g = r.grads.input_grad;
  for (std::size_t i = 0; i < batch.size(); ++i)
    adv[i] = clip01(batch[i] + cfg.epsilon * sign_of(g[i]));
  return adv;
}

/// Adds independent Uniform(-amplitude, amplitude) noise to every pixel, in
/// row-major order, then clips to [0, 1].
inline Tensor random_perturb(const Tensor& image, const ScreenConfig& cfg, Rng& rng) {
  Tensor out(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const real u = cfg.amplitude * static_cast<real>(2.0 * rng.uniform() - 1.0);
    out[i] = clip01(image[i] + u);
  }
  return out;
}

/// Number of grid lines across an axis of length `dim`:
/// min(cap, floor(fraction * dim)), raised to 1 when that floors to zero on an
/// axis of at least two pixels.
inline std::size_t grid_count(std::size_t dim, const ScreenConfig& cfg) {
  if (cfg.grid_line_cap == 0 || dim == 0) return 0;
  const auto scaled = static_cast<std::size_t>(std::floor(static_cast<double>(cfg.grid_fraction) *
                                                          static_cast<double>(dim)));
  std::size_t n = std::min(cfg.grid_line_cap, scaled);
  if (n == 0 && dim >= 2) n = 1;
  return n;
}

/// Rows and columns drawn for one grid-line trial.
struct GridSelection {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

inline GridSelection draw_grid(std::size_t height, std::size_t width, const ScreenConfig& cfg,
                               Rng& rng) {
  GridSelection s;
  s.rows = rng.sample_without_replacement(height, grid_count(height, cfg));
  s.cols = rng.sample_without_replacement(width, grid_count(width, cfg));
  return s;
}

/// Overwrites randomly chosen full rows and columns (every channel) of an
/// [H x W] or [H x W x C] image with `grid_value`.
inline Tensor grid_lines(const Tensor& image, const ScreenConfig& cfg, Rng& rng) {
  require(image.rank() == 2 || image.rank() == 3, ErrorKind::kInvalidInput,
          "grid_lines expects an [H x W] or [H x W x C] image");
  const std::size_t h = image.dim(0);
  const std::size_t w = image.dim(1);
  const std::size_t c = image.rank() == 3 ? image.dim(2) : 1;
  require(h >= 2 && w >= 2, ErrorKind::kInvalidInput, "grid_lines needs H, W >= 2");
  const GridSelection sel = draw_grid(h, w, cfg, rng);
  Tensor out = image;
  for (std::size_t r : sel.rows)
    std::fill_n(out.data() + r * w * c, w * c, cfg.grid_value);
  for (std::size_t col : sel.cols)
    for (std::size_t r = 0; r < h; ++r) std::fill_n(out.data() + (r * w + col) * c, c, cfg.grid_value);
  return out;
}

}  // namespace advsub
