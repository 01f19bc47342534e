#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "advsub/error.hpp"
#include "advsub/nn.hpp"
#include "advsub/tensor.hpp"

namespace advsub {

/// Elementwise box [lower, upper].
struct IntervalTensor {
  Tensor lower;
  Tensor upper;

  IntervalTensor() = default;
  IntervalTensor(Tensor lo, Tensor hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require(lower.shape() == upper.shape(), ErrorKind::kInvalidInput,
            "interval bounds must share a shape");
    for (std::size_t i = 0; i < lower.size(); ++i)
      require(lower[i] <= upper[i], ErrorKind::kInvalidInput,
              "interval lower bound exceeds upper bound at " + std::to_string(i));
  }

  static IntervalTensor point(const Tensor& x) { return {x, x}; }

  const Shape& shape() const { return lower.shape(); }

  bool contains(const Tensor& x) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }

  /// True if this box lies inside `outer`.
  bool subset_of(const IntervalTensor& outer) const {
    if (lower.size() != outer.lower.size()) return false;
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (lower[i] < outer.lower[i] || upper[i] > outer.upper[i]) return false;
    return true;
  }
};

// Accumulation order in the affine and conv rules matches forward() term for
// term, so zero-width boxes reproduce forward() bit for bit.

/// Sign-split affine rule on rows of a [B x in] box:
/// lower' = W+ lower + W- upper + b, upper' = W+ upper + W- lower + b.
inline IntervalTensor propagate_affine(const Affine& layer, const IntervalTensor& iv) {
  const std::size_t n_in = layer.in_features();
  const std::size_t n_out = layer.out_features();
  require(iv.lower.rank() == 2 && iv.lower.dim(1) == n_in, ErrorKind::kInvalidInput,
          "interval shape " + shape_string(iv.shape()) + " does not compose with affine input " +
              std::to_string(n_in));
  const std::size_t rows = iv.lower.dim(0);
  Tensor lo({rows, n_out});
  Tensor hi({rows, n_out});
  for (std::size_t b = 0; b < rows; ++b) {
    real* l_out = lo.data() + b * n_out;
    real* h_out = hi.data() + b * n_out;
    std::copy(layer.bias.data(), layer.bias.data() + n_out, l_out);
    std::copy(layer.bias.data(), layer.bias.data() + n_out, h_out);
    for (std::size_t i = 0; i < n_in; ++i) {
      const real l = iv.lower[b * n_in + i];
      const real u = iv.upper[b * n_in + i];
      if (l == 0 && u == 0) continue;
      for (std::size_t o = 0; o < n_out; ++o) {
        const real w = layer.weight[o * n_in + i];
        if (w >= 0) {
          l_out[o] += l * w;
          h_out[o] += u * w;
        } else {
          l_out[o] += u * w;
          h_out[o] += l * w;
        }
      }
    }
  }
  return {std::move(lo), std::move(hi)};
}

inline IntervalTensor propagate_affine(const Tensor& weight, const Tensor& bias,
                                       const IntervalTensor& iv) {
  require(weight.rank() == 2 && bias.rank() == 1 && bias.dim(0) == weight.dim(0),
          ErrorKind::kInvalidInput, "affine weight/bias shapes are inconsistent");
  return propagate_affine(Affine{weight, bias}, iv);
}

inline IntervalTensor propagate_relu(const IntervalTensor& iv) {
  Tensor lo(iv.shape());
  Tensor hi(iv.shape());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = iv.lower[i] > 0 ? iv.lower[i] : real{0};
    hi[i] = iv.upper[i] > 0 ? iv.upper[i] : real{0};
  }
  return {std::move(lo), std::move(hi)};
}

/// Convolution as the sign-split rule applied to its unrolled affine form.
inline IntervalTensor propagate_conv(const Conv2D& layer, const IntervalTensor& iv) {
  const ImageGeometry g = layer.input;
  const ImageGeometry og = layer.output();
  require(iv.lower.rank() == 2 && iv.lower.dim(1) == g.size(), ErrorKind::kInvalidInput,
          "interval shape does not compose with conv input");
  const std::size_t rows = iv.lower.dim(0);
  const std::size_t k = layer.kernel_size();
  Tensor lo({rows, og.size()});
  Tensor hi({rows, og.size()});
  for (std::size_t b = 0; b < rows; ++b) {
    const real* xl = iv.lower.data() + b * g.size();
    const real* xu = iv.upper.data() + b * g.size();
    for (std::size_t oy = 0; oy < og.height; ++oy) {
      for (std::size_t ox = 0; ox < og.width; ++ox) {
        for (std::size_t oc = 0; oc < og.channels; ++oc) {
          real acc_l = layer.bias[oc];
          real acc_h = layer.bias[oc];
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * layer.stride + ky) -
                                      static_cast<std::ptrdiff_t>(layer.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * layer.stride + kx) -
                                        static_cast<std::ptrdiff_t>(layer.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
              const std::size_t pix = (static_cast<std::size_t>(iy) * g.width + ix) * g.channels;
              const real* kw = layer.kernels.data() + ((oc * k + ky) * k + kx) * g.channels;
              for (std::size_t ic = 0; ic < g.channels; ++ic) {
                const real w = kw[ic];
                if (w >= 0) {
                  acc_l += xl[pix + ic] * w;
                  acc_h += xu[pix + ic] * w;
                } else {
                  acc_l += xu[pix + ic] * w;
                  acc_h += xl[pix + ic] * w;
                }
              }
            }
          }
          const std::size_t at = b * og.size() + (oy * og.width + ox) * og.channels + oc;
          lo[at] = acc_l;
          hi[at] = acc_h;
        }
      }
    }
  }
  return {std::move(lo), std::move(hi)};
}

/// Logit bounds [B x C] for a batch-shaped input box.
inline IntervalTensor propagate_network(const Network& net, const IntervalTensor& iv) {
  require(iv.lower.rank() >= 2 && iv.lower.row_size() == net.input_size(),
          ErrorKind::kInvalidInput,
          "interval shape " + shape_string(iv.shape()) + " does not match network input " +
              shape_string(net.input_shape()));
  const std::size_t rows = iv.lower.dim(0);
  IntervalTensor cur{iv.lower.reshaped({rows, net.input_size()}),
                     iv.upper.reshaped({rows, net.input_size()})};
  for (const Layer& layer : net.layers()) {
    cur = std::visit(
        [&](const auto& l) -> IntervalTensor {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Affine>) return propagate_affine(l, cur);
          else if constexpr (std::is_same_v<L, Conv2D>) return propagate_conv(l, cur);
          else return propagate_relu(cur);
        },
        layer);
  }
  return cur;
}

// ---- two-input demonstration network ------------------------------------

/// h = ReLU([x1 - x2, x2 - x1]); logits = [2 h1 + h2, h2]. Constructed so that
/// (2, 3), (0, 1) and (4, 5) all give (0.5, 0.5) while (4, 1) gives
/// logits (6, 0).
inline Network two_input_network() {
  std::vector<Layer> layers;
  layers.emplace_back(Affine{Tensor({2, 2}, {1, -1, -1, 1}), Tensor({2}, {0, 0})});
  layers.emplace_back(ReLU{});
  layers.emplace_back(Affine{Tensor({2, 2}, {2, 1, 0, 1}), Tensor({2}, {0, 0})});
  return Network({2}, std::move(layers), 2);
}

struct IntervalDemoReport {
  struct Evaluation {
    std::array<real, 2> input;
    std::array<real, 2> probs;
  };
  Evaluation point;                 // unperturbed input
  std::array<Evaluation, 2> corners;  // lower-bound and upper-bound vectors of the box
  Evaluation interior;              // a hand-picked point inside the box
  IntervalTensor ibp_bounds;        // logit bounds over the box
  // Softmax at the logit-bound corners. Not a sound probability bound in
  // general; reported for illustration only.
  std::array<real, 2> class0_prob_range;
  bool interior_exceeds_corners = false;

  nlohmann::json to_json() const {
    auto eval = [](const Evaluation& e) {
      return nlohmann::json{{"input", e.input}, {"probs", e.probs}};
    };
    return {
        {"network",
         {{"hidden_weight", {{1, -1}, {-1, 1}}},
          {"output_weight", {{2, 1}, {0, 1}}},
          {"weights_constructed", true},
          {"note", "weights are constructed to reproduce the reference outputs"}}},
        {"point_outputs", eval(point)},
        {"corner_outputs", {eval(corners[0]), eval(corners[1])}},
        {"interior_output", eval(interior)},
        {"ibp_bounds",
         {{"lower", std::vector<real>(ibp_bounds.lower.values().begin(),
                                      ibp_bounds.lower.values().end())},
          {"upper", std::vector<real>(ibp_bounds.upper.values().begin(),
                                      ibp_bounds.upper.values().end())},
          {"class0_prob_range_unsound", class0_prob_range}}},
        {"interior_exceeds_corners", interior_exceeds_corners},
    };
  }
};

/// Point (2, 3) widened by 2 on each side to the box [0, 4] x [1, 5]. The two
/// bound vectors give the same output as the point; (4, 1) does not.
inline IntervalDemoReport interval_demo() {
  const Network net = two_input_network();
  auto eval = [&](real a, real b) {
    const Tensor p = softmax_probs(forward(net, Tensor({1, 2}, {a, b})));
    return IntervalDemoReport::Evaluation{{a, b}, {p[0], p[1]}};
  };
  IntervalDemoReport r;
  r.point = eval(2, 3);
  r.corners = {eval(0, 1), eval(4, 5)};
  r.interior = eval(4, 1);
  r.ibp_bounds = propagate_network(net, {Tensor({1, 2}, {0, 1}), Tensor({1, 2}, {4, 5})});
  const Tensor lo_corner = softmax_probs(
      Tensor({1, 2}, {r.ibp_bounds.lower[0], r.ibp_bounds.upper[1]}));
  const Tensor hi_corner = softmax_probs(
      Tensor({1, 2}, {r.ibp_bounds.upper[0], r.ibp_bounds.lower[1]}));
  r.class0_prob_range = {lo_corner[0], hi_corner[0]};
  r.interior_exceeds_corners = r.interior.probs[0] > r.corners[0].probs[0] &&
                               r.interior.probs[0] > r.corners[1].probs[0];
  return r;
}

}  // namespace advsub
