#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "advsub/error.hpp"
#include "advsub/rng.hpp"
#include "advsub/tensor.hpp"

namespace advsub {

using Label = std::int32_t;

struct ImageGeometry {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const noexcept { return height * width * channels; }
  Shape shape() const { return {height, width, channels}; }
  friend bool operator==(const ImageGeometry&, const ImageGeometry&) = default;
};

/// y = W x + b with W stored [out x in].
struct Affine {
  Tensor weight;
  Tensor bias;

  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }
};

/// 2-D convolution over HWC images. Kernels are stored [out_c x k x k x in_c].
struct Conv2D {
  Tensor kernels;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
  ImageGeometry input;

  std::size_t kernel_size() const { return kernels.dim(1); }
  std::size_t out_channels() const { return kernels.dim(0); }

  ImageGeometry output() const {
    const std::size_t k = kernel_size();
    auto extent = [&](std::size_t n) -> std::size_t {
      if (n + 2 * padding < k) return 0;
      return (n + 2 * padding - k) / stride + 1;
    };
    return {extent(input.height), extent(input.width), out_channels()};
  }
};

struct ReLU {};

using Layer = std::variant<Affine, Conv2D, ReLU>;

/// Ordered stack of layers ending in `num_classes` logits. Softmax is never a
/// layer; it lives in the loss and probability functions.
class Network {
 public:
  Network() = default;

  Network(Shape input_shape, std::vector<Layer> layers, std::size_t num_classes)
      : input_shape_(std::move(input_shape)),
        layers_(std::move(layers)),
        num_classes_(num_classes) {
    validate();
  }

  const Shape& input_shape() const noexcept { return input_shape_; }
  std::size_t input_size() const { return shape_product(input_shape_); }
  std::size_t num_classes() const noexcept { return num_classes_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// Flat feature count entering each layer, plus the final output size.
  const std::vector<std::size_t>& activation_sizes() const noexcept { return sizes_; }

  /// Parameter tensors in canonical order: per layer, weight/kernels then bias.
  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
      if (auto* a = std::get_if<Affine>(&layer)) {
        out.push_back(&a->weight);
        out.push_back(&a->bias);
      } else if (auto* c = std::get_if<Conv2D>(&layer)) {
        out.push_back(&c->kernels);
        out.push_back(&c->bias);
      }
    }
    return out;
  }

  std::vector<const Tensor*> parameters() const {
    std::vector<const Tensor*> out;
    for (Tensor* t : const_cast<Network*>(this)->parameters()) out.push_back(t);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->size();
    return n;
  }

  friend bool operator==(const Network& a, const Network& b) {
    if (a.input_shape_ != b.input_shape_ || a.num_classes_ != b.num_classes_ ||
        a.layers_.size() != b.layers_.size())
      return false;
    auto pa = a.parameters();
    auto pb = b.parameters();
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
      if (!(*pa[i] == *pb[i])) return false;
    return true;
  }

 private:
  void validate() {
    require(!input_shape_.empty() && input_size() > 0, ErrorKind::kInvalidInput,
            "network input shape must be non-empty");
    require(num_classes_ > 0, ErrorKind::kInvalidInput, "num_classes must be positive");
    sizes_.assign(1, input_size());
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const std::size_t in = sizes_.back();
      const std::string where = "layer " + std::to_string(k) + ": ";
      std::size_t out = in;
      if (const auto* a = std::get_if<Affine>(&layers_[k])) {
        require(a->weight.rank() == 2 && a->bias.rank() == 1, ErrorKind::kInvalidInput,
                where + "affine weight must be 2-D and bias 1-D");
        require(a->bias.dim(0) == a->out_features(), ErrorKind::kInvalidInput,
                where + "affine bias length does not match weight rows");
        require(a->in_features() == in, ErrorKind::kInvalidInput,
                where + "affine expects " + std::to_string(a->in_features()) +
                    " inputs but receives " + std::to_string(in));
        out = a->out_features();
      } else if (const auto* c = std::get_if<Conv2D>(&layers_[k])) {
        require(c->kernels.rank() == 4 && c->kernels.dim(1) == c->kernels.dim(2),
                ErrorKind::kInvalidInput, where + "conv kernels must be [out, k, k, in]");
        require(c->bias.rank() == 1 && c->bias.dim(0) == c->out_channels(),
                ErrorKind::kInvalidInput, where + "conv bias length mismatch");
        require(c->stride >= 1, ErrorKind::kInvalidInput, where + "conv stride must be >= 1");
        require(c->input.size() == in && c->input.channels == c->kernels.dim(3),
                ErrorKind::kInvalidInput, where + "conv input geometry does not compose");
        const ImageGeometry o = c->output();
        require(o.height >= 1 && o.width >= 1, ErrorKind::kInvalidInput,
                where + "conv output would be empty");
        out = o.size();
      }
      sizes_.push_back(out);
    }
    require(sizes_.back() == num_classes_, ErrorKind::kInvalidInput,
            "final layer produces " + std::to_string(sizes_.back()) + " outputs, expected " +
                std::to_string(num_classes_) + " classes");
  }

  Shape input_shape_;
  std::vector<Layer> layers_;
  std::size_t num_classes_ = 0;
  std::vector<std::size_t> sizes_;
};

namespace detail {

/// Batch size of `batch` after checking its trailing dims cover one network input.
inline std::size_t batch_rows(const Network& net, const Tensor& batch) {
  require(batch.rank() >= 2, ErrorKind::kInvalidInput,
          "batch must have a leading batch axis, got shape " + shape_string(batch.shape()));
  require(batch.row_size() == net.input_size(), ErrorKind::kInvalidInput,
          "batch shape " + shape_string(batch.shape()) + " does not match network input " +
              shape_string(net.input_shape()));
  require(batch.all_finite(), ErrorKind::kInvalidInput, "batch contains non-finite values");
  return batch.dim(0);
}

// Rows are processed in blocks that share each weight row while it is hot in
// cache. Every output still sums its terms in ascending input order, and zero
// inputs are skipped (most image pixels are exactly zero).
inline constexpr std::size_t kRowBlock = 8;

inline void affine_forward(const Affine& layer, const real* in, std::size_t rows, real* out) {
  const std::size_t n_in = layer.in_features();
  const std::size_t n_out = layer.out_features();
  std::vector<real> wt(n_in * n_out);
  for (std::size_t o = 0; o < n_out; ++o)
    for (std::size_t i = 0; i < n_in; ++i) wt[i * n_out + o] = layer.weight[o * n_in + i];
  for (std::size_t b = 0; b < rows; ++b)
    std::copy(layer.bias.data(), layer.bias.data() + n_out, out + b * n_out);
  for (std::size_t b0 = 0; b0 < rows; b0 += kRowBlock) {
    const std::size_t b1 = std::min(rows, b0 + kRowBlock);
    for (std::size_t i = 0; i < n_in; ++i) {
      const real* w = wt.data() + i * n_out;
      for (std::size_t b = b0; b < b1; ++b) {
        const real xi = in[b * n_in + i];
        if (xi == 0) continue;
        real* y = out + b * n_out;
        for (std::size_t o = 0; o < n_out; ++o) y[o] += xi * w[o];
      }
    }
  }
}

inline void conv_forward(const Conv2D& layer, const real* in, std::size_t rows, real* out) {
  const ImageGeometry g = layer.input;
  const ImageGeometry og = layer.output();
  const std::size_t k = layer.kernel_size();
  for (std::size_t b = 0; b < rows; ++b) {
    const real* x = in + b * g.size();
    real* y = out + b * og.size();
    for (std::size_t oy = 0; oy < og.height; ++oy) {
      for (std::size_t ox = 0; ox < og.width; ++ox) {
        for (std::size_t oc = 0; oc < og.channels; ++oc) {
          real acc = layer.bias[oc];
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * layer.stride + ky) -
                                      static_cast<std::ptrdiff_t>(layer.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * layer.stride + kx) -
                                        static_cast<std::ptrdiff_t>(layer.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
              const real* px = x + (static_cast<std::size_t>(iy) * g.width + ix) * g.channels;
              const real* kw = layer.kernels.data() + ((oc * k + ky) * k + kx) * g.channels;
              for (std::size_t ic = 0; ic < g.channels; ++ic) acc += px[ic] * kw[ic];
            }
          }
          y[(oy * og.width + ox) * og.channels + oc] = acc;
        }
      }
    }
  }
}

inline void relu_forward(const real* in, std::size_t n, real* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0 ? in[i] : real{0};
}

}  // namespace detail

/// Activations entering each layer (as [B x features]); back() holds the logits.
struct ForwardTrace {
  std::vector<Tensor> activations;
  const Tensor& logits() const { return activations.back(); }
};

inline ForwardTrace forward_trace(const Network& net, const Tensor& batch) {
  const std::size_t rows = detail::batch_rows(net, batch);
  const auto& sizes = net.activation_sizes();
  ForwardTrace trace;
  trace.activations.reserve(sizes.size());
  trace.activations.push_back(batch.reshaped({rows, sizes[0]}));
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    Tensor out({rows, sizes[k + 1]});
    const real* in = trace.activations.back().data();
    std::visit(
        [&](const auto& layer) {
          using L = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<L, Affine>) {
            detail::affine_forward(layer, in, rows, out.data());
          } else if constexpr (std::is_same_v<L, Conv2D>) {
            detail::conv_forward(layer, in, rows, out.data());
          } else {
            detail::relu_forward(in, rows * sizes[k], out.data());
          }
        },
        net.layers()[k]);
    trace.activations.push_back(std::move(out));
  }
  return trace;
}

/// Logits [B x C]. Pure: never mutates `net`.
inline Tensor forward(const Network& net, const Tensor& batch) {
  return std::move(forward_trace(net, batch).activations.back());
}

/// Row-wise softmax with max subtraction.
inline Tensor softmax_probs(const Tensor& logits) {
  require(logits.rank() == 2 && logits.dim(1) >= 2, ErrorKind::kInvalidInput,
          "softmax expects [B x C] logits with C >= 2");
  Tensor probs(logits.shape());
  const std::size_t c = logits.dim(1);
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    auto z = logits.row(b);
    auto p = probs.row(b);
    const real m = *std::max_element(z.begin(), z.end());
    real sum = 0;
    for (std::size_t j = 0; j < c; ++j) {
      p[j] = std::exp(z[j] - m);
      sum += p[j];
    }
    for (std::size_t j = 0; j < c; ++j) p[j] /= sum;
  }
  return probs;
}

inline std::size_t argmax(std::span<const real> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

inline std::vector<Label> argmax_rows(const Tensor& scores) {
  std::vector<Label> out(scores.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = static_cast<Label>(argmax(scores.row(b)));
  return out;
}

namespace detail {

inline void check_labels(const Tensor& logits, std::span<const Label> labels) {
  require(logits.rank() == 2, ErrorKind::kInvalidInput, "logits must be [B x C]");
  require(labels.size() == logits.dim(0), ErrorKind::kInvalidInput,
          "got " + std::to_string(labels.size()) + " labels for a batch of " +
              std::to_string(logits.dim(0)));
  for (Label y : labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < logits.dim(1), ErrorKind::kInvalidInput,
            "label " + std::to_string(y) + " outside [0, " + std::to_string(logits.dim(1)) + ")");
  }
}

inline real log_sum_exp(std::span<const real> z) {
  const real m = *std::max_element(z.begin(), z.end());
  real s = 0;
  for (real v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace detail

/// Mean negative log-likelihood of the true class.
inline real cross_entropy(const Tensor& logits, std::span<const Label> labels) {
  detail::check_labels(logits, labels);
  real total = 0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    auto z = logits.row(b);
    total += detail::log_sum_exp(z) - z[static_cast<std::size_t>(labels[b])];
  }
  return total / static_cast<real>(labels.size());
}

struct GradientSet {
  std::vector<Tensor> param_grads;  // same order as Network::parameters()
  Tensor input_grad;                // same shape as the batch
};

struct BackwardOptions {
  bool param_grads = true;
  bool input_grad = true;
};

struct BackwardResult {
  real loss = 0;
  GradientSet grads;
};

namespace detail {

inline void affine_backward(const Affine& layer, const Tensor& input, const Tensor& delta,
                            Tensor* d_weight, Tensor* d_bias, Tensor* d_input) {
  const std::size_t rows = input.dim(0);
  const std::size_t n_in = layer.in_features();
  const std::size_t n_out = layer.out_features();
  if (d_weight) {
    std::vector<real> dwt(n_in * n_out, 0);
    for (std::size_t i = 0; i < n_in; ++i) {
      real* g = dwt.data() + i * n_out;
      for (std::size_t b = 0; b < rows; ++b) {
        const real xi = input[b * n_in + i];
        if (xi == 0) continue;
        const real* d = delta.data() + b * n_out;
        for (std::size_t o = 0; o < n_out; ++o) g[o] += xi * d[o];
      }
    }
    *d_weight = Tensor(layer.weight.shape());
    for (std::size_t o = 0; o < n_out; ++o)
      for (std::size_t i = 0; i < n_in; ++i) (*d_weight)[o * n_in + i] = dwt[i * n_out + o];
    *d_bias = Tensor(layer.bias.shape());
    for (std::size_t b = 0; b < rows; ++b)
      for (std::size_t o = 0; o < n_out; ++o) (*d_bias)[o] += delta[b * n_out + o];
  }
  if (d_input) {
    *d_input = Tensor({rows, n_in});
    for (std::size_t b0 = 0; b0 < rows; b0 += kRowBlock) {
      const std::size_t b1 = std::min(rows, b0 + kRowBlock);
      for (std::size_t o = 0; o < n_out; ++o) {
        const real* w = layer.weight.data() + o * n_in;
        for (std::size_t b = b0; b < b1; ++b) {
          const real d = delta[b * n_out + o];
          if (d == 0) continue;
          real* dx = d_input->data() + b * n_in;
          for (std::size_t i = 0; i < n_in; ++i) dx[i] += d * w[i];
        }
      }
    }
  }
}

inline void conv_backward(const Conv2D& layer, const Tensor& input, const Tensor& delta,
                          Tensor* d_kernels, Tensor* d_bias, Tensor* d_input) {
  const std::size_t rows = input.dim(0);
  const ImageGeometry g = layer.input;
  const ImageGeometry og = layer.output();
  const std::size_t k = layer.kernel_size();
  if (d_kernels) {
    *d_kernels = Tensor(layer.kernels.shape());
    *d_bias = Tensor(layer.bias.shape());
  }
  if (d_input) *d_input = Tensor({rows, g.size()});
  for (std::size_t b = 0; b < rows; ++b) {
    const real* x = input.data() + b * g.size();
    const real* dy = delta.data() + b * og.size();
    real* dx = d_input ? d_input->data() + b * g.size() : nullptr;
    for (std::size_t oy = 0; oy < og.height; ++oy) {
      for (std::size_t ox = 0; ox < og.width; ++ox) {
        for (std::size_t oc = 0; oc < og.channels; ++oc) {
          const real d = dy[(oy * og.width + ox) * og.channels + oc];
          if (d_bias) (*d_bias)[oc] += d;
          if (d == 0) continue;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * layer.stride + ky) -
                                      static_cast<std::ptrdiff_t>(layer.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * layer.stride + kx) -
                                        static_cast<std::ptrdiff_t>(layer.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
              const std::size_t pix = (static_cast<std::size_t>(iy) * g.width + ix) * g.channels;
              const std::size_t kof = ((oc * k + ky) * k + kx) * g.channels;
              for (std::size_t ic = 0; ic < g.channels; ++ic) {
                if (d_kernels) (*d_kernels)[kof + ic] += d * x[pix + ic];
                if (dx) dx[pix + ic] += d * layer.kernels[kof + ic];
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Loss and gradients of mean cross-entropy with respect to parameters and/or
/// the input batch.
inline BackwardResult backward(const Network& net, const Tensor& batch,
                               std::span<const Label> labels, BackwardOptions opts = {}) {
  ForwardTrace trace = forward_trace(net, batch);
  const Tensor& logits = trace.logits();
  BackwardResult result;
  result.loss = cross_entropy(logits, labels);

  const std::size_t rows = logits.dim(0);
  Tensor delta = softmax_probs(logits);
  const real inv_rows = real{1} / static_cast<real>(rows);
  for (std::size_t b = 0; b < rows; ++b) {
    auto d = delta.row(b);
    d[static_cast<std::size_t>(labels[b])] -= 1;
    for (real& v : d) v *= inv_rows;
  }

  const auto& layers = net.layers();
  std::vector<Tensor> layer_grads;  // reverse order, appended as we go
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Tensor& input = trace.activations[k];
    const bool need_input = k > 0 || opts.input_grad;
    Tensor d_input;
    std::visit(
        [&](const auto& layer) {
          using L = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<L, ReLU>) {
            d_input = Tensor(input.shape());
            for (std::size_t i = 0; i < input.size(); ++i)
              d_input[i] = input[i] > 0 ? delta[i] : real{0};
          } else {
            Tensor dw, db;
            if constexpr (std::is_same_v<L, Affine>) {
              detail::affine_backward(layer, input, delta, opts.param_grads ? &dw : nullptr,
                                      opts.param_grads ? &db : nullptr,
                                      need_input ? &d_input : nullptr);
            } else {
              detail::conv_backward(layer, input, delta, opts.param_grads ? &dw : nullptr,
                                    opts.param_grads ? &db : nullptr,
                                    need_input ? &d_input : nullptr);
            }
            if (opts.param_grads) {
              layer_grads.push_back(std::move(db));
              layer_grads.push_back(std::move(dw));
            }
          }
        },
        layers[k]);
    if (!need_input) break;
    delta = std::move(d_input);
  }
  result.grads.param_grads.assign(std::make_move_iterator(layer_grads.rbegin()),
                                  std::make_move_iterator(layer_grads.rend()));
  if (opts.input_grad) result.grads.input_grad = delta.reshaped(batch.shape());
  return result;
}

struct SGDConfig {
  real learning_rate = real(0.01);
  real momentum = real(0.9);
  real weight_decay = 0;

  void validate() const {
    require(learning_rate >= 0 && std::isfinite(learning_rate), ErrorKind::kConfig,
            "learning_rate must be finite and non-negative");
    require(momentum >= 0 && momentum < 1, ErrorKind::kConfig, "momentum must lie in [0, 1)");
    require(weight_decay >= 0, ErrorKind::kConfig, "weight_decay must be non-negative");
  }
};

/// Momentum buffers, lazily sized on the first step.
struct SgdState {
  std::vector<Tensor> velocity;
};

/// v <- momentum * v + (grad + weight_decay * theta); theta <- theta - lr * v.
inline void sgd_step(Network& net, const GradientSet& grads, const SGDConfig& cfg,
                     SgdState& state) {
  auto params = net.parameters();
  require(grads.param_grads.size() == params.size(), ErrorKind::kInvalidInput,
          "gradient set does not match network parameters");
  if (state.velocity.empty()) {
    for (const Tensor* p : params) state.velocity.emplace_back(p->shape());
  }
  require(state.velocity.size() == params.size(), ErrorKind::kInvalidInput,
          "momentum state does not match network parameters");
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& theta = *params[t];
    const Tensor& g = grads.param_grads[t];
    Tensor& v = state.velocity[t];
    require(g.shape() == theta.shape() && v.shape() == theta.shape(), ErrorKind::kInvalidInput,
            "gradient shape mismatch for parameter " + std::to_string(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = cfg.momentum * v[i] + (g[i] + cfg.weight_decay * theta[i]);
      theta[i] -= cfg.learning_rate * v[i];
    }
  }
}

// ---- model factories ------------------------------------------------------

/// Affine layer with He-uniform weights and zero bias.
inline Affine make_affine(std::size_t in, std::size_t out, Rng& rng) {
  Affine a{Tensor({out, in}), Tensor({out})};
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  for (real& w : a.weight.values()) w = static_cast<real>(rng.uniform(-bound, bound));
  return a;
}

inline Conv2D make_conv(ImageGeometry input, std::size_t out_channels, std::size_t kernel,
                        std::size_t stride, std::size_t padding, Rng& rng) {
  Conv2D c{Tensor({out_channels, kernel, kernel, input.channels}), Tensor({out_channels}),
           stride, padding, input};
  const double bound = std::sqrt(6.0 / static_cast<double>(kernel * kernel * input.channels));
  for (real& w : c.kernels.values()) w = static_cast<real>(rng.uniform(-bound, bound));
  return c;
}

enum class ModelKind { kMlp, kCnn };

/// input -> Affine(hidden) -> ReLU -> Affine(classes); 784-256-10 on MNIST.
inline Network make_mlp(const ImageGeometry& input, std::size_t hidden, std::size_t classes,
                        Rng& rng) {
  std::vector<Layer> layers;
  layers.emplace_back(make_affine(input.size(), hidden, rng));
  layers.emplace_back(ReLU{});
  layers.emplace_back(make_affine(hidden, classes, rng));
  return Network(input.shape(), std::move(layers), classes);
}

/// Two stride-2 5x5 convolutions (8 and 16 channels) then Affine(64) and
/// Affine(classes), ReLU between each.
inline Network make_cnn(const ImageGeometry& input, std::size_t classes, Rng& rng) {
  std::vector<Layer> layers;
  Conv2D c1 = make_conv(input, 8, 5, 2, 2, rng);
  const ImageGeometry g1 = c1.output();
  layers.emplace_back(std::move(c1));
  layers.emplace_back(ReLU{});
  Conv2D c2 = make_conv(g1, 16, 5, 2, 2, rng);
  const ImageGeometry g2 = c2.output();
  layers.emplace_back(std::move(c2));
  layers.emplace_back(ReLU{});
  layers.emplace_back(make_affine(g2.size(), 64, rng));
  layers.emplace_back(ReLU{});
  layers.emplace_back(make_affine(64, classes, rng));
  return Network(input.shape(), std::move(layers), classes);
}

inline Network make_model(ModelKind kind, const ImageGeometry& input, std::size_t classes,
                          std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1417, 0));
  return kind == ModelKind::kMlp ? make_mlp(input, 256, classes, rng)
                                 : make_cnn(input, classes, rng);
}

}  // namespace advsub
