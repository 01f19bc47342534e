#pragma once

// Checkpoint container (all integers little-endian):
//
//   offset 0   8 bytes   magic "ADVSUBCK"
//              u32       format version (1)
//              u32       descriptor length L
//              L bytes   architecture descriptor, UTF-8 JSON (see describe())
//              u32       tensor count T
//   T times:   u32       rank R
//              R x u64   dims
//              prod(dims) x f64   values, IEEE-754 binary64, row-major
//
// Tensors appear in Network::parameters() order. Values are always written as
// binary64, so a double build round-trips bit-exactly.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "advsub/error.hpp"
#include "advsub/nn.hpp"

namespace advsub {

inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'V', 'S', 'U', 'B', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Architecture descriptor: shapes and hyperparameters of every layer, no values.
inline nlohmann::json describe(const Network& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : net.layers()) {
    if (const auto* a = std::get_if<Affine>(&layer)) {
      layers.push_back({{"kind", "affine"}, {"in", a->in_features()}, {"out", a->out_features()}});
    } else if (const auto* c = std::get_if<Conv2D>(&layer)) {
      layers.push_back({{"kind", "conv2d"},
                        {"input", {c->input.height, c->input.width, c->input.channels}},
                        {"out_channels", c->out_channels()},
                        {"kernel", c->kernel_size()},
                        {"stride", c->stride},
                        {"padding", c->padding}});
    } else {
      layers.push_back({{"kind", "relu"}});
    }
  }
  return {{"input_shape", net.input_shape()}, {"num_classes", net.num_classes()},
          {"layers", layers}};
}

/// Zero-valued network with the architecture in `desc`.
inline Network network_from_descriptor(const nlohmann::json& desc) {
  try {
    std::vector<Layer> layers;
    for (const auto& l : desc.at("layers")) {
      const std::string kind = l.at("kind").get<std::string>();
      if (kind == "affine") {
        const auto in = l.at("in").get<std::size_t>();
        const auto out = l.at("out").get<std::size_t>();
        layers.emplace_back(Affine{Tensor({out, in}), Tensor({out})});
      } else if (kind == "conv2d") {
        const auto g = l.at("input").get<std::vector<std::size_t>>();
        require(g.size() == 3, ErrorKind::kFormat, "conv2d input must be [h, w, c]");
        const auto oc = l.at("out_channels").get<std::size_t>();
        const auto k = l.at("kernel").get<std::size_t>();
        layers.emplace_back(Conv2D{Tensor({oc, k, k, g[2]}), Tensor({oc}),
                                   l.at("stride").get<std::size_t>(),
                                   l.at("padding").get<std::size_t>(),
                                   ImageGeometry{g[0], g[1], g[2]}});
      } else if (kind == "relu") {
        layers.emplace_back(ReLU{});
      } else {
        fail(ErrorKind::kFormat, "unknown layer kind '" + kind + "'");
      }
    }
    return Network(desc.at("input_shape").get<Shape>(), std::move(layers),
                   desc.at("num_classes").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("bad architecture descriptor: ") + e.what());
  }
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    require(pos_ + n <= bytes_.size(), ErrorKind::kLength,
            "checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t le(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const Network& net) {
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_u32(out, kCheckpointVersion);
  const std::string desc = describe(net).dump();
  detail::put_u32(out, static_cast<std::uint32_t>(desc.size()));
  out += desc;
  const auto params = net.parameters();
  detail::put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Tensor* t : params) {
    detail::put_u32(out, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d : t->shape()) detail::put_u64(out, d);
    for (real v : t->values()) detail::put_u64(out, std::bit_cast<std::uint64_t>(double{v}));
  }
  return out;
}

inline Network deserialize_checkpoint(const std::string& bytes) {
  detail::ByteReader in(bytes);
  require(in.take(8) == std::string(kCheckpointMagic, 8), ErrorKind::kFormat,
          "not a checkpoint: bad magic");
  const auto version = in.le(4);
  require(version == kCheckpointVersion, ErrorKind::kFormat,
          "unsupported checkpoint version " + std::to_string(version));
  const auto desc_len = static_cast<std::size_t>(in.le(4));
  const std::string desc_text = in.take(desc_len);
  nlohmann::json desc = nlohmann::json::parse(desc_text, nullptr, false);
  require(!desc.is_discarded(), ErrorKind::kFormat, "checkpoint descriptor is not valid JSON");
  Network net = network_from_descriptor(desc);
  auto params = net.parameters();
  const auto count = in.le(4);
  require(count == params.size(), ErrorKind::kConsistency,
          "checkpoint holds " + std::to_string(count) + " tensors, architecture needs " +
              std::to_string(params.size()));
  for (Tensor* t : params) {
    const auto rank = in.le(4);
    Shape shape;
    for (std::uint64_t r = 0; r < rank; ++r) shape.push_back(static_cast<std::size_t>(in.le(8)));
    require(shape == t->shape(), ErrorKind::kConsistency,
            "tensor shape " + shape_string(shape) + " does not match architecture " +
                shape_string(t->shape()));
    for (real& v : t->values()) v = static_cast<real>(std::bit_cast<double>(in.le(8)));
  }
  require(in.done(), ErrorKind::kLength, "trailing bytes after checkpoint payload");
  return net;
}

inline void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::kIo, "write failed for " + path.string());
}

inline Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace advsub
