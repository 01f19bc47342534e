#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "advsub/advsub.hpp"

namespace advsub::testing {

/// Throws-with-kind assertion body.
template <class F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected advsub::Error";
  return ErrorKind::kIo;
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1, double hi = 1) {
  Tensor t(std::move(shape));
  for (real& v : t.values()) v = static_cast<real>(rng.uniform(lo, hi));
  return t;
}

/// Small MLP with random weights and biases in [-1, 1].
inline Network random_mlp(const std::vector<std::size_t>& sizes, Rng& rng) {
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    if (k) layers.emplace_back(ReLU{});
    layers.emplace_back(
        Affine{random_tensor({sizes[k + 1], sizes[k]}, rng), random_tensor({sizes[k + 1]}, rng)});
  }
  return Network({sizes.front()}, std::move(layers), sizes.back());
}

/// Synthetic dataset of n random images h x w x c with labels i % classes.
inline DatasetHandle synthetic_dataset(std::size_t n, std::size_t h, std::size_t w, std::size_t c,
                                       std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  DatasetHandle ds;
  ds.images = random_tensor({n, h, w, c}, rng, 0, 1);
  for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<Label>(i % classes));
  ds.num_classes = classes;
  ds.name = "synthetic";
  return ds;
}

/// Per-test scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string tag = info ? std::string(info->test_suite_name()) + "_" + info->name() : "tmp";
    path_ = std::filesystem::temp_directory_path() /
            ("advsub_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::string be32(std::uint32_t v) {
  return {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
          static_cast<char>(v)};
}

inline std::string idx_images(std::uint32_t n, std::uint32_t h, std::uint32_t w,
                              const std::string& pixels, std::uint32_t magic = 0x803) {
  return be32(magic) + be32(n) + be32(h) + be32(w) + pixels;
}

inline std::string idx_labels(const std::string& labels, std::uint32_t magic = 0x801) {
  return be32(magic) + be32(static_cast<std::uint32_t>(labels.size())) + labels;
}

}  // namespace advsub::testing
