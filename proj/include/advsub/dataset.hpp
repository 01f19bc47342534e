#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <iomanip>
#include <string>
#include <vector>

#include "advsub/error.hpp"
#include "advsub/nn.hpp"
#include "advsub/tensor.hpp"

namespace advsub {

/// Images [N x H x W x C] with pixels in [0, 1] and one label per image.
struct DatasetHandle {
  Tensor images;
  std::vector<Label> labels;
  std::string name;
  std::size_t num_classes = 10;

  std::size_t size() const noexcept { return labels.size(); }
  ImageGeometry geometry() const { return {images.dim(1), images.dim(2), images.dim(3)}; }

  /// One image as [H x W x C].
  Tensor image(std::size_t i) const {
    auto r = images.row(i);
    return Tensor(geometry().shape(), std::vector<real>(r.begin(), r.end()));
  }

  Tensor batch(std::span<const std::size_t> indices) const { return gather_rows(images, indices); }

  std::vector<Label> batch_labels(std::span<const std::size_t> indices) const {
    std::vector<Label> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(labels.at(i));
    return out;
  }

  /// The first `n` samples (all of them when n is 0 or exceeds the size).
  DatasetHandle head(std::size_t n) const {
    if (n == 0 || n >= size()) return *this;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return {batch(idx), batch_labels(idx), name, num_classes};
  }

  void validate() const {
    require(images.rank() == 4, ErrorKind::kConsistency, "images must be [N x H x W x C]");
    require(images.dim(0) == labels.size(), ErrorKind::kConsistency,
            std::to_string(images.dim(0)) + " images but " + std::to_string(labels.size()) +
                " labels");
    for (Label y : labels)
      require(y >= 0 && static_cast<std::size_t>(y) < num_classes, ErrorKind::kConsistency,
              "label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
    for (real v : images.values())
      require(v >= 0 && v <= 1, ErrorKind::kConsistency, "pixel outside [0, 1]");
  }
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::uint32_t read_be32(const std::string& bytes, std::size_t offset,
                               const std::filesystem::path& path) {
  require(bytes.size() >= offset + 4, ErrorKind::kLength,
          path.string() + ": truncated IDX header (" + std::to_string(bytes.size()) + " bytes)");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i)
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

inline std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

inline real byte_to_unit(unsigned char b) { return static_cast<real>(b) / real{255}; }

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Reads an IDX image file (magic 0x00000803, dims N, H, W) and its IDX label
/// file (magic 0x00000801, dim N). Pixels are divided by 255.
inline DatasetHandle load_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path) {
  const std::string img = detail::read_file(images_path);
  const std::string lab = detail::read_file(labels_path);

  const std::uint32_t img_magic = detail::read_be32(img, 0, images_path);
  require(img_magic == kIdxImagesMagic, ErrorKind::kFormat,
          images_path.string() + ": bad IDX image magic " + detail::hex32(img_magic) +
              ", expected " + detail::hex32(kIdxImagesMagic));
  const std::uint32_t n = detail::read_be32(img, 4, images_path);
  const std::uint32_t h = detail::read_be32(img, 8, images_path);
  const std::uint32_t w = detail::read_be32(img, 12, images_path);
  require(n > 0 && h > 0 && w > 0, ErrorKind::kFormat,
          images_path.string() + ": IDX dimensions must be positive");
  const std::size_t pixels = static_cast<std::size_t>(n) * h * w;
  require(img.size() == 16 + pixels, ErrorKind::kLength,
          images_path.string() + ": expected " + std::to_string(16 + pixels) + " bytes, found " +
              std::to_string(img.size()));

  const std::uint32_t lab_magic = detail::read_be32(lab, 0, labels_path);
  require(lab_magic == kIdxLabelsMagic, ErrorKind::kFormat,
          labels_path.string() + ": bad IDX label magic " + detail::hex32(lab_magic) +
              ", expected " + detail::hex32(kIdxLabelsMagic));
  const std::uint32_t n_labels = detail::read_be32(lab, 4, labels_path);
  require(lab.size() == 8 + static_cast<std::size_t>(n_labels), ErrorKind::kLength,
          labels_path.string() + ": expected " + std::to_string(8 + std::size_t{n_labels}) +
              " bytes, found " + std::to_string(lab.size()));
  require(n_labels == n, ErrorKind::kConsistency,
          std::to_string(n) + " images but " + std::to_string(n_labels) + " labels");

  DatasetHandle ds;
  ds.name = images_path.filename().string();
  ds.images = Tensor({n, h, w, 1});
  for (std::size_t i = 0; i < pixels; ++i)
    ds.images[i] = detail::byte_to_unit(static_cast<unsigned char>(img[16 + i]));
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = static_cast<unsigned char>(lab[8 + i]);
  ds.validate();
  return ds;
}

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;

/// Concatenates CIFAR-10 binary batch files. Each 3073-byte record is a label
/// byte followed by the R, G and B planes (32x32 each); images come out HWC.
inline DatasetHandle load_cifar_bin(std::span<const std::filesystem::path> paths) {
  require(!paths.empty(), ErrorKind::kInvalidInput, "no CIFAR files given");
  std::vector<std::string> blobs;
  std::size_t records = 0;
  for (const auto& p : paths) {
    blobs.push_back(detail::read_file(p));
    const std::size_t len = blobs.back().size();
    require(len > 0 && len % kCifarRecordBytes == 0, ErrorKind::kLength,
            p.string() + ": length " + std::to_string(len) + " is not a positive multiple of " +
                std::to_string(kCifarRecordBytes));
    records += len / kCifarRecordBytes;
  }
  constexpr std::size_t plane = kCifarSide * kCifarSide;
  DatasetHandle ds;
  ds.name = paths.front().filename().string();
  ds.images = Tensor({records, kCifarSide, kCifarSide, 3});
  ds.labels.reserve(records);
  std::size_t r = 0;
  for (const std::string& blob : blobs) {
    for (std::size_t off = 0; off < blob.size(); off += kCifarRecordBytes, ++r) {
      ds.labels.push_back(static_cast<unsigned char>(blob[off]));
      real* dst = ds.images.data() + r * plane * 3;
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t px = 0; px < plane; ++px)
          dst[px * 3 + c] =
              detail::byte_to_unit(static_cast<unsigned char>(blob[off + 1 + c * plane + px]));
    }
  }
  ds.validate();
  return ds;
}

/// Train or test split from a directory holding the standard MNIST file names.
inline DatasetHandle load_mnist_dir(const std::filesystem::path& dir, bool train) {
  const std::string prefix = train ? "train" : "t10k";
  return load_idx(dir / (prefix + "-images-idx3-ubyte"), dir / (prefix + "-labels-idx1-ubyte"));
}

/// Train (data_batch_1..5.bin) or test (test_batch.bin) split of a CIFAR-10
/// binary directory.
inline DatasetHandle load_cifar_dir(const std::filesystem::path& dir, bool train) {
  std::vector<std::filesystem::path> paths;
  if (train) {
    for (int i = 1; i <= 5; ++i) paths.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
  } else {
    paths.push_back(dir / "test_batch.bin");
  }
  return load_cifar_bin(paths);
}

}  // namespace advsub
