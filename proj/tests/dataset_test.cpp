#include "support.hpp"

namespace advsub {
namespace {

using testing::error_kind_of;
using testing::idx_images;
using testing::idx_labels;
using testing::write_bytes;

TEST(Idx, OneImageFixture) {
  testing::TempDir dir;
  write_bytes(dir / "img", idx_images(1, 28, 28, std::string(784, '\0')));
  write_bytes(dir / "lab", idx_labels(std::string(1, '\7')));
  const DatasetHandle ds = load_idx(dir / "img", dir / "lab");
  EXPECT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.images.shape(), (Shape{1, 28, 28, 1}));
  EXPECT_EQ(ds.images, Tensor({1, 28, 28, 1}));
  EXPECT_EQ(ds.labels, std::vector<Label>{7});
}

TEST(Idx, PixelsRoundTrip) {
  testing::TempDir dir;
  std::string pixels;
  for (int i = 0; i < 2 * 3 * 4; ++i) pixels.push_back(static_cast<char>(i * 11 % 256));
  pixels[5] = static_cast<char>(255);
  write_bytes(dir / "img", idx_images(2, 3, 4, pixels));
  write_bytes(dir / "lab", idx_labels(std::string{'\3', '\0'}));
  const DatasetHandle ds = load_idx(dir / "img", dir / "lab");
  for (std::size_t i = 0; i < pixels.size(); ++i)
    EXPECT_EQ(ds.images[i], static_cast<unsigned char>(pixels[i]) / 255.0);
  EXPECT_EQ(ds.images[5], 1.0);
  EXPECT_EQ(ds.labels, (std::vector<Label>{3, 0}));
  EXPECT_EQ(ds.geometry(), (ImageGeometry{3, 4, 1}));
}

TEST(Idx, BadMagicNamesValue) {
  testing::TempDir dir;
  write_bytes(dir / "img", idx_images(1, 2, 2, std::string(4, '\0'), 0x802));
  write_bytes(dir / "lab", idx_labels(std::string(1, '\0')));
  try {
    load_idx(dir / "img", dir / "lab");
    FAIL() << "expected a format error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("0x00000802"), std::string::npos) << e.what();
  }
  write_bytes(dir / "img", idx_images(1, 2, 2, std::string(4, '\0')));
  write_bytes(dir / "lab", idx_labels(std::string(1, '\0'), 0x803));
  EXPECT_EQ(error_kind_of([&] { load_idx(dir / "img", dir / "lab"); }), ErrorKind::kFormat);
}

TEST(Idx, TruncationAndMismatch) {
  testing::TempDir dir;
  write_bytes(dir / "lab", idx_labels(std::string(2, '\0')));
  write_bytes(dir / "img", idx_images(2, 2, 2, std::string(7, '\0')));
  EXPECT_EQ(error_kind_of([&] { load_idx(dir / "img", dir / "lab"); }), ErrorKind::kLength);
  write_bytes(dir / "img", testing::be32(0x803) + testing::be32(2));
  EXPECT_EQ(error_kind_of([&] { load_idx(dir / "img", dir / "lab"); }), ErrorKind::kLength);
  write_bytes(dir / "img", idx_images(3, 2, 2, std::string(12, '\0')));
  EXPECT_EQ(error_kind_of([&] { load_idx(dir / "img", dir / "lab"); }), ErrorKind::kConsistency);
  write_bytes(dir / "img", idx_images(2, 2, 2, std::string(8, '\0')));
  write_bytes(dir / "lab", idx_labels(std::string(1, '\0')) + "x");
  EXPECT_EQ(error_kind_of([&] { load_idx(dir / "img", dir / "lab"); }), ErrorKind::kLength);
  EXPECT_EQ(error_kind_of([&] { load_idx(dir / "nope", dir / "lab"); }), ErrorKind::kIo);
}

TEST(Idx, LabelOutsideClassRange) {
  testing::TempDir dir;
  write_bytes(dir / "img", idx_images(1, 2, 2, std::string(4, '\0')));
  write_bytes(dir / "lab", idx_labels(std::string(1, '\x0c')));
  EXPECT_EQ(error_kind_of([&] { load_idx(dir / "img", dir / "lab"); }), ErrorKind::kConsistency);
}

std::string cifar_record(unsigned char label, unsigned char base) {
  std::string r(1, static_cast<char>(label));
  for (int c = 0; c < 3; ++c)
    for (int px = 0; px < 1024; ++px) r.push_back(static_cast<char>((base + 7 * c + px) % 256));
  return r;
}

TEST(Cifar, TwoRecordFixtureRoundTrips) {
  testing::TempDir dir;
  write_bytes(dir / "b.bin", cifar_record(4, 10) + cifar_record(9, 200));
  const std::vector<std::filesystem::path> paths{dir / "b.bin"};
  const DatasetHandle ds = load_cifar_bin(paths);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.labels, (std::vector<Label>{4, 9}));
  EXPECT_EQ(ds.geometry(), (ImageGeometry{32, 32, 3}));
  const unsigned char bases[2] = {10, 200};
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t px = 0; px < 1024; ++px)
      for (std::size_t c = 0; c < 3; ++c)
        ASSERT_EQ(ds.images[r * 3072 + px * 3 + c], ((bases[r] + 7 * c + px) % 256) / 255.0);
}

TEST(Cifar, ConcatenatesFilesAndRejectsBadLengths) {
  testing::TempDir dir;
  write_bytes(dir / "a.bin", cifar_record(1, 0));
  write_bytes(dir / "b.bin", cifar_record(2, 0) + cifar_record(3, 0));
  const std::vector<std::filesystem::path> both{dir / "a.bin", dir / "b.bin"};
  EXPECT_EQ(load_cifar_bin(both).labels, (std::vector<Label>{1, 2, 3}));
  write_bytes(dir / "t.bin", std::string(3072, '\0'));
  const std::vector<std::filesystem::path> trunc{dir / "t.bin"};
  EXPECT_EQ(error_kind_of([&] { load_cifar_bin(trunc); }), ErrorKind::kLength);
  write_bytes(dir / "e.bin", "");
  const std::vector<std::filesystem::path> empty{dir / "e.bin"};
  EXPECT_EQ(error_kind_of([&] { load_cifar_bin(empty); }), ErrorKind::kLength);
}

TEST(BundledMnist, HeadersAndRange) {
  const DatasetHandle train = load_mnist_dir(ADVSUB_MNIST_DIR, true);
  const DatasetHandle test = load_mnist_dir(ADVSUB_MNIST_DIR, false);
  EXPECT_EQ(train.size(), 8000u);
  EXPECT_EQ(test.size(), 2000u);
  EXPECT_EQ(train.geometry(), (ImageGeometry{28, 28, 1}));
  std::vector<int> counts(10, 0);
  for (Label y : train.labels) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) EXPECT_GT(c, 600);
  EXPECT_EQ(train.head(100).size(), 100u);
}

}  // namespace
}  // namespace advsub
