#include <cmath>
#include <set>

#include "support.hpp"

namespace advsub {
namespace {

using testing::random_mlp;
using testing::random_tensor;

Network scalar_logit_net(real w) {
  std::vector<Layer> layers;
  layers.emplace_back(Affine{Tensor({2, 1}, {w, 0}), Tensor({2})});
  return Network({1}, std::move(layers), 2);
}

TEST(Fgsm, LinearModelClosedForm) {
  // z = (w x, 0), label 0: dL/dx = -(1 - sigmoid(w x)) w < 0, so FGSM steps down.
  const real w = 1.7;
  const Network net = scalar_logit_net(w);
  const Tensor x({4, 1}, {0.9, 0.5, 0.2, 0.05});
  const std::vector<Label> y(4, 0);
  const auto r = backward(net, x, y, {.param_grads = false, .input_grad = true});
  for (std::size_t b = 0; b < 4; ++b) {
    const double s = 1 / (1 + std::exp(-w * x[b]));
    EXPECT_NEAR(r.grads.input_grad[b], -(1 - s) * w / 4, 1e-15);
  }
  const Tensor adv = fgsm(net, x, y, {0.3});
  EXPECT_NEAR(adv[0], 0.6, 1e-15);
  EXPECT_NEAR(adv[1], 0.2, 1e-15);
  EXPECT_EQ(adv[2], clip01(real(0.2) - real(0.3)));
  EXPECT_EQ(adv[3], 0.0);
}

TEST(Fgsm, ZeroGradientLeavesInput) {
  std::vector<Layer> layers;
  layers.emplace_back(Affine{Tensor({3, 4}), Tensor({3}, {0.1, 0.2, 0.3})});
  const Network net({4}, std::move(layers), 3);
  Rng rng(1);
  const Tensor x = random_tensor({5, 4}, rng, 0, 1);
  const std::vector<Label> y{0, 1, 2, 0, 1};
  EXPECT_EQ(fgsm(net, x, y, {0.3}), x);
}

TEST(Fgsm, BoundAndSignDirection) {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const Network net = random_mlp({10, 8, 4}, rng);
    const Tensor x = random_tensor({16, 10}, rng, 0, 1);
    std::vector<Label> y;
    for (int b = 0; b < 16; ++b) y.push_back(static_cast<Label>(rng.below(4)));
    const real eps = 0.3;
    const Tensor adv = fgsm(net, x, y, {eps});
    const Tensor g = backward(net, x, y).grads.input_grad;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_LE(std::abs(adv[i] - x[i]), eps + 1e-12);  // one rounding of x + eps
      ASSERT_GE(adv[i], 0);
      ASSERT_LE(adv[i], 1);
      const real moved = x[i] + eps * sign_of(g[i]);
      if (g[i] != 0 && moved >= 0 && moved <= 1) {
        EXPECT_EQ(adv[i], moved);
        EXPECT_EQ(sign_of(adv[i] - x[i]), sign_of(g[i]));
      }
    }
  }
}

TEST(Fgsm, RejectsBadEpsilon) {
  const Network net = scalar_logit_net(1);
  const std::vector<Label> y{0};
  EXPECT_EQ(testing::error_kind_of([&] { fgsm(net, Tensor({1, 1}), y, {0}); }), ErrorKind::kConfig);
}

TEST(RandomPerturb, AmplitudeZeroIsIdentity) {
  Rng rng(1);
  const Tensor img = random_tensor({28, 28, 1}, rng, 0, 1);
  ScreenConfig cfg;
  cfg.amplitude = 0;
  EXPECT_EQ(random_perturb(img, cfg, rng), img);
}

TEST(RandomPerturb, ReplaysDrawOrderAndClips) {
  const Tensor img({3, 3, 1}, {0, 250.0 / 255, 1, 0.5, 0.5, 0.5, 0.1, 0.9, 0.98});
  ScreenConfig cfg;
  Rng a(99), b(99);
  const Tensor out = random_perturb(img, cfg, a);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const real u = cfg.amplitude * static_cast<real>(2.0 * b.uniform() - 1.0);
    EXPECT_EQ(out[i], std::clamp(img[i] + u, real{0}, real{1}));
  }
  EXPECT_EQ(clip01(real(250.0 / 255) + real(30.0 / 255)), 1.0);
}

TEST(RandomPerturb, NoiseMatchesUniformStatistics) {
  const Tensor img({1000, 1000}, 0.5);
  ScreenConfig cfg;
  Rng rng(2020);
  const Tensor out = random_perturb(img, cfg, rng);
  double sum = 0, sq = 0, maxabs = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out[i] - 0.5;
    sum += d;
    sq += d * d;
    maxabs = std::max(maxabs, std::abs(d));
  }
  const double n = static_cast<double>(out.size());
  const double a = 60.0 / 255.0;
  EXPECT_LT(std::abs(sum / n), 1e-3);
  EXPECT_LE(maxabs, a);
  EXPECT_NEAR(sq / n, a * a / 3, 1e-3);
}

TEST(Grid, CountExamples) {
  const ScreenConfig cfg;
  EXPECT_EQ(grid_count(224, cfg), 5u);
  EXPECT_EQ(grid_count(28, cfg), 1u);
  EXPECT_EQ(grid_count(100, cfg), 5u);
  EXPECT_EQ(grid_count(32, cfg), 1u);
  EXPECT_EQ(grid_count(1, cfg), 0u);
  ScreenConfig off = cfg;
  off.grid_line_cap = 0;
  EXPECT_EQ(grid_count(224, off), 0u);
}

std::size_t changed(const Tensor& a, const Tensor& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

TEST(Grid, ChangedPixelCounts) {
  const ScreenConfig cfg;
  Rng rng(5);
  const Tensor small({28, 28}, 0.0);
  const Tensor big({224, 224}, 0.0);
  for (int rep = 0; rep < 20; ++rep) {
    EXPECT_EQ(changed(small, grid_lines(small, cfg, rng)), 55u);
    EXPECT_EQ(changed(big, grid_lines(big, cfg, rng)), 2215u);
  }
}

TEST(Grid, ChangesExactlyTheSelectedLinesOnEveryChannel) {
  const ScreenConfig cfg;
  Rng img_rng(6);
  const Tensor img = random_tensor({40, 60, 3}, img_rng, 0, 0.9);
  Rng a(77), b(77);
  const Tensor out = grid_lines(img, cfg, a);
  const GridSelection sel = draw_grid(40, 60, cfg, b);
  ASSERT_EQ(sel.rows.size(), 2u);
  ASSERT_EQ(sel.cols.size(), 3u);
  const std::set<std::size_t> rows(sel.rows.begin(), sel.rows.end());
  const std::set<std::size_t> cols(sel.cols.begin(), sel.cols.end());
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t c = 0; c < 60; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const std::size_t i = (r * 60 + c) * 3 + ch;
        if (rows.count(r) || cols.count(c)) EXPECT_EQ(out[i], 1.0);
        else EXPECT_EQ(out[i], img[i]);
      }
}

TEST(Grid, WhiteImageUnchangedAndBadShapesRejected) {
  const ScreenConfig cfg;
  Rng rng(1);
  const Tensor white({28, 28, 1}, 1.0);
  EXPECT_EQ(grid_lines(white, cfg, rng), white);
  EXPECT_EQ(testing::error_kind_of([&] { grid_lines(Tensor({1, 28}), cfg, rng); }),
            ErrorKind::kInvalidInput);
  EXPECT_EQ(testing::error_kind_of([&] { grid_lines(Tensor({28}), cfg, rng); }),
            ErrorKind::kInvalidInput);
}

TEST(Screening, DeterministicForSeed) {
  const ScreenConfig cfg;
  Rng img_rng(2);
  const Tensor img = random_tensor({28, 28, 1}, img_rng, 0, 1);
  Rng a(123), b(123);
  EXPECT_EQ(random_perturb(img, cfg, a), random_perturb(img, cfg, b));
  EXPECT_EQ(grid_lines(img, cfg, a), grid_lines(img, cfg, b));
}

}  // namespace
}  // namespace advsub
