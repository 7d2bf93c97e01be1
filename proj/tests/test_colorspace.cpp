// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/colorspace.hpp"
#include "core/ops_image.hpp"
#include "test_util.hpp"

using namespace duocolor;
using namespace duocolor::color;
using duocolor::testutil::check_gradients;

TEST_CASE("reference white, black and mid gray") {
  auto white = rgb_to_lab(RgbImage<double>::uniform(2, 2, 1.0, 1.0, 1.0));
  CHECK(white.at(0, 0, 0) == doctest::Approx(100.0).epsilon(1e-5));
  CHECK(std::abs(white.at(0, 0, 1)) < 1e-2);
  CHECK(std::abs(white.at(0, 0, 2)) < 1e-2);

  auto black = rgb_to_lab(RgbImage<double>::uniform(1, 1, 0.0, 0.0, 0.0));
  CHECK(black.at(0, 0, 0) == doctest::Approx(0.0));
  CHECK(black.at(0, 0, 1) == doctest::Approx(0.0));
  CHECK(black.at(0, 0, 2) == doctest::Approx(0.0));

  // frozen from an independent evaluation of the sRGB -> XYZ -> Lab formulas
  auto gray = rgb_to_lab(RgbImage<double>::uniform(1, 1, 0.5, 0.5, 0.5));
  CHECK(gray.at(0, 0, 0) == doctest::Approx(53.3890).epsilon(1e-4));
  CHECK(std::abs(gray.at(0, 0, 1)) < 1e-2);
  CHECK(std::abs(gray.at(0, 0, 2)) < 1e-2);

  auto red = rgb_to_lab(RgbImage<double>::uniform(1, 1, 1.0, 0.0, 0.0));
  CHECK(red.at(0, 0, 0) == doctest::Approx(53.2408).epsilon(1e-4));
  CHECK(red.at(0, 0, 1) == doctest::Approx(80.0925).epsilon(1e-4));
  CHECK(red.at(0, 0, 2) == doctest::Approx(67.2032).epsilon(1e-4));
}

TEST_CASE("lab_to_rgb inverts rgb_to_lab within 1e-3") {
  Rng rng(99);
  RgbImage<float> img{40, 25, std::vector<float>(40 * 25 * 3)};
  for (auto& v : img.px) v = static_cast<float>(rng.uniform());
  auto lab = rgb_to_lab(img);
  auto back = lab_to_rgb(lab);
  double max_err = 0;
  for (size_t i = 0; i < img.px.size(); ++i)
    max_err = std::max(max_err, std::abs(double(img.px[i]) - double(back.px[i])));
  CHECK(max_err < 1e-3);

  // L=100 -> white, L=0 -> black
  LabImage<float> white{1, 1, {100.0f, 0.0f, 0.0f}};
  auto w = lab_to_rgb(white);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(w.px[c] - 1.0f) < 1e-3f);
  LabImage<float> black{1, 1, {0.0f, 0.0f, 0.0f}};
  auto b = lab_to_rgb(black);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(b.px[c]) < 1e-3f);
}

TEST_CASE("gray images have neutral chroma and monotone L") {
  double prev_l = -1;
  for (int i = 0; i <= 64; ++i) {
    double v = i / 64.0;
    auto lab = rgb_to_lab(RgbImage<double>::uniform(1, 1, v, v, v));
    CHECK(std::abs(lab.at(0, 0, 1)) < 1e-2);
    CHECK(std::abs(lab.at(0, 0, 2)) < 1e-2);
    CHECK(lab.at(0, 0, 0) > prev_l);
    prev_l = lab.at(0, 0, 0);
  }
}

TEST_CASE("non-finite input is rejected with a diagnostic") {
  RgbImage<float> img = RgbImage<float>::uniform(2, 2, 0.5f, 0.5f, 0.5f);
  img.px[4] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(rgb_to_lab(img), UsageError);
}

TEST_CASE("split and merge are exact inverses") {
  Rng rng(123);
  RgbImage<float> src{8, 6, std::vector<float>(8 * 6 * 3)};
  for (auto& v : src.px) v = static_cast<float>(rng.uniform());
  auto lab = rgb_to_lab(src);
  auto [l, ab] = split_luminance(lab);
  CHECK(l.shape() == Shape{1, 8, 6});
  CHECK(ab.shape() == Shape{2, 8, 6});

  auto merged = merge_channels(l, ab);
  REQUIRE(merged.px.size() == lab.px.size());
  for (size_t i = 0; i < lab.px.size(); ++i) CHECK(merged.px[i] == lab.px[i]);

  // gray image -> AB ~ 0
  auto gray_lab = rgb_to_lab(RgbImage<float>::uniform(4, 4, 0.3f, 0.3f, 0.3f));
  auto [gl, gab] = split_luminance(gray_lab);
  (void)gl;
  for (int64_t i = 0; i < gab.numel(); ++i) CHECK(std::abs(gab[i]) < 1e-2f);

  // dim mismatch rejected
  Tensor<float> l64({1, 64, 64});
  Tensor<float> ab32({2, 32, 32});
  CHECK_THROWS_AS(merge_channels(l64, ab32), UsageError);

  // gray luminance + zero AB -> gray rgb
  Tensor<float> zero_ab({2, 4, 4});
  auto gray2 = merge_channels(gl, zero_ab);
  auto rgb2 = lab_to_rgb(gray2);
  for (int64_t i = 0; i < 16; ++i) {
    CHECK(rgb2.px[i * 3 + 0] == doctest::Approx(0.3f).epsilon(1e-3));
    CHECK(rgb2.px[i * 3 + 1] == doctest::Approx(0.3f).epsilon(1e-3));
  }
}

TEST_CASE("split shapes for a 256x256 image") {
  LabImage<float> lab{256, 256, std::vector<float>(256 * 256 * 3, 10.0f)};
  auto [l, ab] = split_luminance(lab);
  CHECK(l.shape() == Shape{1, 256, 256});
  CHECK(ab.shape() == Shape{2, 256, 256});
}

TEST_CASE("differentiable lab->rgb matches the plain path in gamut") {
  Rng rng(7);
  const int64_t h = 5, w = 4;
  RgbImage<double> src{h, w, std::vector<double>(h * w * 3)};
  for (auto& v : src.px) v = rng.uniform(0.05, 0.95);
  auto lab = rgb_to_lab(src);

  auto lab_var = ad::constant(lab_to_planar(lab).reshape({1, 3, h, w}));
  auto rgb_var = ad::lab_to_rgb_unit(lab_var);
  auto plain = lab_to_rgb(lab);
  auto plain_planar = rgb_to_planar(plain);
  for (int64_t i = 0; i < plain_planar.numel(); ++i)
    CHECK(rgb_var->value[i] == doctest::Approx(plain_planar[i]).epsilon(1e-9));
}

TEST_CASE("differentiable lab->rgb gradient check, including out-of-gamut") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor<double> lab({1, 3, 2, 3});
    // L in [5,95], AB in [-120,120]: far beyond the sRGB gamut
    for (int64_t i = 0; i < 6; ++i) lab[i] = rng.uniform(5, 95);
    for (int64_t i = 6; i < 18; ++i) lab[i] = rng.uniform(-120, 120);
    auto x = ad::leaf(lab, true);
    auto wc = ad::constant(duocolor::testutil::random_tensor<double>({1, 3, 2, 3}, rng));
    auto res = check_gradients(
        {x}, [&]() { return ad::sum_all(ad::mul(ad::lab_to_rgb_unit(x), wc)); });
    CHECK(res.max_rel_err < 1e-5);
    auto y = ad::lab_to_rgb_unit(x);
    CHECK(y->value.all_finite());
  }
}
