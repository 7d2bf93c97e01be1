// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Separable bilinear resize with antialiasing (triangle filter widened by
// the scale factor when downsampling), center crop and reflection padding.

#pragma once

#include "core/colorspace.hpp"

namespace duocolor::data {

using duocolor::color::RgbImage;

namespace detail {

struct FilterTap {
  int64_t first;
  std::vector<double> weights;  // normalized
};

inline std::vector<FilterTap> build_taps(int64_t in_size, int64_t out_size) {
  double scale = static_cast<double>(in_size) / out_size;
  double support = std::max(1.0, scale);
  std::vector<FilterTap> taps(out_size);
  for (int64_t o = 0; o < out_size; ++o) {
    double center = (o + 0.5) * scale;
    int64_t first = static_cast<int64_t>(std::floor(center - support + 0.5));
    int64_t last = static_cast<int64_t>(std::floor(center + support - 0.5));
    first = std::max<int64_t>(first, 0);
    last = std::min<int64_t>(last, in_size - 1);
    FilterTap t;
    t.first = first;
    double total = 0;
    for (int64_t i = first; i <= last; ++i) {
      double x = (i + 0.5 - center) / std::max(1.0, scale);
      double w = std::max(0.0, 1.0 - std::abs(x));  // triangle
      t.weights.push_back(w);
      total += w;
    }
    if (total <= 0) {  // degenerate tap; nearest neighbor fallback
      t.weights.assign(1, 1.0);
      t.first = std::min<int64_t>(in_size - 1, static_cast<int64_t>(center));
      total = 1.0;
    }
    for (auto& w : t.weights) w /= total;
    taps[o] = std::move(t);
  }
  return taps;
}

}  // namespace detail

template <typename T>
RgbImage<T> resize_bilinear(const RgbImage<T>& img, int64_t out_h, int64_t out_w) {
  check_arg(out_h >= 1 && out_w >= 1, "resize: output dims must be positive");
  if (img.h == out_h && img.w == out_w) return img;
  auto col_taps = detail::build_taps(img.w, out_w);
  auto row_taps = detail::build_taps(img.h, out_h);

  // horizontal pass
  RgbImage<double> tmp{img.h, out_w, std::vector<double>(static_cast<size_t>(img.h * out_w * 3))};
  for (int64_t y = 0; y < img.h; ++y)
    for (int64_t o = 0; o < out_w; ++o) {
      const auto& t = col_taps[o];
      double acc[3] = {0, 0, 0};
      for (size_t k = 0; k < t.weights.size(); ++k) {
        const T* p = &img.px[(y * img.w + t.first + static_cast<int64_t>(k)) * 3];
        for (int c = 0; c < 3; ++c) acc[c] += t.weights[k] * p[c];
      }
      for (int c = 0; c < 3; ++c) tmp.px[(y * out_w + o) * 3 + c] = acc[c];
    }

  // vertical pass
  RgbImage<T> out{out_h, out_w, std::vector<T>(static_cast<size_t>(out_h * out_w * 3))};
  for (int64_t o = 0; o < out_h; ++o) {
    const auto& t = row_taps[o];
    for (int64_t x = 0; x < out_w; ++x) {
      double acc[3] = {0, 0, 0};
      for (size_t k = 0; k < t.weights.size(); ++k) {
        const double* p = &tmp.px[((t.first + static_cast<int64_t>(k)) * out_w + x) * 3];
        for (int c = 0; c < 3; ++c) acc[c] += t.weights[k] * p[c];
      }
      for (int c = 0; c < 3; ++c)
        out.px[(o * out_w + x) * 3 + c] = static_cast<T>(std::min(1.0, std::max(0.0, acc[c])));
    }
  }
  return out;
}

template <typename T>
RgbImage<T> center_crop_square(const RgbImage<T>& img) {
  int64_t side = std::min(img.h, img.w);
  int64_t y0 = (img.h - side) / 2;
  int64_t x0 = (img.w - side) / 2;
  if (side == img.h && side == img.w) return img;
  RgbImage<T> out{side, side, std::vector<T>(static_cast<size_t>(side * side * 3))};
  for (int64_t y = 0; y < side; ++y)
    std::copy(&img.px[((y0 + y) * img.w + x0) * 3], &img.px[((y0 + y) * img.w + x0 + side) * 3],
              &out.px[y * side * 3]);
  return out;
}

// Bounce (mirror) index for reflection padding; valid for any pad size.
inline int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  int64_t period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

// Pads on the bottom/right with mirrored content.
template <typename T>
RgbImage<T> reflect_pad_bottom_right(const RgbImage<T>& img, int64_t pad_h, int64_t pad_w) {
  if (pad_h == 0 && pad_w == 0) return img;
  int64_t oh = img.h + pad_h, ow = img.w + pad_w;
  RgbImage<T> out{oh, ow, std::vector<T>(static_cast<size_t>(oh * ow * 3))};
  for (int64_t y = 0; y < oh; ++y) {
    int64_t sy = reflect_index(y, img.h);
    for (int64_t x = 0; x < ow; ++x) {
      int64_t sx = reflect_index(x, img.w);
      for (int c = 0; c < 3; ++c) out.px[(y * ow + x) * 3 + c] = img.at(sy, sx, c);
    }
  }
  return out;
}

}  // namespace duocolor::data
