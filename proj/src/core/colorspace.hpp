// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// sRGB <-> CIELAB conversion under the D65 reference white, plus the
// luminance/chrominance split used by the colorization pipeline. All math
// runs in floating point; 8-bit quantization happens only at file I/O.

#pragma once

#include "core/tensor.hpp"

namespace duocolor::color {

// Interleaved H x W x 3, R,G,B in [0,1].
template <typename T>
struct RgbImage {
  int64_t h = 0, w = 0;
  std::vector<T> px;

  static RgbImage uniform(int64_t h, int64_t w, T r, T g, T b) {
    RgbImage img{h, w, std::vector<T>(static_cast<size_t>(h * w * 3))};
    for (int64_t i = 0; i < h * w; ++i) {
      img.px[i * 3 + 0] = r;
      img.px[i * 3 + 1] = g;
      img.px[i * 3 + 2] = b;
    }
    return img;
  }

  T& at(int64_t y, int64_t x, int64_t c) { return px[(y * w + x) * 3 + c]; }
  const T& at(int64_t y, int64_t x, int64_t c) const { return px[(y * w + x) * 3 + c]; }
  int64_t pixels() const { return h * w; }
};

// Interleaved H x W x 3 as (L, a, b); L in [0,100], a/b in [-128,127].
template <typename T>
struct LabImage {
  int64_t h = 0, w = 0;
  std::vector<T> px;

  T& at(int64_t y, int64_t x, int64_t c) { return px[(y * w + x) * 3 + c]; }
  const T& at(int64_t y, int64_t x, int64_t c) const { return px[(y * w + x) * 3 + c]; }
  int64_t pixels() const { return h * w; }
};

inline constexpr double kWhiteX = 0.95047;
inline constexpr double kWhiteY = 1.0;
inline constexpr double kWhiteZ = 1.08883;

// sRGB primaries (linear RGB -> XYZ) and inverse.
inline constexpr double kRgbToXyz[9] = {0.4124564, 0.3575761, 0.1804375,
                                        0.2126729, 0.7151522, 0.0721750,
                                        0.0193339, 0.1191920, 0.9503041};
inline constexpr double kXyzToRgb[9] = {3.2404542,  -1.5371385, -0.4985314,
                                        -0.9692660, 1.8760108,  0.0415560,
                                        0.0556434,  -0.2040259, 1.0572252};

inline constexpr double kLabDelta = 6.0 / 29.0;
inline constexpr double kLabDelta3 = kLabDelta * kLabDelta * kLabDelta;
// Linear-branch threshold of the sRGB transfer function.
inline constexpr double kSrgbCut = 0.0031308;
inline constexpr double kSrgbCutEnc = 0.04045;

inline double srgb_to_linear(double c) {
  return c <= kSrgbCutEnc ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double c) {
  return c <= kSrgbCut ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t) {
  return t > kLabDelta3 ? std::cbrt(t) : t / (3 * kLabDelta * kLabDelta) + 4.0 / 29.0;
}

inline double lab_f_inv(double t) {
  return t > kLabDelta ? t * t * t : 3 * kLabDelta * kLabDelta * (t - 4.0 / 29.0);
}

inline void rgb_pixel_to_lab(double r, double g, double b, double* lab) {
  double rl = srgb_to_linear(r);
  double gl = srgb_to_linear(g);
  double bl = srgb_to_linear(b);
  double x = kRgbToXyz[0] * rl + kRgbToXyz[1] * gl + kRgbToXyz[2] * bl;
  double y = kRgbToXyz[3] * rl + kRgbToXyz[4] * gl + kRgbToXyz[5] * bl;
  double z = kRgbToXyz[6] * rl + kRgbToXyz[7] * gl + kRgbToXyz[8] * bl;
  double fx = lab_f(x / kWhiteX);
  double fy = lab_f(y / kWhiteY);
  double fz = lab_f(z / kWhiteZ);
  lab[0] = 116.0 * fy - 16.0;
  lab[1] = 500.0 * (fx - fy);
  lab[2] = 200.0 * (fy - fz);
}

// Out-of-gamut results clamp into [0,1]: generated chroma routinely leaves
// the sRGB gamut.
inline void lab_pixel_to_rgb(double l, double a, double b, double* rgb) {
  double fy = (l + 16.0) / 116.0;
  double fx = fy + a / 500.0;
  double fz = fy - b / 200.0;
  double x = kWhiteX * lab_f_inv(fx);
  double y = kWhiteY * lab_f_inv(fy);
  double z = kWhiteZ * lab_f_inv(fz);
  for (int c = 0; c < 3; ++c) {
    double lin = kXyzToRgb[c * 3] * x + kXyzToRgb[c * 3 + 1] * y + kXyzToRgb[c * 3 + 2] * z;
    double v = lin <= kSrgbCut ? 12.92 * lin : linear_to_srgb(lin);
    rgb[c] = std::min(1.0, std::max(0.0, v));
  }
}

template <typename T>
LabImage<T> rgb_to_lab(const RgbImage<T>& img) {
  check_arg(img.h >= 1 && img.w >= 1, "rgb_to_lab: empty image");
  LabImage<T> out{img.h, img.w, std::vector<T>(img.px.size())};
  double lab[3];
  for (int64_t i = 0; i < img.pixels(); ++i) {
    double r = img.px[i * 3 + 0], g = img.px[i * 3 + 1], b = img.px[i * 3 + 2];
    check_arg(std::isfinite(r) && std::isfinite(g) && std::isfinite(b),
              "rgb_to_lab: non-finite pixel at index ", i);
    rgb_pixel_to_lab(r, g, b, lab);
    out.px[i * 3 + 0] = static_cast<T>(lab[0]);
    out.px[i * 3 + 1] = static_cast<T>(lab[1]);
    out.px[i * 3 + 2] = static_cast<T>(lab[2]);
  }
  return out;
}

template <typename T>
RgbImage<T> lab_to_rgb(const LabImage<T>& img) {
  check_arg(img.h >= 1 && img.w >= 1, "lab_to_rgb: empty image");
  RgbImage<T> out{img.h, img.w, std::vector<T>(img.px.size())};
  double rgb[3];
  for (int64_t i = 0; i < img.pixels(); ++i) {
    lab_pixel_to_rgb(img.px[i * 3], img.px[i * 3 + 1], img.px[i * 3 + 2], rgb);
    out.px[i * 3 + 0] = static_cast<T>(rgb[0]);
    out.px[i * 3 + 1] = static_cast<T>(rgb[1]);
    out.px[i * 3 + 2] = static_cast<T>(rgb[2]);
  }
  return out;
}

// Projects a Lab image onto planar (1,H,W) luminance and (2,H,W) chroma
// tensors; merge_channels is the exact inverse.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_luminance(const LabImage<T>& img) {
  Tensor<T> l({1, img.h, img.w});
  Tensor<T> ab({2, img.h, img.w});
  int64_t n = img.pixels();
  for (int64_t i = 0; i < n; ++i) {
    l[i] = img.px[i * 3];
    ab[i] = img.px[i * 3 + 1];
    ab[n + i] = img.px[i * 3 + 2];
  }
  return {std::move(l), std::move(ab)};
}

template <typename T>
LabImage<T> merge_channels(const Tensor<T>& l, const Tensor<T>& ab) {
  check_arg(l.ndim() == 3 && l.dim(0) == 1, "merge_channels: L must be (1,H,W), got ",
            shape_str(l.shape()));
  check_arg(ab.ndim() == 3 && ab.dim(0) == 2, "merge_channels: AB must be (2,H,W), got ",
            shape_str(ab.shape()));
  check_arg(l.dim(1) == ab.dim(1) && l.dim(2) == ab.dim(2),
            "merge_channels: spatial dims mismatch ", shape_str(l.shape()), " vs ",
            shape_str(ab.shape()));
  LabImage<T> out{l.dim(1), l.dim(2), std::vector<T>(static_cast<size_t>(l.dim(1) * l.dim(2) * 3))};
  int64_t n = out.pixels();
  for (int64_t i = 0; i < n; ++i) {
    out.px[i * 3] = l[i];
    out.px[i * 3 + 1] = ab[i];
    out.px[i * 3 + 2] = ab[n + i];
  }
  return out;
}

// Interleaved [0,1] RGB -> planar (3,H,W) tensor and back.
template <typename T>
Tensor<T> rgb_to_planar(const RgbImage<T>& img) {
  Tensor<T> t({3, img.h, img.w});
  int64_t n = img.pixels();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < 3; ++c) t[c * n + i] = img.px[i * 3 + c];
  return t;
}

template <typename T>
RgbImage<T> planar_to_rgb(const Tensor<T>& t) {
  check_arg(t.ndim() == 3 && t.dim(0) == 3, "planar_to_rgb: want (3,H,W), got ",
            shape_str(t.shape()));
  RgbImage<T> img{t.dim(1), t.dim(2), std::vector<T>(static_cast<size_t>(t.numel()))};
  int64_t n = img.pixels();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < 3; ++c) img.px[i * 3 + c] = t[c * n + i];
  return img;
}

template <typename T>
Tensor<T> lab_to_planar(const LabImage<T>& img) {
  Tensor<T> t({3, img.h, img.w});
  int64_t n = img.pixels();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < 3; ++c) t[c * n + i] = img.px[i * 3 + c];
  return t;
}

// Grayscale (replicated) RGB image from a luminance plane, for exports.
template <typename T>
RgbImage<T> luminance_to_gray_rgb(const Tensor<T>& l) {
  check_arg(l.ndim() == 3 && l.dim(0) == 1, "luminance_to_gray_rgb: want (1,H,W)");
  LabImage<T> lab{l.dim(1), l.dim(2),
                  std::vector<T>(static_cast<size_t>(l.dim(1) * l.dim(2) * 3), T(0))};
  for (int64_t i = 0; i < lab.pixels(); ++i) lab.px[i * 3] = l[i];
  return lab_to_rgb(lab);
}

}  // namespace duocolor::color
