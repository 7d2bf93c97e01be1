// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "core/colorspace.hpp"

namespace duocolor::io {

using duocolor::color::RgbImage;

// Decodes PNG or JPEG (sniffed from file magic) into [0,1] float RGB.
// Gray/palette/alpha inputs are converted to 8-bit RGB first.
RgbImage<float> load_rgb(const std::string& path);

// 8-bit RGB PNG; values are clamped to [0,1] then rounded to 0..255.
void save_png_rgb(const std::string& path, const RgbImage<float>& img);

// 8-bit grayscale PNG from (1,H,W) or (H,W) values in [0,1].
void save_png_gray(const std::string& path, const Tensor<float>& plane);

void save_jpeg_rgb(const std::string& path, const RgbImage<float>& img, int quality = 95);

// NumPy .npy (version 1.0, little-endian float32, C order).
void write_npy(const std::string& path, const Shape& shape, const float* data);

bool has_image_extension(const std::string& path);

}  // namespace duocolor::io
