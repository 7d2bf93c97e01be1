// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Full generator: encoder -> pixel decoder -> color decoder -> fusion.
// Luminance enters in raw Lab units and is normalized to [0,1] internally
// (L/100); predicted chroma is produced in [-1,1] network units and
// denormalized by x128 on the way out. Checkpoints therefore carry AB
// normalization as a fixed convention.

#pragma once

#include "core/color_decoder.hpp"
#include "core/colorspace.hpp"
#include "core/fusion.hpp"

namespace duocolor::nn {

inline constexpr double kLumaScale = 100.0;
inline constexpr double kChromaScale = 128.0;

template <typename T>
struct GeneratorOut {
  Var<T> ab;       // [B,2,H,W], raw AB units (denormalized, unclamped)
  Var<T> e_i;      // image embedding
  Var<T> e_c;      // color embedding (empty when the color decoder is off)
  Var<T> f_hat;    // fused response maps (empty when the color decoder is off)
  FeaturePyramid<T> pyramid;
  PixelDecoderOut<T> pixel;
};

template <typename T>
class Generator {
 public:
  explicit Generator(const ModelConfig& cfg, uint64_t seed = 1) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    encoder_ = Encoder<T>(params_, "encoder", cfg_, rng);
    pixel_decoder_ = PixelDecoder<T>(params_, "pixel_decoder", cfg_, rng);
    if (cfg_.use_color_decoder) {
      color_decoder_ = std::make_unique<ColorDecoder<T>>(params_, "color_decoder", cfg_, rng);
      head_ = FusionHead<T>(params_, "head", cfg_.num_queries, cfg_.fuse_concat_input, rng);
    } else {
      head_ = FusionHead<T>(params_, "head", cfg_.embed_dim, cfg_.fuse_concat_input, rng);
    }
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  const ColorDecoder<T>* color_decoder() const { return color_decoder_.get(); }

  // x_l: [B,1,H,W] in raw L units [0,100]; H, W divisible by 32.
  GeneratorOut<T> forward(const Var<T>& x_l) const {
    GeneratorOut<T> out;
    auto x_norm = ad::scale(x_l, T(1.0 / kLumaScale));
    out.pyramid = encoder_.forward(x_norm);
    out.pixel = pixel_decoder_.forward(out.pyramid);
    out.e_i = out.pixel.e_i;
    Var<T> ab_norm;
    if (cfg_.use_color_decoder) {
      int64_t batch = x_l->value.dim(0);
      out.e_c = color_decoder_->forward(out.pixel, batch);
      out.f_hat = fuse(out.e_c, out.e_i);
      ab_norm = head_.forward(out.f_hat, x_norm);
    } else {
      ab_norm = head_.forward(out.e_i, x_norm);
    }
    out.ab = ad::scale(ab_norm, T(kChromaScale));
    return out;
  }

  // Full Lab prediction [B,3,H,W]: the input luminance channel passes
  // through untouched.
  Var<T> predict_lab(const Var<T>& x_l) const {
    auto out = forward(x_l);
    return ad::concat_channels(x_l, out.ab);
  }

  // Single-image inference; AB clamps into Lab bounds at assembly.
  color::LabImage<T> colorize(const Tensor<T>& x_l) const {
    check_arg(x_l.ndim() == 3 && x_l.dim(0) == 1, "colorize: want (1,H,W) luminance");
    ad::NoGradGuard no_grad;
    auto in = ad::constant(x_l.reshape({1, 1, x_l.dim(1), x_l.dim(2)}));
    auto out = forward(in);
    Tensor<T> ab = out.ab->value.reshape({2, x_l.dim(1), x_l.dim(2)}).clone();
    for (int64_t i = 0; i < ab.numel(); ++i)
      ab[i] = std::min(T(127), std::max(T(-128), ab[i]));
    return color::merge_channels(x_l, ab);
  }

 private:
  ModelConfig cfg_;
  ParamStore<T> params_;
  Encoder<T> encoder_;
  PixelDecoder<T> pixel_decoder_;
  std::unique_ptr<ColorDecoder<T>> color_decoder_;
  FusionHead<T> head_;
};

}  // namespace duocolor::nn
