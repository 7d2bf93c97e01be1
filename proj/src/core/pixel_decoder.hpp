// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pixel decoder: four upsampling stages restoring input resolution. Stages
// 1-3 are pixel-shuffle x2 -> concat encoder shortcut -> 3x3 conv (with an
// optional layer norm before the conv); stage 4 expands channels with a
// 1x1 conv and pixel-shuffles x4 to the full-resolution image embedding.

#pragma once

#include "core/encoder.hpp"

namespace duocolor::nn {

template <typename T>
struct PixelDecoderOut {
  Var<T> e_i;              // [B, C, H, W] image embedding at input resolution
  Var<T> f_16, f_8, f_4;   // intermediate features at 1/16, 1/8, 1/4
};

template <typename T>
class PixelDecoder {
 public:
  PixelDecoder() = default;
  PixelDecoder(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg,
               Rng& rng)
      : use_norm_(cfg.pixel_decoder_norm) {
    const auto& ew = cfg.encoder_widths;
    const auto& dw = cfg.decoder_widths;
    const int64_t in_ch[3] = {ew[3] / 4 + ew[2], dw[0] / 4 + ew[1], dw[1] / 4 + ew[0]};
    for (int s = 0; s < 3; ++s) {
      if (use_norm_)
        norms_[s] = LayerNormChan<T>(ps, name + ".s" + std::to_string(s) + ".norm",
                                     in_ch[s]);
      convs_[s] = Conv2d<T>(ps, name + ".s" + std::to_string(s) + ".conv", in_ch[s],
                            dw[static_cast<size_t>(s)], 3, 1, 1, rng, cfg.init_std);
    }
    // channel expansion ahead of the x4 shuffle keeps E_i at embed_dim
    expand_ = Conv2d<T>(ps, name + ".expand", dw[2], dw[3] * 16, 1, 1, 0, rng,
                        cfg.init_std);
  }

  PixelDecoderOut<T> forward(const FeaturePyramid<T>& pyr) const {
    PixelDecoderOut<T> out;
    const Var<T> shortcuts[3] = {pyr.f16, pyr.f8, pyr.f4};
    auto t = pyr.f32;
    for (int s = 0; s < 3; ++s) {
      t = ad::pixel_shuffle(t, 2);
      t = ad::concat_channels(t, shortcuts[s]);
      if (use_norm_) t = norms_[s].forward(t);
      t = convs_[s].forward(t);
      (s == 0 ? out.f_16 : s == 1 ? out.f_8 : out.f_4) = t;
    }
    out.e_i = ad::pixel_shuffle(expand_.forward(t), 4);
    return out;
  }

 private:
  bool use_norm_ = true;
  LayerNormChan<T> norms_[3];
  Conv2d<T> convs_[3];
  Conv2d<T> expand_;
};

}  // namespace duocolor::nn
