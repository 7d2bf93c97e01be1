// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hierarchical backbone producing the four-level feature pyramid. The
// default mirrors the ConvNeXt stage plan (depthwise 7x7 + two pointwise
// convolutions, residual) at configurable widths; a plain strided-conv
// backbone demonstrates that anything honoring the pyramid contract plugs
// in. Single-channel stem: the grayscale input is not replicated.

#pragma once

#include <memory>

#include "core/model_config.hpp"
#include "core/nn.hpp"

namespace duocolor::nn {

template <typename T>
struct FeaturePyramid {
  Var<T> f4, f8, f16, f32;  // strides 4/8/16/32 relative to the input
};

template <typename T>
class Backbone {
 public:
  virtual ~Backbone() = default;
  virtual FeaturePyramid<T> forward(const Var<T>& x) const = 0;
};

template <typename T>
struct ConvNeXtBlock {
  DepthwiseConv2d<T> dw;
  LayerNormChan<T> norm;
  Conv2d<T> pw1, pw2;

  ConvNeXtBlock() = default;
  ConvNeXtBlock(ParamStore<T>& ps, const std::string& name, int64_t dim, Rng& rng,
                double init_std) {
    dw = DepthwiseConv2d<T>(ps, name + ".dw", dim, 7, 3, rng, init_std);
    norm = LayerNormChan<T>(ps, name + ".norm", dim);
    pw1 = Conv2d<T>(ps, name + ".pw1", dim, dim * 4, 1, 1, 0, rng, init_std);
    pw2 = Conv2d<T>(ps, name + ".pw2", dim * 4, dim, 1, 1, 0, rng, init_std);
  }

  Var<T> forward(const Var<T>& x) const {
    auto t = dw.forward(x);
    t = norm.forward(t);
    t = pw1.forward(t);
    t = ad::gelu(t);
    t = pw2.forward(t);
    return ad::add(x, t);
  }
};

template <typename T>
class ConvNeXtBackbone : public Backbone<T> {
 public:
  ConvNeXtBackbone(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg,
                   Rng& rng) {
    const auto& w = cfg.encoder_widths;
    stem_ = Conv2d<T>(ps, name + ".stem", 1, w[0], 4, 4, 0, rng, cfg.init_std);
    stem_norm_ = LayerNormChan<T>(ps, name + ".stem_norm", w[0]);
    for (int s = 0; s < 4; ++s) {
      for (int64_t d = 0; d < cfg.encoder_depths[static_cast<size_t>(s)]; ++d)
        stages_[s].push_back(ConvNeXtBlock<T>(
            ps, name + ".s" + std::to_string(s) + ".b" + std::to_string(d),
            w[static_cast<size_t>(s)], rng, cfg.init_std));
      if (s < 3) {
        down_norm_[s] = LayerNormChan<T>(ps, name + ".down" + std::to_string(s) + "_norm",
                                         w[static_cast<size_t>(s)]);
        down_[s] = Conv2d<T>(ps, name + ".down" + std::to_string(s),
                             w[static_cast<size_t>(s)], w[static_cast<size_t>(s + 1)], 2, 2,
                             0, rng, cfg.init_std);
      }
    }
  }

  FeaturePyramid<T> forward(const Var<T>& x) const override {
    FeaturePyramid<T> pyr;
    auto t = stem_norm_.forward(stem_.forward(x));
    for (int s = 0; s < 4; ++s) {
      for (const auto& block : stages_[s]) t = block.forward(t);
      (s == 0 ? pyr.f4 : s == 1 ? pyr.f8 : s == 2 ? pyr.f16 : pyr.f32) = t;
      if (s < 3) t = down_[s].forward(down_norm_[s].forward(t));
    }
    return pyr;
  }

 private:
  Conv2d<T> stem_;
  LayerNormChan<T> stem_norm_;
  std::vector<ConvNeXtBlock<T>> stages_[4];
  LayerNormChan<T> down_norm_[3];
  Conv2d<T> down_[3];
};

// Minimal strided-conv backbone; exists to prove the pyramid contract is
// the only coupling point.
template <typename T>
class SimpleBackbone : public Backbone<T> {
 public:
  SimpleBackbone(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg,
                 Rng& rng) {
    const auto& w = cfg.encoder_widths;
    stem_ = Conv2d<T>(ps, name + ".stem", 1, w[0], 4, 4, 0, rng, cfg.init_std);
    for (int s = 0; s < 3; ++s)
      down_[s] = Conv2d<T>(ps, name + ".down" + std::to_string(s),
                           w[static_cast<size_t>(s)], w[static_cast<size_t>(s + 1)], 3, 2, 1,
                           rng, cfg.init_std);
  }

  FeaturePyramid<T> forward(const Var<T>& x) const override {
    FeaturePyramid<T> pyr;
    auto t = ad::gelu(stem_.forward(x));
    pyr.f4 = t;
    t = ad::gelu(down_[0].forward(t));
    pyr.f8 = t;
    t = ad::gelu(down_[1].forward(t));
    pyr.f16 = t;
    t = ad::gelu(down_[2].forward(t));
    pyr.f32 = t;
    return pyr;
  }

 private:
  Conv2d<T> stem_;
  Conv2d<T> down_[3];
};

template <typename T>
class Encoder {
 public:
  Encoder() = default;
  Encoder(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg, Rng& rng) {
    if (cfg.backbone == "simple")
      impl_ = std::make_unique<SimpleBackbone<T>>(ps, name, cfg, rng);
    else
      impl_ = std::make_unique<ConvNeXtBackbone<T>>(ps, name, cfg, rng);
  }

  // x: [B,1,H,W] with H, W divisible by 32 (checked before any compute).
  FeaturePyramid<T> forward(const Var<T>& x) const {
    const Shape& s = x->value.shape();
    check_arg(s.size() == 4 && s[1] == 1, "encode: want [B,1,H,W], got ", shape_str(s));
    check_arg(s[2] % 32 == 0 && s[3] % 32 == 0,
              "encode: spatial dims must be divisible by 32, got ", s[2], "x", s[3]);
    return impl_->forward(x);
  }

 private:
  std::unique_ptr<Backbone<T>> impl_;
};

}  // namespace duocolor::nn
