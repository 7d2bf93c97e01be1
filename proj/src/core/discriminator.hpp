// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Patch discriminator: a stack of strided 4x4 convolutions emitting a grid
// of real/fake logits over image patches (70x70 receptive field at the
// full-scale width plan, proportionally smaller at desk scale).

#pragma once

#include "core/nn.hpp"

namespace duocolor::nn {

struct DiscriminatorConfig {
  int64_t base_channels = 16;  // 64 in the classic full-scale plan
  int64_t layers = 3;
  double init_std = 0.02;
};

template <typename T>
class PatchDiscriminator {
 public:
  PatchDiscriminator() = default;
  PatchDiscriminator(ParamStore<T>& ps, const std::string& name,
                     const DiscriminatorConfig& cfg, Rng& rng) {
    check_arg(cfg.base_channels >= 1 && cfg.layers >= 1, "bad discriminator config");
    int64_t prev = 3;
    int64_t ch = cfg.base_channels;
    for (int64_t i = 0; i < cfg.layers; ++i) {
      convs_.push_back(Conv2d<T>(ps, name + ".c" + std::to_string(i), prev, ch, 4, 2, 1,
                                 rng, cfg.init_std));
      norms_.push_back(i == 0 ? LayerNormChan<T>()
                              : LayerNormChan<T>(ps, name + ".n" + std::to_string(i), ch));
      prev = ch;
      ch *= 2;
    }
    convs_.push_back(Conv2d<T>(ps, name + ".c" + std::to_string(cfg.layers), prev, ch, 4,
                               1, 1, rng, cfg.init_std));
    norms_.push_back(LayerNormChan<T>(ps, name + ".n" + std::to_string(cfg.layers), ch));
    out_ = Conv2d<T>(ps, name + ".out", ch, 1, 4, 1, 1, rng, cfg.init_std);
  }

  // rgb: [B,3,H,W] on the [0,1] scale; returns patch logits [B,1,ph,pw].
  Var<T> forward(const Var<T>& rgb) const {
    auto t = ad::add_scalar(ad::scale(rgb, T(2)), T(-1));
    for (size_t i = 0; i < convs_.size(); ++i) {
      t = convs_[i].forward(t);
      if (norms_[i].g) t = norms_[i].forward(t);
      t = ad::leaky_relu(t, T(0.2));
    }
    return out_.forward(t);
  }

 private:
  std::vector<Conv2d<T>> convs_;
  std::vector<LayerNormChan<T>> norms_;
  Conv2d<T> out_;
};

}  // namespace duocolor::nn
