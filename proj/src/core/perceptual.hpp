// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pluggable feature extractors for the perceptual loss. The training
// default is a frozen random-conv pyramid derived from a pinned seed, so
// desk runs need no pretrained weights; any multi-layer feature provider
// satisfies the interface.

#pragma once

#include "core/ops_conv.hpp"

namespace duocolor::nn {

template <typename T>
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  // rgb: [B,3,H,W] on the [0,1] scale; returns one tensor per layer.
  virtual std::vector<ad::Var<T>> extract(const ad::Var<T>& rgb) const = 0;
};

// Returns the input itself; with this extractor the perceptual loss
// degenerates to the pixel L1.
template <typename T>
class IdentityExtractor : public FeatureExtractor<T> {
 public:
  std::vector<ad::Var<T>> extract(const ad::Var<T>& rgb) const override { return {rgb}; }
};

// Four stride-2 3x3 conv + ReLU stages with frozen he-scaled random
// weights. Deterministic in the seed; the weights are constants, not
// trainable parameters, and are reconstructed rather than checkpointed.
template <typename T>
class RandomConvExtractor : public FeatureExtractor<T> {
 public:
  explicit RandomConvExtractor(uint64_t seed) {
    Rng rng(seed);
    const int64_t widths[5] = {3, 8, 16, 32, 64};
    for (int i = 0; i < 4; ++i) {
      Tensor<T> w({widths[i + 1], widths[i], 3, 3});
      double std = std::sqrt(2.0 / double(widths[i] * 9));
      w.fill_normal(rng, 0.0, std);
      weights_.push_back(ad::constant(std::move(w)));
      Tensor<T> b({widths[i + 1]});
      biases_.push_back(ad::constant(std::move(b)));
    }
  }

  std::vector<ad::Var<T>> extract(const ad::Var<T>& rgb) const override {
    std::vector<ad::Var<T>> feats;
    auto t = rgb;
    for (size_t i = 0; i < weights_.size(); ++i) {
      t = ad::relu(ad::conv2d(t, weights_[i], biases_[i], /*stride=*/2, /*pad=*/1));
      feats.push_back(t);
    }
    return feats;
  }

 private:
  std::vector<ad::Var<T>> weights_;
  std::vector<ad::Var<T>> biases_;
};

}  // namespace duocolor::nn
