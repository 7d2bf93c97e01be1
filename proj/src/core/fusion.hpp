// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fusion of the color embedding against the per-pixel image embedding: a
// plain dot-product contraction producing K response maps, reduced to the
// two chroma channels by a 1x1 convolution.

#pragma once

#include "core/nn.hpp"

namespace duocolor::nn {

// F_hat[b,k,h,w] = sum_c E_c[b,k,c] * E_i[b,c,h,w]
template <typename T>
Var<T> fuse(const Var<T>& e_c, const Var<T>& e_i) {
  const Shape& sc = e_c->value.shape();
  const Shape& si = e_i->value.shape();
  check_arg(sc.size() == 3, "fuse: E_c must be [B,K,C], got ", shape_str(sc));
  check_arg(si.size() == 4, "fuse: E_i must be [B,C,H,W], got ", shape_str(si));
  check_arg(sc[2] == si[1], "fuse: embedding dim mismatch ", sc[2], " vs ", si[1]);
  auto flat = ad::reshape(e_i, {si[0], si[1], si[2] * si[3]});
  auto prod = ad::bmm(e_c, flat);  // [B,K,HW]
  return ad::reshape(prod, {sc[0], sc[1], si[2], si[3]});
}

// Per-query activation maps in (0,1): sigmoid of the raw dot product.
template <typename T>
Var<T> query_attention_maps(const Var<T>& queries, const Var<T>& e_i) {
  return ad::sigmoid(fuse(queries, e_i));
}

// The 1x1 head on F_hat; optionally concatenates the (normalized) grayscale
// input first. Zero-initialized so an untrained model starts at neutral
// chroma.
template <typename T>
struct FusionHead {
  Conv2d<T> conv;
  bool concat_input = true;

  FusionHead() = default;
  FusionHead(ParamStore<T>& ps, const std::string& name, int64_t in_channels,
             bool concat_input_, Rng& rng)
      : concat_input(concat_input_) {
    conv = Conv2d<T>(ps, name + ".conv", in_channels + (concat_input_ ? 1 : 0), 2, 1, 1, 0,
                     rng, 0.0, /*zero_init=*/true);
  }

  // f_hat: [B,K,H,W]; x_norm: [B,1,H,W]. Returns normalized AB [B,2,H,W].
  Var<T> forward(const Var<T>& f_hat, const Var<T>& x_norm) const {
    auto t = concat_input ? ad::concat_channels(f_hat, x_norm) : f_hat;
    return conv.forward(t);
  }
};

}  // namespace duocolor::nn
