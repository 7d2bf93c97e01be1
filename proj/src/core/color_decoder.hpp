// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Query-based color decoder. K learnable, zero-initialized color queries are
// refined by a stack of color decoder blocks; each block cross-attends to
// one feature scale, self-attends, and runs a feed-forward, all with
// residuals. Groups of blocks consume the scale schedule in order and the
// group repeats round-robin M times.

#pragma once

#include <map>

#include "core/pixel_decoder.hpp"

namespace duocolor::nn {

// Cross-attention following the residual form: out = Attn(f_Q(z); f_K(F),
// f_V(F)) + z. No pre-norm and no output projection; logit scaling and the
// head count are configurable (single-head, unscaled reproduces the
// plainest reading).
template <typename T>
struct CrossAttention {
  Linear<T> q, k, v;
  int64_t heads = 1;
  bool scaled = true;

  CrossAttention() = default;
  CrossAttention(ParamStore<T>& ps, const std::string& name, int64_t dim, int64_t heads_,
                 bool scaled_, Rng& rng, double init_std)
      : heads(heads_), scaled(scaled_) {
    check_arg(dim % heads_ == 0, "cross-attention dim not divisible by heads");
    q = Linear<T>(ps, name + ".q", dim, dim, rng, init_std);
    k = Linear<T>(ps, name + ".k", dim, dim, rng, init_std);
    v = Linear<T>(ps, name + ".v", dim, dim, rng, init_std);
  }

  // z: [B,K,C]; feat: [B,N,C] (projected, flattened positions)
  Var<T> forward(const Var<T>& z, const Var<T>& feat) const {
    auto attn = attention(q.forward(z), k.forward(feat), v.forward(feat), heads, scaled);
    return ad::add(attn, z);
  }
};

// Flattens [B,C,H,W] into position-major [B,HW,C] (row-major positions).
template <typename T>
Var<T> flatten_positions(const Var<T>& f) {
  const Shape& s = f->value.shape();
  check_arg(s.size() == 4, "flatten_positions: want 4-D");
  auto t = ad::reshape(f, {s[0], s[1], s[2] * s[3]});
  return ad::transpose_12(t);
}

template <typename T>
struct ColorDecoderBlock {
  CdbOrder order = CdbOrder::kCrossSelf;
  CrossAttention<T> cross[2];
  SelfAttention<T> self[2];
  LayerNormLast<T> self_norm[2];
  LayerNormLast<T> mlp_norm;
  Mlp<T> mlp;
  LayerNormLast<T> out_norm;

  ColorDecoderBlock() = default;
  ColorDecoderBlock(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg,
                    Rng& rng)
      : order(cfg.cdb_order) {
    int64_t cross_heads = cfg.cross_attention_single_head ? 1 : cfg.heads;
    bool slot_is_cross[2];
    slot_kinds(order, slot_is_cross);
    for (int i = 0; i < 2; ++i) {
      std::string slot = name + ".slot" + std::to_string(i);
      if (slot_is_cross[i])
        cross[i] = CrossAttention<T>(ps, slot + ".cross", cfg.embed_dim, cross_heads,
                                     cfg.cross_attention_scaled, rng, cfg.init_std);
      else {
        self_norm[i] = LayerNormLast<T>(ps, slot + ".norm", cfg.embed_dim);
        self[i] = SelfAttention<T>(ps, slot + ".self", cfg.embed_dim, cfg.heads, rng,
                                   cfg.init_std);
      }
    }
    mlp_norm = LayerNormLast<T>(ps, name + ".mlp_norm", cfg.embed_dim);
    mlp = Mlp<T>(ps, name + ".mlp", cfg.embed_dim, cfg.ffn_dim, rng, cfg.init_std);
    out_norm = LayerNormLast<T>(ps, name + ".out_norm", cfg.embed_dim);
  }

  static void slot_kinds(CdbOrder order, bool out[2]) {
    switch (order) {
      case CdbOrder::kCrossSelf: out[0] = true, out[1] = false; break;
      case CdbOrder::kSelfCross: out[0] = false, out[1] = true; break;
      case CdbOrder::kSelfSelf: out[0] = false, out[1] = false; break;
      case CdbOrder::kCrossCross: out[0] = true, out[1] = true; break;
    }
  }

  Var<T> forward(const Var<T>& z_in, const Var<T>& feat) const {
    bool slot_is_cross[2];
    slot_kinds(order, slot_is_cross);
    auto z = z_in;
    for (int i = 0; i < 2; ++i) {
      if (slot_is_cross[i])
        z = cross[i].forward(z, feat);
      else
        z = ad::add(self[i].forward(self_norm[i].forward(z)), z);
    }
    z = ad::add(mlp.forward(mlp_norm.forward(z)), z);
    return out_norm.forward(z);
  }
};

template <typename T>
class ColorDecoder {
 public:
  ColorDecoder() = default;
  ColorDecoder(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg,
               Rng& rng)
      : cfg_(cfg) {
    // queries start at zero: the first cross-attention sees only biases
    z0_ = ps.create(name + ".z0", Tensor<T>({cfg.num_queries, cfg.embed_dim}));
    for (int64_t rate : cfg.scale_schedule)
      if (!proj_.count(rate)) {
        int64_t width = rate == 16 ? cfg.decoder_widths[0]
                        : rate == 8 ? cfg.decoder_widths[1]
                                    : cfg.decoder_widths[2];
        proj_.emplace(rate, Conv2d<T>(ps, name + ".proj" + std::to_string(rate), width,
                                      cfg.embed_dim, 1, 1, 0, rng, cfg.init_std));
      }
    int64_t total = cfg.blocks_total();
    for (int64_t i = 0; i < total; ++i)
      blocks_.push_back(
          ColorDecoderBlock<T>(ps, name + ".block" + std::to_string(i), cfg, rng));
  }

  int64_t block_count() const { return static_cast<int64_t>(blocks_.size()); }
  const Var<T>& queries() const { return z0_; }

  // Downsample rate consumed by block i under the round-robin schedule.
  int64_t rate_for_block(int64_t i) const {
    return cfg_.scale_schedule[static_cast<size_t>(
        i % static_cast<int64_t>(cfg_.scale_schedule.size()))];
  }

  // Runs the schedule from the stored zero-initialized queries.
  Var<T> forward(const PixelDecoderOut<T>& feats, int64_t batch) const {
    return forward_from(ad::tile_batch(z0_, batch), feats);
  }

  // Same, from caller-provided queries [B,K,C].
  Var<T> forward_from(const Var<T>& z0, const PixelDecoderOut<T>& feats) const {
    std::map<int64_t, Var<T>> projected;
    for (const auto& [rate, conv] : proj_) {
      const Var<T>& f = rate == 16 ? feats.f_16 : rate == 8 ? feats.f_8 : feats.f_4;
      check_arg(static_cast<bool>(f), "color decoder: missing feature at rate 1/", rate);
      projected.emplace(rate, flatten_positions(conv.forward(f)));
    }
    auto z = z0;
    int64_t per_group = static_cast<int64_t>(cfg_.scale_schedule.size());
    for (int64_t i = 0; i < block_count(); ++i) {
      int64_t rate = cfg_.scale_schedule[static_cast<size_t>(i % per_group)];
      z = blocks_[static_cast<size_t>(i)].forward(z, projected.at(rate));
    }
    return z;
  }

 private:
  ModelConfig cfg_;
  Var<T> z0_;
  std::map<int64_t, Conv2d<T>> proj_;
  std::vector<ColorDecoderBlock<T>> blocks_;
};

}  // namespace duocolor::nn
