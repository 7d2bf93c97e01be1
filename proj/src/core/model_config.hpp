// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace duocolor {

// Block ordering inside a color decoder block (ablation surface).
enum class CdbOrder { kCrossSelf, kSelfCross, kSelfSelf, kCrossCross };

inline CdbOrder cdb_order_from_string(const std::string& s) {
  if (s == "cross_self") return CdbOrder::kCrossSelf;
  if (s == "self_cross") return CdbOrder::kSelfCross;
  if (s == "self_self") return CdbOrder::kSelfSelf;
  if (s == "cross_cross") return CdbOrder::kCrossCross;
  throw UsageError("unknown cdb order: " + s +
                   " (want cross_self|self_cross|self_self|cross_cross)");
}

inline std::string cdb_order_to_string(CdbOrder o) {
  switch (o) {
    case CdbOrder::kCrossSelf: return "cross_self";
    case CdbOrder::kSelfCross: return "self_cross";
    case CdbOrder::kSelfSelf: return "self_self";
    case CdbOrder::kCrossCross: return "cross_cross";
  }
  return "cross_self";
}

struct ModelConfig {
  // encoder
  std::string backbone = "convnext";  // convnext | simple
  std::array<int64_t, 4> encoder_widths{8, 16, 32, 64};
  std::array<int64_t, 4> encoder_depths{1, 1, 3, 1};

  // pixel decoder: output widths of the four upsampling stages; the last is
  // the image embedding width and must equal embed_dim
  std::array<int64_t, 4> decoder_widths{32, 32, 32, 32};
  bool pixel_decoder_norm = true;  // layer norm before each shortcut conv

  // color decoder
  int64_t num_queries = 16;   // K
  int64_t embed_dim = 32;     // C
  int64_t decoder_groups = 1; // M group repeats
  int64_t heads = 4;
  int64_t ffn_dim = 64;
  std::vector<int64_t> scale_schedule{16, 8, 4};  // downsample rates per group
  bool cross_attention_scaled = true;   // 1/sqrt(d) on cross-attention logits
  bool cross_attention_single_head = false;
  CdbOrder cdb_order = CdbOrder::kCrossSelf;
  bool use_color_decoder = true;

  // fusion
  bool fuse_concat_input = true;  // concat normalized L before the 1x1 head

  double init_std = 0.02;

  int64_t blocks_total() const {
    return decoder_groups * static_cast<int64_t>(scale_schedule.size());
  }

  void validate() const {
    check_arg(backbone == "convnext" || backbone == "simple",
              "backbone must be convnext|simple, got ", backbone);
    for (auto w : encoder_widths) check_arg(w >= 1, "encoder widths must be positive");
    for (auto d : encoder_depths) check_arg(d >= 0, "encoder depths must be >= 0");
    for (auto w : decoder_widths) check_arg(w >= 1, "decoder widths must be positive");
    check_arg(encoder_widths[3] % 4 == 0, "encoder stage-4 width must be divisible by 4 ",
              "(pixel shuffle x2 consumes it), got ", encoder_widths[3]);
    check_arg(decoder_widths[0] % 4 == 0 && decoder_widths[1] % 4 == 0,
              "decoder stage 1/2 widths must be divisible by 4 (shuffled by the next stage)");
    check_arg(embed_dim == decoder_widths[3], "embed_dim (", embed_dim,
              ") must equal the final pixel-decoder width (", decoder_widths[3], ")");
    check_arg(num_queries >= 1, "num_queries must be >= 1");
    check_arg(decoder_groups >= 1, "decoder_groups must be >= 1");
    check_arg(embed_dim % heads == 0, "embed_dim must be divisible by heads");
    check_arg(ffn_dim >= 1, "ffn_dim must be >= 1");
    check_arg(!scale_schedule.empty(), "scale_schedule must not be empty");
    for (auto s : scale_schedule)
      check_arg(s == 4 || s == 8 || s == 16, "scale_schedule entries must be 4, 8 or 16");
  }

  // Full-scale plan: ConvNeXt-T stages with the published decoder widths.
  static ModelConfig reference() {
    ModelConfig cfg;
    cfg.encoder_widths = {96, 192, 384, 768};
    cfg.encoder_depths = {3, 3, 9, 3};
    cfg.decoder_widths = {512, 512, 256, 256};
    cfg.num_queries = 100;
    cfg.embed_dim = 256;
    cfg.decoder_groups = 3;
    cfg.heads = 8;
    cfg.ffn_dim = 2048;
    return cfg;
  }
};

}  // namespace duocolor
