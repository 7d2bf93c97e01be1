// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/color_decoder.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace duocolor;
using namespace duocolor::nn;
using duocolor::ad::Var;
using duocolor::testutil::check_gradients;
using duocolor::testutil::max_abs_diff;
using duocolor::testutil::random_tensor;

namespace {

template <typename T>
CrossAttention<T> make_cross(ParamStore<T>& ps, Rng& rng, int64_t dim, int64_t heads,
                             bool scaled) {
  return CrossAttention<T>(ps, "ca", dim, heads, scaled, rng, 0.3);
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.encoder_widths = {4, 4, 8, 8};
  cfg.encoder_depths = {1, 1, 1, 1};
  cfg.decoder_widths = {8, 8, 8, 8};
  cfg.num_queries = 3;
  cfg.embed_dim = 8;
  cfg.decoder_groups = 1;
  cfg.heads = 2;
  cfg.ffn_dim = 16;
  return cfg;
}

// Random pixel-decoder features at the rates the schedule needs.
template <typename T>
PixelDecoderOut<T> random_feats(const ModelConfig& cfg, int64_t batch, int64_t res,
                                Rng& rng) {
  PixelDecoderOut<T> f;
  f.f_16 = ad::constant(random_tensor<T>({batch, cfg.decoder_widths[0], res / 16, res / 16}, rng));
  f.f_8 = ad::constant(random_tensor<T>({batch, cfg.decoder_widths[1], res / 8, res / 8}, rng));
  f.f_4 = ad::constant(random_tensor<T>({batch, cfg.decoder_widths[2], res / 4, res / 4}, rng));
  return f;
}

}  // namespace

TEST_CASE("cross_attend: singleton softmax reduces to f_V(feature) + z") {
  Rng rng(1);
  ParamStore<double> ps;
  auto ca = make_cross(ps, rng, 8, 2, true);
  auto z = ad::constant(random_tensor<double>({2, 5, 8}, rng));
  auto f = ad::constant(random_tensor<double>({2, 1, 8}, rng));  // H=W=1
  auto out = ca.forward(z, f);
  auto v = ca.v.forward(f);
  for (int64_t b = 0; b < 2; ++b)
    for (int64_t k = 0; k < 5; ++k)
      for (int64_t c = 0; c < 8; ++c)
        CHECK(out->value.at(b, k, c) ==
              doctest::Approx(v->value.at(b, 0, c) + z->value.at(b, k, c)).epsilon(1e-12));
}

TEST_CASE("cross_attend: zero queries with zero-bias f_Q give uniform attention") {
  Rng rng(2);
  ParamStore<double> ps;
  auto ca = make_cross(ps, rng, 8, 2, true);
  // Linear biases initialize to zero; zero z means Q = 0 -> uniform weights.
  auto z = ad::constant(Tensor<double>({1, 4, 8}));
  auto f = ad::constant(random_tensor<double>({1, 6, 8}, rng));
  auto out = ca.forward(z, f);
  auto v = ca.v.forward(f);
  for (int64_t k = 0; k < 4; ++k)
    for (int64_t c = 0; c < 8; ++c) {
      double mean_v = 0;
      for (int64_t j = 0; j < 6; ++j) mean_v += v->value.at(0, j, c);
      mean_v /= 6;
      CHECK(out->value.at(0, k, c) == doctest::Approx(mean_v).epsilon(1e-9));
    }
  // identical for every query
  for (int64_t k = 1; k < 4; ++k)
    for (int64_t c = 0; c < 8; ++c)
      CHECK(out->value.at(0, k, c) == out->value.at(0, 0, c));
}

TEST_CASE("cross_attend matches the brute-force oracle") {
  // K=2, C=4 single-head plus larger multi-head cases, both precisions
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    int64_t heads = (trial % 2) ? 2 : 1;
    bool scaled = (trial % 3) != 0;
    ParamStore<double> ps;
    auto ca = make_cross(ps, rng, 4, heads, scaled);
    auto z = ad::constant(random_tensor<double>({2, 2, 4}, rng));
    auto f = ad::constant(random_tensor<double>({2, 4, 4}, rng));
    auto out = ca.forward(z, f);
    auto ref = oracle::cross_attend_oracle(
        z->value, f->value, ca.q.w->value, ca.q.b->value, ca.k.w->value, ca.k.b->value,
        ca.v.w->value, ca.v.b->value, heads, scaled);
    CHECK(max_abs_diff(out->value, ref) < 1e-10);
  }

  Rng rngf(4);
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore<float> ps;
    auto ca = CrossAttention<float>(ps, "ca", 8, 2, true, rngf, 0.3);
    auto z = ad::constant(random_tensor<float>({1, 3, 8}, rngf));
    auto f = ad::constant(random_tensor<float>({1, 9, 8}, rngf));
    auto out = ca.forward(z, f);
    auto ref = oracle::cross_attend_oracle(
        z->value, f->value, ca.q.w->value, ca.q.b->value, ca.k.w->value, ca.k.b->value,
        ca.v.w->value, ca.v.b->value, int64_t{2}, true);
    CHECK(max_abs_diff(out->value, ref) < 1e-5);
  }
}

TEST_CASE("cross_attend is invariant to permuting feature positions") {
  Rng rng(5);
  ParamStore<double> ps;
  auto ca = make_cross(ps, rng, 8, 2, true);
  auto z = ad::constant(random_tensor<double>({1, 4, 8}, rng));
  auto f = random_tensor<double>({1, 10, 8}, rng);

  std::vector<int64_t> perm(10);
  for (int64_t i = 0; i < 10; ++i) perm[static_cast<size_t>(i)] = i;
  Rng(77).shuffle(perm.begin(), perm.end());
  Tensor<double> f_perm({1, 10, 8});
  for (int64_t i = 0; i < 10; ++i)
    for (int64_t c = 0; c < 8; ++c)
      f_perm.at(0, i, c) = f.at(0, perm[static_cast<size_t>(i)], c);

  auto out_a = ca.forward(z, ad::constant(f));
  auto out_b = ca.forward(z, ad::constant(f_perm));
  CHECK(max_abs_diff(out_a->value, out_b->value) < 1e-12);
}

TEST_CASE("cross_attend rejects non-finite logits with a diagnostic") {
  Rng rng(6);
  ParamStore<double> ps;
  auto ca = make_cross(ps, rng, 4, 1, true);
  Tensor<double> bad({1, 2, 4});
  bad[0] = std::numeric_limits<double>::infinity();
  auto z = ad::constant(bad);
  auto f = ad::constant(random_tensor<double>({1, 3, 4}, rng));
  CHECK_THROWS_AS(ca.forward(z, f), FatalError);
}

TEST_CASE("softmax rows in cross-attention sum to 1") {
  Rng rng(7);
  auto logits = ad::constant(random_tensor<double>({4, 5, 11}, rng, -3, 3));
  auto sm = ad::softmax_last(logits);
  for (int64_t r = 0; r < 20; ++r) {
    double s = 0;
    for (int64_t c = 0; c < 11; ++c) s += sm->value[r * 11 + c];
    CHECK(std::abs(s - 1.0) < 1e-6);
  }
}

TEST_CASE("cdb_forward: zeroed sublayers reduce to LN of the cross-attend result") {
  Rng rng(8);
  ModelConfig cfg = tiny_config();
  ParamStore<double> ps;
  auto block = ColorDecoderBlock<double>(ps, "cdb", cfg, rng);

  // zero the self-attention and MLP branches (weights and biases)
  for (auto* lin : {&block.self[1].q, &block.self[1].k, &block.self[1].v, &block.self[1].out,
                    &block.mlp.fc1, &block.mlp.fc2}) {
    lin->w->value.fill(0);
    lin->b->value.fill(0);
  }

  auto z = ad::constant(random_tensor<double>({2, 3, 8}, rng));
  auto f = ad::constant(random_tensor<double>({2, 6, 8}, rng));
  auto got = block.forward(z, f);
  auto expect = block.out_norm.forward(block.cross[0].forward(z, f));
  CHECK(max_abs_diff(got->value, expect->value) < 1e-12);
}

TEST_CASE("cdb_forward keeps [B,K,C] shape for any feature size") {
  Rng rng(9);
  ModelConfig cfg = tiny_config();
  ParamStore<double> ps;
  auto block = ColorDecoderBlock<double>(ps, "cdb", cfg, rng);
  for (int64_t n : {1, 4, 9, 25}) {
    auto z = ad::constant(random_tensor<double>({2, 3, 8}, rng));
    auto f = ad::constant(random_tensor<double>({2, n, 8}, rng));
    CHECK(block.forward(z, f)->value.shape() == Shape{2, 3, 8});
  }
}

TEST_CASE("all four decoder orderings construct and run") {
  Rng rng(10);
  for (auto order : {CdbOrder::kCrossSelf, CdbOrder::kSelfCross, CdbOrder::kSelfSelf,
                     CdbOrder::kCrossCross}) {
    ModelConfig cfg = tiny_config();
    cfg.cdb_order = order;
    ParamStore<double> ps;
    auto block = ColorDecoderBlock<double>(ps, cdb_order_to_string(order), cfg, rng);
    auto z = ad::constant(random_tensor<double>({1, 3, 8}, rng));
    auto f = ad::constant(random_tensor<double>({1, 4, 8}, rng));
    auto out = block.forward(z, f);
    CHECK(out->value.all_finite());
  }
}

TEST_CASE("decode_colors: schedule order, block count, zero-input symmetry") {
  Rng rng(11);
  ModelConfig cfg = tiny_config();
  cfg.decoder_groups = 3;  // M=3 with 3 scales -> 9 blocks
  ParamStore<double> ps;
  auto dec = ColorDecoder<double>(ps, "cd", cfg, rng);
  CHECK(dec.block_count() == 9);
  const int64_t want[9] = {16, 8, 4, 16, 8, 4, 16, 8, 4};
  for (int64_t i = 0; i < 9; ++i) CHECK(dec.rate_for_block(i) == want[i]);

  // single-scale wiring: M=1, schedule [1/4] x3
  ModelConfig single = tiny_config();
  single.scale_schedule = {4, 4, 4};
  ParamStore<double> ps2;
  auto dec_single = ColorDecoder<double>(ps2, "cd", single, rng);
  CHECK(dec_single.block_count() == 3);
  for (int64_t i = 0; i < 3; ++i) CHECK(dec_single.rate_for_block(i) == 4);

  // zero features + zero queries -> finite E_c, identical across queries
  ModelConfig cfg1 = tiny_config();
  ParamStore<double> ps3;
  auto dec1 = ColorDecoder<double>(ps3, "cd", cfg1, rng);
  PixelDecoderOut<double> zf;
  zf.f_16 = ad::constant(Tensor<double>({2, 8, 2, 2}));
  zf.f_8 = ad::constant(Tensor<double>({2, 8, 4, 4}));
  zf.f_4 = ad::constant(Tensor<double>({2, 8, 8, 8}));
  auto e_c = dec1.forward(zf, 2);
  CHECK(e_c->value.all_finite());
  for (int64_t b = 0; b < 2; ++b)
    for (int64_t k = 1; k < cfg1.num_queries; ++k)
      for (int64_t c = 0; c < cfg1.embed_dim; ++c)
        CHECK(e_c->value.at(b, k, c) == doctest::Approx(e_c->value.at(b, 0, c)).epsilon(1e-12));
}

TEST_CASE("decode_colors is permutation-equivariant in the queries") {
  Rng rng(12);
  ModelConfig cfg = tiny_config();
  ParamStore<double> ps;
  auto dec = ColorDecoder<double>(ps, "cd", cfg, rng);
  auto feats = random_feats<double>(cfg, 1, 32, rng);

  auto z = random_tensor<double>({1, 3, 8}, rng);
  Tensor<double> z_perm({1, 3, 8});
  const int64_t perm[3] = {2, 0, 1};
  for (int64_t k = 0; k < 3; ++k)
    for (int64_t c = 0; c < 8; ++c) z_perm.at(0, k, c) = z.at(0, perm[k], c);

  auto out = dec.forward_from(ad::constant(z), feats);
  auto out_perm = dec.forward_from(ad::constant(z_perm), feats);
  for (int64_t k = 0; k < 3; ++k)
    for (int64_t c = 0; c < 8; ++c)
      CHECK(out_perm->value.at(0, k, c) ==
            doctest::Approx(out->value.at(0, perm[k], c)).epsilon(1e-10));
}

TEST_CASE("tiny one-head CDB passes a finite-difference gradient check") {
  ModelConfig cfg;
  cfg.num_queries = 2;
  cfg.embed_dim = 4;
  cfg.heads = 1;
  cfg.ffn_dim = 6;
  cfg.decoder_widths = {4, 4, 4, 4};
  cfg.encoder_widths = {4, 4, 4, 4};

  for (uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(100 + seed);
    ParamStore<double> ps;
    auto block = ColorDecoderBlock<double>(ps, "cdb", cfg, rng);
    auto z = ad::leaf(random_tensor<double>({1, 2, 4}, rng), true);
    auto f = ad::leaf(random_tensor<double>({1, 4, 4}, rng), true);
    auto wc = ad::constant(random_tensor<double>({1, 2, 4}, rng));

    std::vector<Var<double>> leaves = {z, f};
    for (size_t i = 0; i < ps.size(); ++i) leaves.push_back(ps.var(i));
    auto res = check_gradients(
        leaves, [&]() { return ad::sum_all(ad::mul(block.forward(z, f), wc)); });
    CHECK(res.max_rel_err < 1e-3);
    CHECK(res.checked > 100);
  }
}
