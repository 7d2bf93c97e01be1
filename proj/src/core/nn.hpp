// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Layer building blocks over the autodiff graph, plus the named parameter
// registry that the optimizer and checkpoints iterate.

#pragma once

#include <string>
#include <unordered_map>

#include "core/ops.hpp"
#include "core/ops_conv.hpp"
#include "core/ops_matmul.hpp"

namespace duocolor::nn {

using duocolor::ad::Var;

template <typename T>
class ParamStore {
 public:
  // Parameters always require grad, regardless of the ambient grad mode.
  Var<T> create(const std::string& name, Tensor<T> init) {
    check_arg(!index_.count(name), "duplicate parameter name: ", name);
    auto node = std::make_shared<ad::Node<T>>();
    node->value = std::move(init);
    node->requires_grad = true;
    index_[name] = names_.size();
    names_.push_back(name);
    vars_.push_back(node);
    return node;
  }

  size_t size() const { return vars_.size(); }
  const std::string& name(size_t i) const { return names_[i]; }
  const Var<T>& var(size_t i) const { return vars_[i]; }

  Var<T> find(const std::string& name) const {
    auto it = index_.find(name);
    check_arg(it != index_.end(), "unknown parameter: ", name);
    return vars_[it->second];
  }

  int64_t total_elements() const {
    int64_t n = 0;
    for (const auto& v : vars_) n += v->value.numel();
    return n;
  }

  void zero_grad() {
    for (auto& v : vars_) v->zero_grad();
  }

 private:
  std::vector<std::string> names_;
  std::vector<Var<T>> vars_;
  std::unordered_map<std::string, size_t> index_;
};

template <typename T>
struct Conv2d {
  Var<T> w, b;
  int64_t stride = 1, pad = 0;

  Conv2d() = default;
  Conv2d(ParamStore<T>& ps, const std::string& name, int64_t c_in, int64_t c_out,
         int64_t k, int64_t stride_, int64_t pad_, Rng& rng, double init_std,
         bool zero_init = false)
      : stride(stride_), pad(pad_) {
    Tensor<T> wt({c_out, c_in, k, k});
    if (!zero_init) wt.fill_trunc_normal(rng, init_std);
    w = ps.create(name + ".w", std::move(wt));
    b = ps.create(name + ".b", Tensor<T>({c_out}));
  }

  Var<T> forward(const Var<T>& x) const { return ad::conv2d(x, w, b, stride, pad); }
};

template <typename T>
struct DepthwiseConv2d {
  Var<T> w, b;
  int64_t pad = 0;

  DepthwiseConv2d() = default;
  DepthwiseConv2d(ParamStore<T>& ps, const std::string& name, int64_t channels, int64_t k,
                  int64_t pad_, Rng& rng, double init_std)
      : pad(pad_) {
    Tensor<T> wt({channels, k, k});
    wt.fill_trunc_normal(rng, init_std);
    w = ps.create(name + ".w", std::move(wt));
    b = ps.create(name + ".b", Tensor<T>({channels}));
  }

  Var<T> forward(const Var<T>& x) const { return ad::depthwise_conv2d(x, w, b, pad); }
};

template <typename T>
struct Linear {
  Var<T> w, b;

  Linear() = default;
  Linear(ParamStore<T>& ps, const std::string& name, int64_t in_f, int64_t out_f, Rng& rng,
         double init_std) {
    Tensor<T> wt({out_f, in_f});
    wt.fill_trunc_normal(rng, init_std);
    w = ps.create(name + ".w", std::move(wt));
    b = ps.create(name + ".b", Tensor<T>({out_f}));
  }

  Var<T> forward(const Var<T>& x) const { return ad::linear(x, w, b); }
};

template <typename T>
struct LayerNormChan {
  Var<T> g, b;
  T eps = T(1e-6);

  LayerNormChan() = default;
  LayerNormChan(ParamStore<T>& ps, const std::string& name, int64_t channels) {
    g = ps.create(name + ".g", Tensor<T>::full({channels}, T(1)));
    b = ps.create(name + ".b", Tensor<T>({channels}));
  }

  Var<T> forward(const Var<T>& x) const { return ad::layer_norm_chan(x, g, b, eps); }
};

template <typename T>
struct LayerNormLast {
  Var<T> g, b;
  T eps = T(1e-6);

  LayerNormLast() = default;
  LayerNormLast(ParamStore<T>& ps, const std::string& name, int64_t dim) {
    g = ps.create(name + ".g", Tensor<T>::full({dim}, T(1)));
    b = ps.create(name + ".b", Tensor<T>({dim}));
  }

  Var<T> forward(const Var<T>& x) const { return ad::layer_norm_last(x, g, b, eps); }
};

// [B, S, C] -> [B*h, S, C/h]
template <typename T>
Var<T> split_heads(const Var<T>& x, int64_t heads) {
  const Shape& s = x->value.shape();
  check_arg(s.size() == 3 && s[2] % heads == 0, "split_heads: bad shape ", shape_str(s));
  auto t = ad::reshape(x, {s[0], s[1], heads, s[2] / heads});
  t = ad::transpose_12(t);  // [B, h, S, d]
  return ad::reshape(t, {s[0] * heads, s[1], s[2] / heads});
}

// [B*h, S, d] -> [B, S, h*d]
template <typename T>
Var<T> merge_heads(const Var<T>& x, int64_t heads) {
  const Shape& s = x->value.shape();
  check_arg(s.size() == 3 && s[0] % heads == 0, "merge_heads: bad shape ", shape_str(s));
  auto t = ad::reshape(x, {s[0] / heads, heads, s[1], s[2]});
  t = ad::transpose_12(t);  // [B, S, h, d]
  return ad::reshape(t, {s[0] / heads, s[1], heads * s[2]});
}

// Scaled dot-product attention core shared by self- and cross-attention.
// q: [B,Sq,C], kv: [B,Skv,C] already projected; returns [B,Sq,C].
template <typename T>
Var<T> attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, int64_t heads,
                 bool scaled) {
  int64_t c = q->value.shape().back();
  auto qh = split_heads(q, heads);
  auto kh = split_heads(k, heads);
  auto vh = split_heads(v, heads);
  auto logits = ad::bmm(qh, kh, /*trans_b=*/true);
  if (scaled) logits = ad::scale(logits, T(1.0 / std::sqrt(double(c / heads))));
  ad::check_finite(logits, "attention logits");
  auto attn = ad::softmax_last(logits);
  auto out = ad::bmm(attn, vh);
  return merge_heads(out, heads);
}

// Standard multi-head self-attention with output projection.
template <typename T>
struct SelfAttention {
  Linear<T> q, k, v, out;
  int64_t heads = 1;

  SelfAttention() = default;
  SelfAttention(ParamStore<T>& ps, const std::string& name, int64_t dim, int64_t heads_,
                Rng& rng, double init_std)
      : heads(heads_) {
    check_arg(dim % heads_ == 0, "attention dim ", dim, " not divisible by heads ", heads_);
    q = Linear<T>(ps, name + ".q", dim, dim, rng, init_std);
    k = Linear<T>(ps, name + ".k", dim, dim, rng, init_std);
    v = Linear<T>(ps, name + ".v", dim, dim, rng, init_std);
    out = Linear<T>(ps, name + ".out", dim, dim, rng, init_std);
  }

  Var<T> forward(const Var<T>& x) const {
    auto res = attention(q.forward(x), k.forward(x), v.forward(x), heads, /*scaled=*/true);
    return out.forward(res);
  }
};

// Two-layer feed-forward with ReLU.
template <typename T>
struct Mlp {
  Linear<T> fc1, fc2;

  Mlp() = default;
  Mlp(ParamStore<T>& ps, const std::string& name, int64_t dim, int64_t hidden, Rng& rng,
      double init_std) {
    fc1 = Linear<T>(ps, name + ".fc1", dim, hidden, rng, init_std);
    fc2 = Linear<T>(ps, name + ".fc2", hidden, dim, rng, init_std);
  }

  Var<T> forward(const Var<T>& x) const { return fc2.forward(ad::relu(fc1.forward(x))); }
};

}  // namespace duocolor::nn
