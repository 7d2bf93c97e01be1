// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations used to verify the fast paths.
// These stay deliberately independent of the graph ops: plain loops only.

#pragma once

#include <cmath>
#include <vector>

#include "core/tensor.hpp"

namespace duocolor::oracle {

// y = x W^T + b over the last axis.
template <typename T>
Tensor<T> linear_oracle(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  int64_t in_f = x.shape().back();
  int64_t out_f = w.dim(0);
  int64_t rows = x.numel() / in_f;
  Shape out_shape = x.shape();
  out_shape.back() = out_f;
  Tensor<T> y(out_shape);
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t o = 0; o < out_f; ++o) {
      double acc = b.empty() ? 0.0 : double(b[o]);
      for (int64_t i = 0; i < in_f; ++i) acc += double(x[r * in_f + i]) * double(w[o * in_f + i]);
      y[r * out_f + o] = static_cast<T>(acc);
    }
  return y;
}

// Multi-head cross-attention per the residual form:
// out = softmax(Q K^T [/ sqrt(d)]) V (per head, concatenated) + z.
// z: [B,K,C]; feat: [B,N,C] (already projected to C); w*/b* are the three
// affine projections.
template <typename T>
Tensor<T> cross_attend_oracle(const Tensor<T>& z, const Tensor<T>& feat,
                              const Tensor<T>& wq, const Tensor<T>& bq,
                              const Tensor<T>& wk, const Tensor<T>& bk,
                              const Tensor<T>& wv, const Tensor<T>& bv, int64_t heads,
                              bool scaled) {
  int64_t batch = z.dim(0), k_q = z.dim(1), c = z.dim(2);
  int64_t n = feat.dim(1);
  int64_t d = c / heads;
  Tensor<T> q = linear_oracle(z, wq, bq);
  Tensor<T> key = linear_oracle(feat, wk, bk);
  Tensor<T> val = linear_oracle(feat, wv, bv);
  Tensor<T> out(z.shape());
  double scale = scaled ? 1.0 / std::sqrt(double(d)) : 1.0;
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t h = 0; h < heads; ++h)
      for (int64_t i = 0; i < k_q; ++i) {
        std::vector<double> logits(static_cast<size_t>(n));
        double mx = -1e300;
        for (int64_t j = 0; j < n; ++j) {
          double dot = 0;
          for (int64_t e = 0; e < d; ++e)
            dot += double(q[(b * k_q + i) * c + h * d + e]) *
                   double(key[(b * n + j) * c + h * d + e]);
          logits[static_cast<size_t>(j)] = dot * scale;
          mx = std::max(mx, logits[static_cast<size_t>(j)]);
        }
        double denom = 0;
        for (int64_t j = 0; j < n; ++j) {
          logits[static_cast<size_t>(j)] = std::exp(logits[static_cast<size_t>(j)] - mx);
          denom += logits[static_cast<size_t>(j)];
        }
        for (int64_t e = 0; e < d; ++e) {
          double acc = 0;
          for (int64_t j = 0; j < n; ++j)
            acc += logits[static_cast<size_t>(j)] / denom *
                   double(val[(b * n + j) * c + h * d + e]);
          out[(b * k_q + i) * c + h * d + e] =
              static_cast<T>(acc + double(z[(b * k_q + i) * c + h * d + e]));
        }
      }
  return out;
}

// F_hat[b,k,h,w] = sum_c E_c[b,k,c] * E_i[b,c,h,w], triple loop.
template <typename T>
Tensor<T> fuse_oracle(const Tensor<T>& e_c, const Tensor<T>& e_i) {
  int64_t batch = e_c.dim(0), k = e_c.dim(1), c = e_c.dim(2);
  int64_t h = e_i.dim(2), w = e_i.dim(3);
  Tensor<T> out({batch, k, h, w});
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t q = 0; q < k; ++q)
      for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
          double acc = 0;
          for (int64_t e = 0; e < c; ++e)
            acc += double(e_c.at(b, q, e)) * double(e_i.at(b, e, y, x));
          out.at(b, q, y, x) = static_cast<T>(acc);
        }
  return out;
}

// Naive index-mapping pixel shuffle.
template <typename T>
Tensor<T> pixel_shuffle_oracle(const Tensor<T>& x, int64_t p) {
  int64_t batch = x.dim(0), c_out = x.dim(1) / (p * p), h = x.dim(2), w = x.dim(3);
  Tensor<T> out({batch, c_out, h * p, w * p});
  for (int64_t n = 0; n < batch; ++n)
    for (int64_t c = 0; c < c_out; ++c)
      for (int64_t y = 0; y < h * p; ++y)
        for (int64_t x2 = 0; x2 < w * p; ++x2)
          out.at(n, c, y, x2) = x.at(n, c * p * p + (y % p) * p + (x2 % p), y / p, x2 / p);
  return out;
}

}  // namespace duocolor::oracle
