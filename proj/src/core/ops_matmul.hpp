// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "core/ops.hpp"

namespace duocolor::ad {

namespace detail {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapM = Eigen::Map<const MatRM<T>>;

}  // namespace detail

// x: [..., in_features] treated as rows; w: [out_features, in_features];
// b: [out_features] or empty tensor for no bias.
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  const Shape& sx = x->value.shape();
  const Shape& sw = w->value.shape();
  check_arg(sw.size() == 2, "linear: weight must be 2-D");
  int64_t in_f = sx.back();
  check_arg(sw[1] == in_f, "linear: in_features mismatch ", sw[1], " vs ", in_f);
  int64_t out_f = sw[0];
  int64_t rows = x->value.numel() / in_f;
  bool has_bias = static_cast<bool>(b) && !b->value.empty();
  if (has_bias)
    check_arg(b->value.numel() == out_f, "linear: bias size mismatch");

  Shape out_shape = sx;
  out_shape.back() = out_f;
  Tensor<T> out(out_shape);
  {
    detail::CMapM<T> X(x->value.data(), rows, in_f);
    detail::CMapM<T> W(w->value.data(), out_f, in_f);
    detail::MapM<T> Y(out.data(), rows, out_f);
    Y.noalias() = X * W.transpose();
    if (has_bias) {
      Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(b->value.data(), out_f);
      Y.rowwise() += bias;
    }
  }
  auto node = make_node(std::move(out));
  bool need_grad = grad_mode() && (x->requires_grad || w->requires_grad ||
                                   (has_bias && b->requires_grad));
  if (need_grad) {
    node->requires_grad = true;
    node->parents = has_bias ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
    node->backprop = [x, w, b, rows, in_f, out_f, has_bias](Node<T>& self) {
      detail::CMapM<T> GY(self.grad.data(), rows, out_f);
      if (x->requires_grad) {
        Tensor<T> g(x->value.shape());
        detail::MapM<T> GX(g.data(), rows, in_f);
        detail::CMapM<T> W(w->value.data(), out_f, in_f);
        GX.noalias() = GY * W;
        x->accumulate(g);
      }
      if (w->requires_grad) {
        Tensor<T> g(w->value.shape());
        detail::MapM<T> GW(g.data(), out_f, in_f);
        detail::CMapM<T> X(x->value.data(), rows, in_f);
        GW.noalias() = GY.transpose() * X;
        w->accumulate(g);
      }
      if (has_bias && b->requires_grad) {
        Tensor<T> g(b->value.shape());
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> GB(g.data(), out_f);
        GB = GY.colwise().sum();
        b->accumulate(g);
      }
    };
  }
  return node;
}

// Batched matmul: a [B, M, K] x b [B, K, N] -> [B, M, N].
// trans_b interprets b as [B, N, K] and multiplies by its transpose.
template <typename T>
Var<T> bmm(const Var<T>& a, const Var<T>& b, bool trans_b = false) {
  const Shape& sa = a->value.shape();
  const Shape& sb = b->value.shape();
  check_arg(sa.size() == 3 && sb.size() == 3, "bmm: inputs must be 3-D");
  check_arg(sa[0] == sb[0], "bmm: batch mismatch");
  int64_t batch = sa[0], m = sa[1], k = sa[2];
  int64_t kb = trans_b ? sb[2] : sb[1];
  int64_t n = trans_b ? sb[1] : sb[2];
  check_arg(kb == k, "bmm: inner dim mismatch ", kb, " vs ", k);

  Tensor<T> out({batch, m, n});
  for (int64_t i = 0; i < batch; ++i) {
    detail::CMapM<T> A(a->value.data() + i * m * k, m, k);
    detail::MapM<T> Y(out.data() + i * m * n, m, n);
    if (trans_b) {
      detail::CMapM<T> B(b->value.data() + i * n * k, n, k);
      Y.noalias() = A * B.transpose();
    } else {
      detail::CMapM<T> B(b->value.data() + i * k * n, k, n);
      Y.noalias() = A * B;
    }
  }
  auto node = make_node(std::move(out));
  if (track<T>({&a, &b})) {
    node->requires_grad = true;
    node->parents = {a, b};
    node->backprop = [a, b, batch, m, k, n, trans_b](Node<T>& self) {
      if (a->requires_grad) {
        Tensor<T> g(a->value.shape());
        for (int64_t i = 0; i < batch; ++i) {
          detail::CMapM<T> GY(self.grad.data() + i * m * n, m, n);
          detail::MapM<T> GA(g.data() + i * m * k, m, k);
          if (trans_b) {
            detail::CMapM<T> B(b->value.data() + i * n * k, n, k);
            GA.noalias() = GY * B;
          } else {
            detail::CMapM<T> B(b->value.data() + i * k * n, k, n);
            GA.noalias() = GY * B.transpose();
          }
        }
        a->accumulate(g);
      }
      if (b->requires_grad) {
        Tensor<T> g(b->value.shape());
        for (int64_t i = 0; i < batch; ++i) {
          detail::CMapM<T> GY(self.grad.data() + i * m * n, m, n);
          detail::CMapM<T> A(a->value.data() + i * m * k, m, k);
          if (trans_b) {
            detail::MapM<T> GB(g.data() + i * n * k, n, k);
            GB.noalias() = GY.transpose() * A;
          } else {
            detail::MapM<T> GB(g.data() + i * k * n, k, n);
            GB.noalias() = A.transpose() * GY;
          }
        }
        b->accumulate(g);
      }
    };
  }
  return node;
}

}  // namespace duocolor::ad
