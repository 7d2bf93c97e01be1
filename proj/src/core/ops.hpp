// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Elementwise, reduction and shape ops for the autodiff graph.

#pragma once

#include <cmath>

#include "core/graph.hpp"

namespace duocolor::ad {

template <typename T>
Var<T> make_node(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  return n;
}

namespace detail {

// Unary op with pointwise derivative dy/dx computed from (x, y).
template <typename T, typename FwdFn, typename GradFn>
Var<T> unary(const Var<T>& a, FwdFn fwd, GradFn dydx) {
  Tensor<T> out(a->value.shape());
  const T* x = a->value.data();
  T* y = out.data();
  for (int64_t i = 0, n = out.numel(); i < n; ++i) y[i] = fwd(x[i]);
  auto node = make_node(std::move(out));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a, dydx](Node<T>& self) {
      Tensor<T> g(a->value.shape());
      const T* x = a->value.data();
      const T* y = self.value.data();
      const T* gy = self.grad.data();
      T* gx = g.data();
      for (int64_t i = 0, n = g.numel(); i < n; ++i) gx[i] = gy[i] * dydx(x[i], y[i]);
      a->accumulate(g);
    };
  }
  return node;
}

}  // namespace detail

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "add");
  Tensor<T> out(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* py = out.data();
  for (int64_t i = 0, n = out.numel(); i < n; ++i) py[i] = pa[i] + pb[i];
  auto node = make_node(std::move(out));
  if (track<T>({&a, &b})) {
    node->requires_grad = true;
    node->parents = {a, b};
    node->backprop = [a, b](Node<T>& self) {
      if (a->requires_grad) a->accumulate(self.grad);
      if (b->requires_grad) b->accumulate(self.grad);
    };
  }
  return node;
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "sub");
  Tensor<T> out(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* py = out.data();
  for (int64_t i = 0, n = out.numel(); i < n; ++i) py[i] = pa[i] - pb[i];
  auto node = make_node(std::move(out));
  if (track<T>({&a, &b})) {
    node->requires_grad = true;
    node->parents = {a, b};
    node->backprop = [a, b](Node<T>& self) {
      if (a->requires_grad) a->accumulate(self.grad);
      if (b->requires_grad) {
        Tensor<T> g(b->value.shape());
        const T* gy = self.grad.data();
        T* gx = g.data();
        for (int64_t i = 0, n = g.numel(); i < n; ++i) gx[i] = -gy[i];
        b->accumulate(g);
      }
    };
  }
  return node;
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "mul");
  Tensor<T> out(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* py = out.data();
  for (int64_t i = 0, n = out.numel(); i < n; ++i) py[i] = pa[i] * pb[i];
  auto node = make_node(std::move(out));
  if (track<T>({&a, &b})) {
    node->requires_grad = true;
    node->parents = {a, b};
    node->backprop = [a, b](Node<T>& self) {
      const T* gy = self.grad.data();
      if (a->requires_grad) {
        Tensor<T> g(a->value.shape());
        const T* pb = b->value.data();
        T* gx = g.data();
        for (int64_t i = 0, n = g.numel(); i < n; ++i) gx[i] = gy[i] * pb[i];
        a->accumulate(g);
      }
      if (b->requires_grad) {
        Tensor<T> g(b->value.shape());
        const T* pa = a->value.data();
        T* gx = g.data();
        for (int64_t i = 0, n = g.numel(); i < n; ++i) gx[i] = gy[i] * pa[i];
        b->accumulate(g);
      }
    };
  }
  return node;
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
  return detail::unary(
      a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T s) {
  return detail::unary(
      a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> neg(const Var<T>& a) {
  return scale(a, T(-1));
}

template <typename T>
Var<T> abs_val(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return std::abs(x); },
      [](T x, T) { return x >= T(0) ? T(1) : T(-1); });
}

template <typename T>
Var<T> sqrt_val(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return std::sqrt(x); },
      [](T, T y) { return y > T(0) ? T(0.5) / y : T(0); });
}

template <typename T>
Var<T> pow_scalar(const Var<T>& a, T e) {
  return detail::unary(
      a, [e](T x) { return std::pow(x, e); },
      [e](T x, T) { return e * std::pow(x, e - T(1)); });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope) {
  return detail::unary(
      a, [slope](T x) { return x > T(0) ? x : slope * x; },
      [slope](T x, T) { return x > T(0) ? T(1) : slope; });
}

template <typename T>
Var<T> gelu(const Var<T>& a) {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  return detail::unary(
      a,
      [](T x) {
        return static_cast<T>(0.5 * double(x) * (1.0 + std::erf(double(x) * kInvSqrt2)));
      },
      [](T x, T) {
        double cdf = 0.5 * (1.0 + std::erf(double(x) * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * double(x) * double(x));
        return static_cast<T>(cdf + double(x) * pdf);
      });
}

// Gradient is cut where the clamp is active; selects using the raw value.
template <typename T>
Var<T> clamp_min(const Var<T>& a, T lo) {
  return detail::unary(
      a, [lo](T x) { return x < lo ? lo : x; },
      [lo](T x, T) { return x < lo ? T(0) : T(1); });
}

// mask selects a where nonzero, b otherwise. Only the taken branch gets
// gradient, so the untaken branch may hold guarded (clamped) values.
template <typename T>
Var<T> where(const Tensor<uint8_t>& mask, const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "where");
  check_arg(mask.numel() == a->value.numel(), "where: mask size mismatch");
  Tensor<T> out(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  const uint8_t* m = mask.data();
  T* py = out.data();
  for (int64_t i = 0, n = out.numel(); i < n; ++i) py[i] = m[i] ? pa[i] : pb[i];
  auto node = make_node(std::move(out));
  if (track<T>({&a, &b})) {
    node->requires_grad = true;
    node->parents = {a, b};
    node->backprop = [a, b, mask](Node<T>& self) {
      const T* gy = self.grad.data();
      const uint8_t* m = mask.data();
      if (a->requires_grad) {
        Tensor<T> g(a->value.shape());
        T* gx = g.data();
        for (int64_t i = 0, n = g.numel(); i < n; ++i) gx[i] = m[i] ? gy[i] : T(0);
        a->accumulate(g);
      }
      if (b->requires_grad) {
        Tensor<T> g(b->value.shape());
        T* gx = g.data();
        for (int64_t i = 0, n = g.numel(); i < n; ++i) gx[i] = m[i] ? T(0) : gy[i];
        b->accumulate(g);
      }
    };
  }
  return node;
}

template <typename T>
Tensor<uint8_t> greater_than(const Var<T>& a, T threshold) {
  Tensor<uint8_t> mask(a->value.shape());
  const T* x = a->value.data();
  for (int64_t i = 0, n = mask.numel(); i < n; ++i) mask[i] = x[i] > threshold ? 1 : 0;
  return mask;
}

template <typename T>
Var<T> sum_all(const Var<T>& a) {
  Tensor<T> out({1});
  const T* x = a->value.data();
  // pairwise-ish accumulation is unnecessary at these sizes; plain order is
  // part of the determinism contract
  T acc = T(0);
  for (int64_t i = 0, n = a->value.numel(); i < n; ++i) acc += x[i];
  out[0] = acc;
  auto node = make_node(std::move(out));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a](Node<T>& self) {
      a->accumulate(Tensor<T>::full(a->value.shape(), self.grad[0]));
    };
  }
  return node;
}

template <typename T>
Var<T> mean_all(const Var<T>& a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a->value.numel()));
}

// [..., N] -> [..., 1], mean over the last axis.
template <typename T>
Var<T> mean_last(const Var<T>& a) {
  const Shape& s = a->value.shape();
  check_arg(!s.empty(), "mean_last: scalar input");
  int64_t cols = s.back();
  int64_t rows = a->value.numel() / cols;
  Shape out_shape = s;
  out_shape.back() = 1;
  Tensor<T> out(out_shape);
  const T* x = a->value.data();
  for (int64_t r = 0; r < rows; ++r) {
    T acc = T(0);
    for (int64_t c = 0; c < cols; ++c) acc += x[r * cols + c];
    out[r] = acc / static_cast<T>(cols);
  }
  auto node = make_node(std::move(out));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a, rows, cols](Node<T>& self) {
      Tensor<T> g(a->value.shape());
      const T* gy = self.grad.data();
      T* gx = g.data();
      for (int64_t r = 0; r < rows; ++r) {
        T v = gy[r] / static_cast<T>(cols);
        for (int64_t c = 0; c < cols; ++c) gx[r * cols + c] = v;
      }
      a->accumulate(g);
    };
  }
  return node;
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape new_shape) {
  auto node = make_node(a->value.reshape(new_shape));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a](Node<T>& self) {
      a->accumulate(self.grad.reshape(a->value.shape()));
    };
  }
  return node;
}

// Concatenation along axis 1 of 3D/4D tensors (the channel axis for NCHW).
template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b) {
  const Shape& sa = a->value.shape();
  const Shape& sb = b->value.shape();
  check_arg(sa.size() == sb.size() && sa.size() >= 2, "concat_channels: rank mismatch");
  check_arg(sa[0] == sb[0], "concat_channels: batch mismatch");
  int64_t inner_a = 1, inner_b = 1;
  for (size_t i = 2; i < sa.size(); ++i) {
    check_arg(sa[i] == sb[i], "concat_channels: trailing dim mismatch");
    inner_a *= sa[i];
    inner_b *= sb[i];
  }
  (void)inner_b;
  Shape out_shape = sa;
  out_shape[1] = sa[1] + sb[1];
  Tensor<T> out(out_shape);
  int64_t batch = sa[0];
  int64_t block_a = sa[1] * inner_a;
  int64_t block_b = sb[1] * inner_a;
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* py = out.data();
  for (int64_t n = 0; n < batch; ++n) {
    std::copy(pa + n * block_a, pa + (n + 1) * block_a, py + n * (block_a + block_b));
    std::copy(pb + n * block_b, pb + (n + 1) * block_b,
              py + n * (block_a + block_b) + block_a);
  }
  auto node = make_node(std::move(out));
  if (track<T>({&a, &b})) {
    node->requires_grad = true;
    node->parents = {a, b};
    node->backprop = [a, b, batch, block_a, block_b](Node<T>& self) {
      const T* gy = self.grad.data();
      if (a->requires_grad) {
        Tensor<T> g(a->value.shape());
        T* gx = g.data();
        for (int64_t n = 0; n < batch; ++n)
          std::copy(gy + n * (block_a + block_b), gy + n * (block_a + block_b) + block_a,
                    gx + n * block_a);
        a->accumulate(g);
      }
      if (b->requires_grad) {
        Tensor<T> g(b->value.shape());
        T* gx = g.data();
        for (int64_t n = 0; n < batch; ++n)
          std::copy(gy + n * (block_a + block_b) + block_a,
                    gy + (n + 1) * (block_a + block_b), gx + n * block_b);
        b->accumulate(g);
      }
    };
  }
  return node;
}

// x[:, c0:c1] for rank >= 2 tensors (channel axis 1).
template <typename T>
Var<T> slice_channels(const Var<T>& a, int64_t c0, int64_t c1) {
  const Shape& s = a->value.shape();
  check_arg(s.size() >= 2 && c0 >= 0 && c1 > c0 && c1 <= s[1], "slice_channels: bad range [",
            c0, ",", c1, ") for ", shape_str(s));
  int64_t inner = 1;
  for (size_t i = 2; i < s.size(); ++i) inner *= s[i];
  Shape out_shape = s;
  out_shape[1] = c1 - c0;
  Tensor<T> out(out_shape);
  int64_t batch = s[0];
  int64_t in_block = s[1] * inner;
  int64_t out_block = (c1 - c0) * inner;
  const T* px = a->value.data();
  T* py = out.data();
  for (int64_t n = 0; n < batch; ++n)
    std::copy(px + n * in_block + c0 * inner, px + n * in_block + c1 * inner,
              py + n * out_block);
  auto node = make_node(std::move(out));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a, c0, inner, batch, in_block, out_block](Node<T>& self) {
      Tensor<T> g(a->value.shape());
      const T* gy = self.grad.data();
      T* gx = g.data();
      for (int64_t n = 0; n < batch; ++n)
        std::copy(gy + n * out_block, gy + (n + 1) * out_block,
                  gx + n * in_block + c0 * inner);
      a->accumulate(g);
    };
  }
  return node;
}

namespace detail {

template <typename T>
void transpose_mid(const T* src, T* dst, int64_t b, int64_t m, int64_t n, int64_t inner) {
  for (int64_t ib = 0; ib < b; ++ib) {
    const T* s = src + ib * m * n * inner;
    T* d = dst + ib * m * n * inner;
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j)
        std::copy(s + (i * n + j) * inner, s + (i * n + j + 1) * inner,
                  d + (j * m + i) * inner);
  }
}

}  // namespace detail

// [B, M, N, inner...] -> [B, N, M, inner...]; rank 3 handles [B, M, N].
template <typename T>
Var<T> transpose_12(const Var<T>& a) {
  const Shape& s = a->value.shape();
  check_arg(s.size() >= 3, "transpose_12: rank must be >= 3");
  int64_t b = s[0], m = s[1], n = s[2], inner = 1;
  for (size_t i = 3; i < s.size(); ++i) inner *= s[i];
  Shape out_shape = s;
  std::swap(out_shape[1], out_shape[2]);
  Tensor<T> out(out_shape);
  detail::transpose_mid(a->value.data(), out.data(), b, m, n, inner);
  auto node = make_node(std::move(out));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a, b, m, n, inner](Node<T>& self) {
      Tensor<T> g(a->value.shape());
      detail::transpose_mid(self.grad.data(), g.data(), b, n, m, inner);
      a->accumulate(g);
    };
  }
  return node;
}

// Softmax over the last axis with max subtraction.
template <typename T>
Var<T> softmax_last(const Var<T>& a) {
  const Shape& s = a->value.shape();
  int64_t cols = s.back();
  int64_t rows = a->value.numel() / cols;
  Tensor<T> out(s);
  const T* x = a->value.data();
  T* y = out.data();
  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = x + r * cols;
    T* yr = y + r * cols;
    T mx = xr[0];
    for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
    T denom = T(0);
    for (int64_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      denom += yr[c];
    }
    T inv = T(1) / denom;
    for (int64_t c = 0; c < cols; ++c) yr[c] *= inv;
  }
  auto node = make_node(std::move(out));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a, rows, cols](Node<T>& self) {
      Tensor<T> g(a->value.shape());
      const T* y = self.value.data();
      const T* gy = self.grad.data();
      T* gx = g.data();
      for (int64_t r = 0; r < rows; ++r) {
        const T* yr = y + r * cols;
        const T* gr = gy + r * cols;
        T dot = T(0);
        for (int64_t c = 0; c < cols; ++c) dot += yr[c] * gr[c];
        T* go = gx + r * cols;
        for (int64_t c = 0; c < cols; ++c) go[c] = yr[c] * (gr[c] - dot);
      }
      a->accumulate(g);
    };
  }
  return node;
}

// Prepends a batch axis of size B by repetition; gradient sums over copies.
template <typename T>
Var<T> tile_batch(const Var<T>& a, int64_t batch) {
  check_arg(batch >= 1, "tile_batch: batch must be >= 1");
  Shape out_shape = a->value.shape();
  out_shape.insert(out_shape.begin(), batch);
  Tensor<T> out(out_shape);
  int64_t block = a->value.numel();
  const T* px = a->value.data();
  T* py = out.data();
  for (int64_t n = 0; n < batch; ++n) std::copy(px, px + block, py + n * block);
  auto node = make_node(std::move(out));
  if (track<T>({&a})) {
    node->requires_grad = true;
    node->parents = {a};
    node->backprop = [a, batch, block](Node<T>& self) {
      Tensor<T> g(a->value.shape());
      const T* gy = self.grad.data();
      T* gx = g.data();
      for (int64_t n = 0; n < batch; ++n)
        for (int64_t i = 0; i < block; ++i) gx[i] += gy[n * block + i];
      a->accumulate(g);
    };
  }
  return node;
}

template <typename T>
void check_finite(const Var<T>& a, const char* what) {
  check_runtime(a->value.all_finite(), what, ": non-finite values encountered");
}

}  // namespace duocolor::ad
