// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Convolution, pixel shuffle and normalization ops.

#pragma once

#include <Eigen/Dense>

#include "core/ops.hpp"
#include "core/ops_matmul.hpp"

namespace duocolor::ad {

namespace detail {

inline int64_t conv_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// col is [Cin*kh*kw, OH*OW] row-major.
template <typename T>
void im2col(const T* x, int64_t c_in, int64_t h, int64_t w, int64_t kh, int64_t kw,
            int64_t stride, int64_t pad, int64_t oh, int64_t ow, T* col) {
  for (int64_t c = 0; c < c_in; ++c) {
    const T* xc = x + c * h * w;
    for (int64_t ki = 0; ki < kh; ++ki) {
      for (int64_t kj = 0; kj < kw; ++kj) {
        T* row = col + ((c * kh + ki) * kw + kj) * oh * ow;
        for (int64_t oy = 0; oy < oh; ++oy) {
          int64_t iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) {
            std::fill(row + oy * ow, row + (oy + 1) * ow, T(0));
            continue;
          }
          const T* xr = xc + iy * w;
          T* out = row + oy * ow;
          for (int64_t ox = 0; ox < ow; ++ox) {
            int64_t ix = ox * stride - pad + kj;
            out[ox] = (ix >= 0 && ix < w) ? xr[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, int64_t c_in, int64_t h, int64_t w, int64_t kh, int64_t kw,
            int64_t stride, int64_t pad, int64_t oh, int64_t ow, T* x) {
  for (int64_t c = 0; c < c_in; ++c) {
    T* xc = x + c * h * w;
    for (int64_t ki = 0; ki < kh; ++ki) {
      for (int64_t kj = 0; kj < kw; ++kj) {
        const T* row = col + ((c * kh + ki) * kw + kj) * oh * ow;
        for (int64_t oy = 0; oy < oh; ++oy) {
          int64_t iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          T* xr = xc + iy * w;
          const T* in = row + oy * ow;
          for (int64_t ox = 0; ox < ow; ++ox) {
            int64_t ix = ox * stride - pad + kj;
            if (ix >= 0 && ix < w) xr[ix] += in[ox];
          }
        }
      }
    }
  }
}

}  // namespace detail

// x: [B, Cin, H, W]; w: [Cout, Cin, kh, kw]; b: [Cout] or null.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int64_t stride,
              int64_t pad) {
  const Shape& sx = x->value.shape();
  const Shape& sw = w->value.shape();
  check_arg(sx.size() == 4 && sw.size() == 4, "conv2d: x and w must be 4-D");
  check_arg(sx[1] == sw[1], "conv2d: channel mismatch ", sx[1], " vs ", sw[1]);
  int64_t batch = sx[0], c_in = sx[1], h = sx[2], wd = sx[3];
  int64_t c_out = sw[0], kh = sw[2], kw = sw[3];
  int64_t oh = detail::conv_out_dim(h, kh, stride, pad);
  int64_t ow = detail::conv_out_dim(wd, kw, stride, pad);
  check_arg(oh >= 1 && ow >= 1, "conv2d: output would be empty");
  bool has_bias = static_cast<bool>(b) && !b->value.empty();
  if (has_bias) check_arg(b->value.numel() == c_out, "conv2d: bias size mismatch");
  bool pointwise = (kh == 1 && kw == 1 && stride == 1 && pad == 0);

  int64_t k_size = c_in * kh * kw;
  int64_t n_pos = oh * ow;
  Tensor<T> out({batch, c_out, oh, ow});
  {
    std::vector<T> col_buf(pointwise ? 0 : k_size * n_pos);
    detail::CMapM<T> W(w->value.data(), c_out, k_size);
    for (int64_t n = 0; n < batch; ++n) {
      const T* xb = x->value.data() + n * c_in * h * wd;
      const T* col = xb;
      if (!pointwise) {
        detail::im2col(xb, c_in, h, wd, kh, kw, stride, pad, oh, ow, col_buf.data());
        col = col_buf.data();
      }
      detail::CMapM<T> C(col, k_size, n_pos);
      detail::MapM<T> Y(out.data() + n * c_out * n_pos, c_out, n_pos);
      Y.noalias() = W * C;
      if (has_bias) {
        const T* bias = b->value.data();
        for (int64_t c = 0; c < c_out; ++c) Y.row(c).array() += bias[c];
      }
    }
  }

  auto node = make_node(std::move(out));
  bool need_grad = grad_mode() && (x->requires_grad || w->requires_grad ||
                                   (has_bias && b->requires_grad));
  if (need_grad) {
    node->requires_grad = true;
    node->parents = has_bias ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
    node->backprop = [x, w, b, has_bias, batch, c_in, h, wd, c_out, kh, kw, stride, pad,
                      oh, ow, k_size, n_pos, pointwise](Node<T>& self) {
      Tensor<T> gx, gw, gb;
      if (x->requires_grad) gx = Tensor<T>(x->value.shape());
      if (w->requires_grad) gw = Tensor<T>(w->value.shape());
      if (has_bias && b->requires_grad) gb = Tensor<T>(b->value.shape());
      std::vector<T> col_buf(pointwise ? 0 : k_size * n_pos);
      std::vector<T> dcol_buf(pointwise ? 0 : k_size * n_pos);
      detail::CMapM<T> W(w->value.data(), c_out, k_size);
      for (int64_t n = 0; n < batch; ++n) {
        detail::CMapM<T> GY(self.grad.data() + n * c_out * n_pos, c_out, n_pos);
        if (!gw.empty()) {
          const T* xb = x->value.data() + n * c_in * h * wd;
          const T* col = xb;
          if (!pointwise) {
            detail::im2col(xb, c_in, h, wd, kh, kw, stride, pad, oh, ow, col_buf.data());
            col = col_buf.data();
          }
          detail::CMapM<T> C(col, k_size, n_pos);
          detail::MapM<T> GW(gw.data(), c_out, k_size);
          GW.noalias() += GY * C.transpose();
        }
        if (!gx.empty()) {
          T* gxb = gx.data() + n * c_in * h * wd;
          if (pointwise) {
            detail::MapM<T> GC(gxb, k_size, n_pos);
            GC.noalias() = W.transpose() * GY;
          } else {
            detail::MapM<T> GC(dcol_buf.data(), k_size, n_pos);
            GC.noalias() = W.transpose() * GY;
            detail::col2im(dcol_buf.data(), c_in, h, wd, kh, kw, stride, pad, oh, ow, gxb);
          }
        }
        if (!gb.empty()) {
          T* gbd = gb.data();
          for (int64_t c = 0; c < c_out; ++c) gbd[c] += GY.row(c).sum();
        }
      }
      if (!gx.empty()) x->accumulate(gx);
      if (!gw.empty()) w->accumulate(gw);
      if (!gb.empty()) b->accumulate(gb);
    };
  }
  return node;
}

// Depthwise convolution, stride 1. x: [B, C, H, W]; w: [C, kh, kw]; b: [C] or null.
template <typename T>
Var<T> depthwise_conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int64_t pad) {
  const Shape& sx = x->value.shape();
  const Shape& sw = w->value.shape();
  check_arg(sx.size() == 4 && sw.size() == 3, "depthwise_conv2d: bad ranks");
  check_arg(sx[1] == sw[0], "depthwise_conv2d: channel mismatch");
  int64_t batch = sx[0], ch = sx[1], h = sx[2], wd = sx[3];
  int64_t kh = sw[1], kw = sw[2];
  int64_t oh = detail::conv_out_dim(h, kh, 1, pad);
  int64_t ow = detail::conv_out_dim(wd, kw, 1, pad);
  check_arg(oh >= 1 && ow >= 1, "depthwise_conv2d: output would be empty");
  bool has_bias = static_cast<bool>(b) && !b->value.empty();

  Tensor<T> out({batch, ch, oh, ow});
  const T* px = x->value.data();
  const T* pw = w->value.data();
  T* py = out.data();
  for (int64_t n = 0; n < batch; ++n) {
    for (int64_t c = 0; c < ch; ++c) {
      const T* xc = px + (n * ch + c) * h * wd;
      const T* wc = pw + c * kh * kw;
      T bias = has_bias ? b->value[c] : T(0);
      T* yc = py + (n * ch + c) * oh * ow;
      for (int64_t oy = 0; oy < oh; ++oy) {
        for (int64_t ox = 0; ox < ow; ++ox) {
          T acc = bias;
          for (int64_t ki = 0; ki < kh; ++ki) {
            int64_t iy = oy - pad + ki;
            if (iy < 0 || iy >= h) continue;
            for (int64_t kj = 0; kj < kw; ++kj) {
              int64_t ix = ox - pad + kj;
              if (ix < 0 || ix >= wd) continue;
              acc += xc[iy * wd + ix] * wc[ki * kw + kj];
            }
          }
          yc[oy * ow + ox] = acc;
        }
      }
    }
  }

  auto node = make_node(std::move(out));
  bool need_grad = grad_mode() && (x->requires_grad || w->requires_grad ||
                                   (has_bias && b->requires_grad));
  if (need_grad) {
    node->requires_grad = true;
    node->parents = has_bias ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
    node->backprop = [x, w, b, has_bias, batch, ch, h, wd, kh, kw, pad, oh,
                      ow](Node<T>& self) {
      Tensor<T> gx, gw, gb;
      if (x->requires_grad) gx = Tensor<T>(x->value.shape());
      if (w->requires_grad) gw = Tensor<T>(w->value.shape());
      if (has_bias && b->requires_grad) gb = Tensor<T>(b->value.shape());
      const T* px = x->value.data();
      const T* pw = w->value.data();
      const T* gy = self.grad.data();
      for (int64_t n = 0; n < batch; ++n) {
        for (int64_t c = 0; c < ch; ++c) {
          const T* xc = px + (n * ch + c) * h * wd;
          const T* wc = pw + c * kh * kw;
          const T* gyc = gy + (n * ch + c) * oh * ow;
          for (int64_t oy = 0; oy < oh; ++oy) {
            for (int64_t ox = 0; ox < ow; ++ox) {
              T g = gyc[oy * ow + ox];
              if (g == T(0)) continue;
              for (int64_t ki = 0; ki < kh; ++ki) {
                int64_t iy = oy - pad + ki;
                if (iy < 0 || iy >= h) continue;
                for (int64_t kj = 0; kj < kw; ++kj) {
                  int64_t ix = ox - pad + kj;
                  if (ix < 0 || ix >= wd) continue;
                  if (!gx.empty()) gx[(n * ch + c) * h * wd + iy * wd + ix] += g * wc[ki * kw + kj];
                  if (!gw.empty()) gw[c * kh * kw + ki * kw + kj] += g * xc[iy * wd + ix];
                }
              }
              if (!gb.empty()) gb[c] += g;
            }
          }
        }
      }
      if (!gx.empty()) x->accumulate(gx);
      if (!gw.empty()) w->accumulate(gw);
      if (!gb.empty()) b->accumulate(gb);
    };
  }
  return node;
}

namespace detail {

// forward=true maps [B, c*p^2, h, w] -> [B, c, h*p, w*p]; output spatial cell
// (dy, dx) of block (i, j) reads input channel c*p^2 + dy*p + dx at (i, j).
template <typename T>
void shuffle_copy(const T* src, T* dst, int64_t batch, int64_t c_out, int64_t h,
                  int64_t w, int64_t p, bool forward) {
  for (int64_t n = 0; n < batch; ++n) {
    for (int64_t c = 0; c < c_out; ++c) {
      for (int64_t dy = 0; dy < p; ++dy) {
        for (int64_t dx = 0; dx < p; ++dx) {
          int64_t c_in = (c * p + dy) * p + dx;
          const T* s;
          T* d;
          for (int64_t i = 0; i < h; ++i) {
            if (forward) {
              s = src + ((n * c_out * p * p + c_in) * h + i) * w;
              d = dst + ((n * c_out + c) * h * p + i * p + dy) * w * p + dx;
              for (int64_t j = 0; j < w; ++j) d[j * p] = s[j];
            } else {
              s = src + ((n * c_out + c) * h * p + i * p + dy) * w * p + dx;
              d = dst + ((n * c_out * p * p + c_in) * h + i) * w;
              for (int64_t j = 0; j < w; ++j) d[j] = s[j * p];
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

// [B, c*p^2, h, w] -> [B, c, h*p, w*p]; a lossless index rearrangement.
template <typename T>
Var<T> pixel_shuffle(const Var<T>& x, int64_t p) {
  const Shape& s = x->value.shape();
  check_arg(s.size() == 4, "pixel_shuffle: input must be 4-D");
  check_arg(p >= 1, "pixel_shuffle: factor must be >= 1");
  check_arg(s[1] % (p * p) == 0, "pixel_shuffle: channels ", s[1],
            " not divisible by p^2=", p * p);
  int64_t batch = s[0], c_out = s[1] / (p * p), h = s[2], w = s[3];
  Tensor<T> out({batch, c_out, h * p, w * p});
  detail::shuffle_copy(x->value.data(), out.data(), batch, c_out, h, w, p, true);
  auto node = make_node(std::move(out));
  if (track<T>({&x})) {
    node->requires_grad = true;
    node->parents = {x};
    node->backprop = [x, batch, c_out, h, w, p](Node<T>& self) {
      Tensor<T> g(x->value.shape());
      detail::shuffle_copy(self.grad.data(), g.data(), batch, c_out, h, w, p, false);
      x->accumulate(g);
    };
  }
  return node;
}

// Exact inverse of pixel_shuffle.
template <typename T>
Var<T> pixel_unshuffle(const Var<T>& x, int64_t p) {
  const Shape& s = x->value.shape();
  check_arg(s.size() == 4, "pixel_unshuffle: input must be 4-D");
  check_arg(p >= 1 && s[2] % p == 0 && s[3] % p == 0,
            "pixel_unshuffle: spatial dims not divisible by ", p);
  int64_t batch = s[0], c = s[1], h = s[2] / p, w = s[3] / p;
  Tensor<T> out({batch, c * p * p, h, w});
  detail::shuffle_copy(x->value.data(), out.data(), batch, c, h, w, p, false);
  auto node = make_node(std::move(out));
  if (track<T>({&x})) {
    node->requires_grad = true;
    node->parents = {x};
    node->backprop = [x, batch, c, h, w, p](Node<T>& self) {
      Tensor<T> g(x->value.shape());
      detail::shuffle_copy(self.grad.data(), g.data(), batch, c, h, w, p, true);
      x->accumulate(g);
    };
  }
  return node;
}

// Layer normalization over the last axis: y = (x - mu) / sqrt(var + eps) * g + b.
template <typename T>
Var<T> layer_norm_last(const Var<T>& x, const Var<T>& g, const Var<T>& b, T eps) {
  const Shape& s = x->value.shape();
  int64_t cols = s.back();
  int64_t rows = x->value.numel() / cols;
  check_arg(g->value.numel() == cols && b->value.numel() == cols,
            "layer_norm: affine size mismatch");

  Tensor<T> out(s);
  Tensor<T> xhat(s);        // retained for backward
  Tensor<T> inv_std({rows});
  const T* px = x->value.data();
  const T* pg = g->value.data();
  const T* pb = b->value.data();
  T* py = out.data();
  T* ph = xhat.data();
  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = px + r * cols;
    T mean = T(0);
    for (int64_t c = 0; c < cols; ++c) mean += xr[c];
    mean /= static_cast<T>(cols);
    T var = T(0);
    for (int64_t c = 0; c < cols; ++c) {
      T d = xr[c] - mean;
      var += d * d;
    }
    var /= static_cast<T>(cols);
    T inv = T(1) / std::sqrt(var + eps);
    inv_std[r] = inv;
    T* hr = ph + r * cols;
    T* yr = py + r * cols;
    for (int64_t c = 0; c < cols; ++c) {
      hr[c] = (xr[c] - mean) * inv;
      yr[c] = hr[c] * pg[c] + pb[c];
    }
  }

  auto node = make_node(std::move(out));
  if (track<T>({&x, &g, &b})) {
    node->requires_grad = true;
    node->parents = {x, g, b};
    node->backprop = [x, g, b, xhat, inv_std, rows, cols](Node<T>& self) {
      const T* gy = self.grad.data();
      const T* ph = xhat.data();
      if (g->requires_grad || b->requires_grad) {
        Tensor<T> gg(g->value.shape());
        Tensor<T> gb(b->value.shape());
        for (int64_t r = 0; r < rows; ++r) {
          const T* gr = gy + r * cols;
          const T* hr = ph + r * cols;
          for (int64_t c = 0; c < cols; ++c) {
            gg[c] += gr[c] * hr[c];
            gb[c] += gr[c];
          }
        }
        if (g->requires_grad) g->accumulate(gg);
        if (b->requires_grad) b->accumulate(gb);
      }
      if (x->requires_grad) {
        Tensor<T> gx(x->value.shape());
        const T* pg = g->value.data();
        T* gxd = gx.data();
        for (int64_t r = 0; r < rows; ++r) {
          const T* gr = gy + r * cols;
          const T* hr = ph + r * cols;
          T mean_dh = T(0), mean_dh_h = T(0);
          for (int64_t c = 0; c < cols; ++c) {
            T dh = gr[c] * pg[c];
            mean_dh += dh;
            mean_dh_h += dh * hr[c];
          }
          mean_dh /= static_cast<T>(cols);
          mean_dh_h /= static_cast<T>(cols);
          T inv = inv_std[r];
          T* go = gxd + r * cols;
          for (int64_t c = 0; c < cols; ++c) {
            T dh = gr[c] * pg[c];
            go[c] = inv * (dh - mean_dh - hr[c] * mean_dh_h);
          }
        }
        x->accumulate(gx);
      }
    };
  }
  return node;
}

// Layer normalization over the channel axis of NCHW tensors.
template <typename T>
Var<T> layer_norm_chan(const Var<T>& x, const Var<T>& g, const Var<T>& b, T eps) {
  const Shape& s = x->value.shape();
  check_arg(s.size() == 4, "layer_norm_chan: input must be 4-D");
  int64_t batch = s[0], c = s[1], h = s[2], w = s[3];
  auto t = reshape(x, {batch, c, h * w});
  t = transpose_12(t);  // [B, HW, C]
  t = layer_norm_last(t, g, b, eps);
  t = transpose_12(t);
  return reshape(t, {batch, c, h, w});
}

}  // namespace duocolor::ad
