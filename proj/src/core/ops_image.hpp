// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable Lab -> sRGB path used inside losses. Built from graph
// primitives; the piecewise branches are guarded so gradients stay finite
// for out-of-gamut inputs, and no clamp is applied (export clamps instead).

#pragma once

#include "core/colorspace.hpp"
#include "core/ops.hpp"

namespace duocolor::ad {

namespace detail {

// Inverse Lab companding: t^3 above delta, linear extension below.
template <typename T>
Var<T> lab_f_inv(const Var<T>& t) {
  using duocolor::color::kLabDelta;
  auto cubic = mul(mul(t, t), t);
  auto lin = scale(add_scalar(t, T(-4.0 / 29.0)), T(3.0 * kLabDelta * kLabDelta));
  return where(greater_than(t, T(kLabDelta)), cubic, lin);
}

// sRGB companding with the linear branch extended to negatives; the power
// branch input is clamped away from zero so the unused branch cannot
// produce NaN in forward or backward.
template <typename T>
Var<T> linear_to_srgb(const Var<T>& lin) {
  using duocolor::color::kSrgbCut;
  auto mask = greater_than(lin, T(kSrgbCut));
  auto safe = clamp_min(lin, T(kSrgbCut));
  auto powed = add_scalar(scale(pow_scalar(safe, T(1.0 / 2.4)), T(1.055)), T(-0.055));
  auto linear = scale(lin, T(12.92));
  return where(mask, powed, linear);
}

}  // namespace detail

// lab: [B,3,H,W] planar (L,a,b). Returns [B,3,H,W] RGB on the [0,1] scale,
// unclamped (values may leave [0,1] for out-of-gamut chroma).
template <typename T>
Var<T> lab_to_rgb_unit(const Var<T>& lab) {
  namespace cs = duocolor::color;
  const Shape& s = lab->value.shape();
  check_arg(s.size() == 4 && s[1] == 3, "lab_to_rgb_unit: want [B,3,H,W], got ",
            shape_str(s));
  auto l = slice_channels(lab, 0, 1);
  auto a = slice_channels(lab, 1, 2);
  auto b = slice_channels(lab, 2, 3);

  auto fy = add_scalar(scale(l, T(1.0 / 116.0)), T(16.0 / 116.0));
  auto fx = add(fy, scale(a, T(1.0 / 500.0)));
  auto fz = sub(fy, scale(b, T(1.0 / 200.0)));

  auto x = scale(detail::lab_f_inv(fx), T(cs::kWhiteX));
  auto y = scale(detail::lab_f_inv(fy), T(cs::kWhiteY));
  auto z = scale(detail::lab_f_inv(fz), T(cs::kWhiteZ));

  auto channel = [&](int row) {
    auto lin = add(add(scale(x, T(cs::kXyzToRgb[row * 3])), scale(y, T(cs::kXyzToRgb[row * 3 + 1]))),
                   scale(z, T(cs::kXyzToRgb[row * 3 + 2])));
    return detail::linear_to_srgb(lin);
  };

  return concat_channels(concat_channels(channel(0), channel(1)), channel(2));
}

}  // namespace duocolor::ad
