// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for tests: finite-difference gradient checking and small
// tensor utilities.

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "core/graph.hpp"
#include "core/ops.hpp"

namespace duocolor::testutil {

using duocolor::Tensor;
using duocolor::ad::Var;

// |a - b| relative to max(1, |a|, |b|); tolerant for near-zero pairs.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

struct GradCheckResult {
  double max_rel_err = 0.0;
  int64_t checked = 0;
};

// Central finite differences against analytic gradients. loss_fn must
// rebuild the graph from the current leaf values on every call.
inline GradCheckResult check_gradients(const std::vector<Var<double>>& leaves,
                                       const std::function<Var<double>()>& loss_fn,
                                       double h = 1e-4) {
  auto loss = loss_fn();
  for (const auto& leafv : leaves) leafv->zero_grad();
  duocolor::ad::backward(loss);

  std::vector<Tensor<double>> analytic;
  analytic.reserve(leaves.size());
  for (const auto& leafv : leaves) {
    if (leafv->grad.empty())
      analytic.push_back(Tensor<double>(leafv->value.shape()));
    else
      analytic.push_back(leafv->grad.clone());
  }

  GradCheckResult res;
  for (size_t li = 0; li < leaves.size(); ++li) {
    auto& t = leaves[li]->value;
    for (int64_t i = 0; i < t.numel(); ++i) {
      double saved = t[i];
      t[i] = saved + h;
      double up = loss_fn()->value[0];
      t[i] = saved - h;
      double dn = loss_fn()->value[0];
      t[i] = saved;
      double fd = (up - dn) / (2 * h);
      res.max_rel_err = std::max(res.max_rel_err, rel_err(analytic[li][i], fd));
      ++res.checked;
    }
  }
  return res;
}

template <typename T>
Tensor<T> random_tensor(duocolor::Shape shape, duocolor::Rng& rng, double lo = -1.0,
                        double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  t.fill_uniform(rng, lo, hi);
  return t;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0;
  for (int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

}  // namespace duocolor::testutil
