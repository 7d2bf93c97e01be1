// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "core/tensor.hpp"

namespace duocolor::ad {

using duocolor::Tensor;

// Reverse-mode tape node. Ops attach a backprop closure that reads the
// node's gradient and accumulates into its parents.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first accumulate
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backprop;
  bool requires_grad = false;

  void accumulate(const Tensor<T>& g) {
    if (grad.empty()) grad = Tensor<T>(value.shape());
    check_same_shape(grad, g, "grad accumulate");
    T* dst = grad.data();
    const T* src = g.data();
    for (int64_t i = 0, n = grad.numel(); i < n; ++i) dst[i] += src[i];
  }

  void zero_grad() {
    if (!grad.empty()) grad.fill(T(0));
  }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

// Disables graph construction in scope; forwards run detached.
struct NoGradGuard {
  NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = prev; }
  bool prev;
};

template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad = false) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad && grad_mode();
  return n;
}

template <typename T>
Var<T> constant(Tensor<T> value) {
  return leaf(std::move(value), false);
}

// New leaf sharing the value storage, cut off from the tape.
template <typename T>
Var<T> detach(const Var<T>& v) {
  return leaf(v->value, false);
}

template <typename T>
bool track(std::initializer_list<const Var<T>*> inputs) {
  if (!grad_mode()) return false;
  for (const Var<T>* v : inputs)
    if ((*v)->requires_grad) return true;
  return false;
}

// Runs reverse accumulation from a scalar root.
template <typename T>
void backward(const Var<T>& root) {
  check_arg(root->value.numel() == 1, "backward: root must be scalar, got ",
            shape_str(root->value.shape()));
  check_arg(root->requires_grad, "backward: root does not require grad");

  // Iterative post-order over parents.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->accumulate(Tensor<T>::full(root->value.shape(), T(1)));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backprop && !node->grad.empty()) node->backprop(*node);
  }
}

}  // namespace duocolor::ad
