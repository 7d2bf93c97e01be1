// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "core/common.hpp"
#include "core/rng.hpp"

namespace duocolor {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

// Dense row-major tensor. Copies are shallow (shared storage); every op in
// the graph allocates fresh storage for its output, so aliasing only occurs
// where it is intended (reshape, detach).
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(shape_numel(shape_), T(0))) {
    for (int64_t d : shape_) check_arg(d > 0, "tensor dims must be positive, got ", shape_str(shape_));
  }

  Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)) {
    check_arg(static_cast<int64_t>(values.size()) == shape_numel(shape_),
              "tensor init size mismatch: ", values.size(), " vs ", shape_str(shape_));
    data_ = std::make_shared<std::vector<T>>(std::move(values));
  }

  static Tensor full(Shape shape, T value) {
    Tensor t(std::move(shape));
    std::fill(t.data(), t.data() + t.numel(), value);
    return t;
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  bool empty() const { return !data_; }
  const Shape& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_.at(i); }
  size_t ndim() const { return shape_.size(); }
  int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }

  T* data() { return data_->data(); }
  const T* data() const { return data_->data(); }

  T& operator[](int64_t i) { return (*data_)[i]; }
  const T& operator[](int64_t i) const { return (*data_)[i]; }

  template <typename... Ix>
  T& at(Ix... ix) {
    return (*data_)[flat_index({static_cast<int64_t>(ix)...})];
  }
  template <typename... Ix>
  const T& at(Ix... ix) const {
    return (*data_)[flat_index({static_cast<int64_t>(ix)...})];
  }

  // Shares storage.
  Tensor reshape(Shape new_shape) const {
    check_arg(shape_numel(new_shape) == numel(), "reshape ", shape_str(shape_), " -> ",
              shape_str(new_shape), " changes element count");
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<T>>(*data_);
    return t;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t{shape_, std::vector<U>(numel())};
    for (int64_t i = 0; i < numel(); ++i) t[i] = static_cast<U>((*data_)[i]);
    return t;
  }

  void fill(T v) { std::fill(data_->begin(), data_->end(), v); }

  void fill_normal(Rng& rng, double mean, double std) {
    for (auto& v : *data_) v = static_cast<T>(rng.normal(mean, std));
  }

  void fill_trunc_normal(Rng& rng, double std) {
    for (auto& v : *data_) v = static_cast<T>(rng.trunc_normal(std));
  }

  void fill_uniform(Rng& rng, double lo, double hi) {
    for (auto& v : *data_) v = static_cast<T>(rng.uniform(lo, hi));
  }

  bool all_finite() const {
    for (const auto& v : *data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

 private:
  template <typename U>
  friend class Tensor;

  int64_t flat_index(std::initializer_list<int64_t> ix) const {
    int64_t flat = 0;
    size_t k = 0;
    for (int64_t i : ix) {
      flat = flat * shape_[k] + i;
      ++k;
    }
    return flat;
  }

  Shape shape_;
  std::shared_ptr<std::vector<T>> data_;
};

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  check_arg(a.same_shape(b), op, ": shape mismatch ", shape_str(a.shape()), " vs ",
            shape_str(b.shape()));
}

}  // namespace duocolor
