// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <thread>

#include "core/colorspace.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace duocolor::data {

using duocolor::color::LabImage;
using duocolor::color::RgbImage;

struct DatasetSpec {
  // A directory of PNG/JPEG images, or "synthetic:shapes:<count>" for the
  // procedural colored-shapes set (no files needed).
  std::string root;
  // Optional manifest: one relative path per line (UTF-8), resolved
  // against root.
  std::string manifest;
  int64_t resolution = 64;  // must be divisible by 32
  bool augment = false;
  uint64_t seed = 7;
  int64_t batch_size = 8;
};

struct Batch {
  Tensor<float> x_l;   // B x 1 x H x W, L in [0,100]
  Tensor<float> y_ab;  // B x 2 x H x W, AB in [-128,127]
  std::vector<int64_t> indices;
};

// Hue rotation and chroma scaling in the Lab plane; luminance-preserving by
// construction (only gamut clamping can move L, and by < 2 units).
RgbImage<float> color_augment(const RgbImage<float>& img, uint64_t seed,
                              double hue_range_deg = 18.0, double sat_range = 0.3);

// Deterministic procedural image: colored shapes whose hue follows their
// gray level, so chroma is learnable from luminance.
RgbImage<float> synthetic_shape_image(int64_t resolution, Rng rng);

class Dataset {
 public:
  explicit Dataset(const DatasetSpec& spec);

  int64_t size() const { return static_cast<int64_t>(images_.size()); }
  int64_t batches_per_epoch() const;
  const DatasetSpec& spec() const { return spec_; }

  // Pure function of (epoch, batch index); the prefetcher may evaluate it
  // ahead of the consumer without changing the sequence.
  Batch make_batch(int64_t epoch, int64_t batch_in_epoch) const;

  const RgbImage<float>& image(int64_t i) const { return images_.at(static_cast<size_t>(i)); }

 private:
  std::vector<int64_t> epoch_order(int64_t epoch) const;

  DatasetSpec spec_;
  std::vector<RgbImage<float>> images_;  // resized, [0,1]
  std::vector<std::string> names_;
};

// Sequential batch source over epochs with optional background prefetch.
class BatchStream {
 public:
  BatchStream(const Dataset& dataset, int64_t prefetch_depth = 2);
  ~BatchStream();

  BatchStream(const BatchStream&) = delete;
  BatchStream& operator=(const BatchStream&) = delete;

  Batch next();

 private:
  void producer_loop();
  Batch produce(int64_t counter) const;

  const Dataset& dataset_;
  int64_t depth_;
  int64_t consumed_ = 0;

  std::thread worker_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::queue<Batch> queue_;
  int64_t produced_ = 0;
  bool stop_ = false;
};

}  // namespace duocolor::data
