// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "core/image_io.hpp"
#include "core/resize.hpp"

namespace duocolor::data {

namespace fs = std::filesystem;

namespace {

void hsv_to_rgb(double h, double s, double v, float* rgb) {
  h = h - std::floor(h);  // wrap to [0,1)
  double r = std::abs(h * 6.0 - 3.0) - 1.0;
  double g = 2.0 - std::abs(h * 6.0 - 2.0);
  double b = 2.0 - std::abs(h * 6.0 - 4.0);
  double base[3] = {r, g, b};
  for (int c = 0; c < 3; ++c) {
    double k = std::min(1.0, std::max(0.0, base[c]));
    rgb[c] = static_cast<float>(v * (1.0 + s * (k - 1.0)));
  }
}

// Hue as a function of brightness; gives the toy set a learnable
// luminance -> chroma mapping.
double hue_from_value(double v) { return 0.05 + 0.8 * v; }

struct SyntheticRoot {
  bool is_synthetic = false;
  int64_t count = 0;
};

SyntheticRoot parse_synthetic(const std::string& root) {
  SyntheticRoot r;
  const std::string prefix = "synthetic:shapes:";
  if (root.rfind(prefix, 0) != 0) return r;
  r.is_synthetic = true;
  try {
    r.count = std::stoll(root.substr(prefix.size()));
  } catch (const std::exception&) {
    throw UsageError("bad synthetic dataset root: " + root);
  }
  check_arg(r.count >= 1, "synthetic dataset count must be >= 1");
  return r;
}

}  // namespace

RgbImage<float> color_augment(const RgbImage<float>& img, uint64_t seed,
                              double hue_range_deg, double sat_range) {
  if (hue_range_deg == 0.0 && sat_range == 0.0) return img;
  Rng rng(seed);
  double theta = rng.uniform(-hue_range_deg, hue_range_deg) * M_PI / 180.0;
  double sat = 1.0 + rng.uniform(-sat_range, sat_range);
  double ct = std::cos(theta), st = std::sin(theta);

  auto lab = color::rgb_to_lab(img);
  for (int64_t i = 0; i < lab.pixels(); ++i) {
    double a = lab.px[i * 3 + 1], b = lab.px[i * 3 + 2];
    lab.px[i * 3 + 1] = static_cast<float>(sat * (ct * a - st * b));
    lab.px[i * 3 + 2] = static_cast<float>(sat * (st * a + ct * b));
  }
  return color::lab_to_rgb(lab);  // clamps back into [0,1]
}

RgbImage<float> synthetic_shape_image(int64_t resolution, Rng rng) {
  double bg_v = rng.uniform(0.25, 0.85);
  double bg_s = rng.uniform(0.3, 0.7);
  float bg[3];
  hsv_to_rgb(hue_from_value(bg_v), bg_s, bg_v, bg);
  RgbImage<float> img{resolution, resolution,
                      std::vector<float>(static_cast<size_t>(resolution * resolution * 3))};
  for (int64_t i = 0; i < img.pixels(); ++i)
    for (int c = 0; c < 3; ++c) img.px[i * 3 + c] = bg[c];

  int64_t n_shapes = rng.uniform_int(4, 9);
  for (int64_t s = 0; s < n_shapes; ++s) {
    double v = rng.uniform(0.15, 0.95);
    double sat = rng.uniform(0.55, 1.0);
    double hue = hue_from_value(v) + rng.uniform(-0.04, 0.04);
    float col[3];
    hsv_to_rgb(hue, sat, v, col);

    int kind = static_cast<int>(rng.uniform_int(0, 2));
    int64_t cx = rng.uniform_int(0, resolution - 1);
    int64_t cy = rng.uniform_int(0, resolution - 1);
    int64_t r = rng.uniform_int(resolution / 10, resolution / 3);
    if (kind == 0) {  // disc
      for (int64_t y = std::max<int64_t>(0, cy - r); y < std::min(resolution, cy + r + 1); ++y)
        for (int64_t x = std::max<int64_t>(0, cx - r); x < std::min(resolution, cx + r + 1); ++x)
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = col[c];
    } else if (kind == 1) {  // axis-aligned rectangle
      int64_t w = rng.uniform_int(resolution / 8, resolution / 2);
      int64_t h = rng.uniform_int(resolution / 8, resolution / 2);
      for (int64_t y = std::max<int64_t>(0, cy - h / 2); y < std::min(resolution, cy + h / 2 + 1); ++y)
        for (int64_t x = std::max<int64_t>(0, cx - w / 2); x < std::min(resolution, cx + w / 2 + 1); ++x)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) = col[c];
    } else {  // stripe
      int64_t thickness = rng.uniform_int(2, std::max<int64_t>(3, resolution / 8));
      bool horizontal = rng.uniform() < 0.5;
      for (int64_t t = 0; t < thickness; ++t) {
        int64_t line = (horizontal ? cy : cx) + t;
        if (line < 0 || line >= resolution) continue;
        for (int64_t u = 0; u < resolution; ++u)
          for (int c = 0; c < 3; ++c)
            img.at(horizontal ? line : u, horizontal ? u : line, c) = col[c];
      }
    }
  }
  return img;
}

Dataset::Dataset(const DatasetSpec& spec) : spec_(spec) {
  check_arg(spec.resolution >= 32 && spec.resolution % 32 == 0,
            "dataset resolution must be a positive multiple of 32, got ", spec.resolution);
  check_arg(spec.batch_size >= 1, "batch size must be >= 1");

  auto synth = parse_synthetic(spec.root);
  if (synth.is_synthetic) {
    Rng rng(spec.seed);
    images_.reserve(static_cast<size_t>(synth.count));
    for (int64_t i = 0; i < synth.count; ++i) {
      images_.push_back(synthetic_shape_image(spec.resolution, rng.child(0x5A00 + i)));
      names_.push_back("synthetic_" + std::to_string(i));
    }
    return;
  }

  check_arg(fs::is_directory(spec.root), "dataset root is not a directory: ", spec.root);
  std::vector<std::string> files;
  if (!spec.manifest.empty()) {
    std::ifstream mf(spec.manifest);
    check_arg(mf.good(), "cannot open manifest: ", spec.manifest);
    std::string line;
    while (std::getline(mf, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) files.push_back((fs::path(spec.root) / line).string());
    }
  } else {
    for (const auto& entry : fs::directory_iterator(spec.root))
      if (entry.is_regular_file() && io::has_image_extension(entry.path().string()))
        files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
  }

  for (const auto& f : files) {
    try {
      auto img = io::load_rgb(f);
      img = center_crop_square(img);
      img = resize_bilinear(img, spec.resolution, spec.resolution);
      images_.push_back(std::move(img));
      names_.push_back(fs::path(f).filename().string());
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping unreadable image " << f << ": " << e.what() << "\n";
    }
  }
  check_arg(!images_.empty(), "dataset is empty (no decodable images under ", spec.root, ")");
}

int64_t Dataset::batches_per_epoch() const {
  return (size() + spec_.batch_size - 1) / spec_.batch_size;
}

std::vector<int64_t> Dataset::epoch_order(int64_t epoch) const {
  std::vector<int64_t> order(static_cast<size_t>(size()));
  for (int64_t i = 0; i < size(); ++i) order[static_cast<size_t>(i)] = i;
  Rng rng = Rng(spec_.seed).child(0xE90C + static_cast<uint64_t>(epoch));
  rng.shuffle(order.begin(), order.end());
  return order;
}

Batch Dataset::make_batch(int64_t epoch, int64_t batch_in_epoch) const {
  check_arg(batch_in_epoch >= 0 && batch_in_epoch < batches_per_epoch(),
            "batch index out of range");
  auto order = epoch_order(epoch);
  int64_t begin = batch_in_epoch * spec_.batch_size;
  int64_t end = std::min<int64_t>(begin + spec_.batch_size, size());
  int64_t b = end - begin;
  int64_t res = spec_.resolution;

  Batch batch;
  batch.x_l = Tensor<float>({b, 1, res, res});
  batch.y_ab = Tensor<float>({b, 2, res, res});
  for (int64_t i = 0; i < b; ++i) {
    int64_t idx = order[static_cast<size_t>(begin + i)];
    batch.indices.push_back(idx);
    const RgbImage<float>* rgb = &images_[static_cast<size_t>(idx)];
    RgbImage<float> augmented;
    if (spec_.augment) {
      uint64_t s = Rng(spec_.seed).child(0xA060 + static_cast<uint64_t>(epoch)).next_u64() ^
                   static_cast<uint64_t>(idx);
      augmented = color_augment(*rgb, s);
      rgb = &augmented;
    }
    auto lab = color::rgb_to_lab(*rgb);
    auto [l, ab] = color::split_luminance(lab);
    std::copy(l.data(), l.data() + l.numel(), batch.x_l.data() + i * res * res);
    std::copy(ab.data(), ab.data() + ab.numel(), batch.y_ab.data() + i * 2 * res * res);
  }
  return batch;
}

BatchStream::BatchStream(const Dataset& dataset, int64_t prefetch_depth)
    : dataset_(dataset), depth_(prefetch_depth) {
  if (depth_ > 0) worker_ = std::thread([this] { producer_loop(); });
}

BatchStream::~BatchStream() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

Batch BatchStream::produce(int64_t counter) const {
  int64_t per_epoch = dataset_.batches_per_epoch();
  return dataset_.make_batch(counter / per_epoch, counter % per_epoch);
}

void BatchStream::producer_loop() {
  for (;;) {
    int64_t counter;
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_.wait(lock, [this] { return stop_ || static_cast<int64_t>(queue_.size()) < depth_; });
      if (stop_) return;
      counter = produced_++;
    }
    Batch b = produce(counter);
    {
      std::lock_guard<std::mutex> lock(mu_);
      queue_.push(std::move(b));
    }
    cv_.notify_all();
  }
}

Batch BatchStream::next() {
  if (depth_ == 0) return produce(consumed_++);
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return !queue_.empty(); });
  Batch b = std::move(queue_.front());
  queue_.pop();
  ++consumed_;
  cv_.notify_all();
  return b;
}

}  // namespace duocolor::data
