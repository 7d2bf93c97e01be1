// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation measures: colorfulness score, split-level delta-CF, PSNR and
// the Frechet distance between Gaussian fits of embedded image sets. The
// embedder is pluggable; the bundled one is a frozen random-conv pyramid,
// so published full-scale numbers are not reproducible here by design.

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "core/colorspace.hpp"
#include "core/losses.hpp"

namespace duocolor::metrics {

using duocolor::color::RgbImage;

// CF = sigma_rgyb + 0.3 mu_rgyb on the 0..255 opponent planes.
double colorfulness_score_255(const RgbImage<double>& img_255);

// Same, for a [0,1]-scaled image.
double colorfulness_score_unit(const RgbImage<float>& img);

// | mean(gen) - mean(gt) | of split-level mean scores.
double delta_cf(const std::vector<double>& gen_scores, const std::vector<double>& gt_scores);

inline constexpr double kPsnrCap = 100.0;  // dB reported for identical images

// 10 log10(peak^2 / MSE), capped at kPsnrCap. Images are [0,1]-scaled; peak
// 255 evaluates on the 8-bit lattice (the default convention), peak 1.0 on
// the unit scale.
double psnr(const RgbImage<float>& a, const RgbImage<float>& b, double peak = 255.0);

struct EmbeddingStats {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;  // unbiased sample covariance, symmetric PSD
  int64_t n = 0;
};

class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual Eigen::VectorXd embed(const RgbImage<float>& img) const = 0;
};

// Frozen random-conv features pooled per channel; deterministic in the seed.
class RandomConvEmbedder : public ImageEmbedder {
 public:
  explicit RandomConvEmbedder(uint64_t seed);
  ~RandomConvEmbedder() override;
  Eigen::VectorXd embed(const RgbImage<float>& img) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Sample mean and unbiased covariance; requires n >= 2.
EmbeddingStats embed_statistics(const std::vector<Eigen::VectorXd>& embeddings);

// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}), matrix square roots via
// the symmetric eigen-route. Eigenvalues below -1e-6 reject the input as
// non-PSD; small negatives clip to zero.
double frechet_distance(const EmbeddingStats& a, const EmbeddingStats& b);

}  // namespace duocolor::metrics
