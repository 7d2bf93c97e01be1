// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training objectives: pixel L1, perceptual feature distance, least
// squares adversarial terms over patch logits, and the colorfulness loss
// L_col = 1 - (sigma_rgyb + 0.3 mu_rgyb) / 100 on opponent color-plane
// statistics. All consume unclamped generator output converted through the
// differentiable Lab -> RGB path; clamping exists only at image export.

#pragma once

#include "core/colorspace.hpp"
#include "core/ops_image.hpp"
#include "core/perceptual.hpp"

namespace duocolor::losses {

using duocolor::ad::Var;

struct LossWeights {
  double pix = 0.1;
  double per = 5.0;
  double adv = 1.0;
  double col = 0.5;

  void validate() const {
    check_arg(pix >= 0 && per >= 0 && adv >= 0 && col >= 0,
              "loss weights must be non-negative");
  }
};

// Mean absolute error over all elements.
template <typename T>
Var<T> pixel_loss(const Var<T>& pred, const Var<T>& target) {
  check_same_shape(pred->value, target->value, "pixel_loss");
  return ad::mean_all(ad::abs_val(ad::sub(pred, target)));
}

// Sum over extractor layers of the mean L1 feature distance.
template <typename T>
Var<T> perceptual_loss(const Var<T>& pred_rgb, const Var<T>& target_rgb,
                       const nn::FeatureExtractor<T>& extractor) {
  check_same_shape(pred_rgb->value, target_rgb->value, "perceptual_loss");
  auto fa = extractor.extract(pred_rgb);
  auto fb = extractor.extract(target_rgb);
  check_runtime(fa.size() == fb.size() && !fa.empty(), "extractor returned no layers");
  Var<T> total;
  for (size_t i = 0; i < fa.size(); ++i) {
    auto term = ad::mean_all(ad::abs_val(ad::sub(fa[i], fb[i])));
    total = total ? ad::add(total, term) : term;
  }
  return total;
}

// ---- colorfulness -------------------------------------------------------

struct ColorStats {
  double sigma_rgyb = 0;
  double mu_rgyb = 0;
};

// Exact opponent-plane statistics (population variance, no epsilon) of an
// interleaved RGB image on the 0..255 scale.
template <typename T>
ColorStats colorfulness_stats(const color::RgbImage<T>& img) {
  check_arg(img.pixels() >= 1, "colorfulness_stats: empty image");
  double sum_rg = 0, sum_rg2 = 0, sum_yb = 0, sum_yb2 = 0;
  int64_t n = img.pixels();
  for (int64_t i = 0; i < n; ++i) {
    double r = img.px[i * 3], g = img.px[i * 3 + 1], b = img.px[i * 3 + 2];
    double rg = r - g;
    double yb = 0.5 * (r + g) - b;
    sum_rg += rg;
    sum_rg2 += rg * rg;
    sum_yb += yb;
    sum_yb2 += yb * yb;
  }
  double mu_rg = sum_rg / n, mu_yb = sum_yb / n;
  double var_rg = std::max(0.0, sum_rg2 / n - mu_rg * mu_rg);
  double var_yb = std::max(0.0, sum_yb2 / n - mu_yb * mu_yb);
  ColorStats s;
  s.sigma_rgyb = std::sqrt(var_rg + var_yb);
  s.mu_rgyb = std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb);
  return s;
}

template <typename T>
double colorfulness_score(const color::RgbImage<T>& img) {
  auto s = colorfulness_stats(img);
  return s.sigma_rgyb + 0.3 * s.mu_rgyb;
}

// Exact loss value; 1.0 for any gray image, may go negative for extremely
// colorful ones (no clamp).
template <typename T>
double colorfulness_loss_value(const color::RgbImage<T>& img) {
  return 1.0 - colorfulness_score(img) / 100.0;
}

// Differentiable per-image colorfulness loss, averaged over the batch.
// rgb255: [B,3,H,W] on the 0..255 scale. A small epsilon inside the square
// roots keeps gradients finite at the sigma = 0 point; it shifts values by
// less than 1e-4 relative to the exact statistics.
template <typename T>
Var<T> colorfulness_loss(const Var<T>& rgb255, T eps = T(1e-8)) {
  const Shape& s = rgb255->value.shape();
  check_arg(s.size() == 4 && s[1] == 3, "colorfulness_loss: want [B,3,H,W]");
  int64_t batch = s[0], hw = s[2] * s[3];
  auto r = ad::reshape(ad::slice_channels(rgb255, 0, 1), {batch, hw});
  auto g = ad::reshape(ad::slice_channels(rgb255, 1, 2), {batch, hw});
  auto b = ad::reshape(ad::slice_channels(rgb255, 2, 3), {batch, hw});

  auto rg = ad::sub(r, g);
  auto yb = ad::sub(ad::scale(ad::add(r, g), T(0.5)), b);

  auto stats = [&](const Var<T>& plane) {
    auto mu = ad::mean_last(plane);                       // [B,1]
    auto m2 = ad::mean_last(ad::mul(plane, plane));       // [B,1]
    auto var = ad::sub(m2, ad::mul(mu, mu));              // population variance
    return std::make_pair(mu, var);
  };
  auto [mu_rg, var_rg] = stats(rg);
  auto [mu_yb, var_yb] = stats(yb);

  auto sigma = ad::sqrt_val(ad::add_scalar(ad::add(var_rg, var_yb), eps));
  auto mu = ad::sqrt_val(
      ad::add_scalar(ad::add(ad::mul(mu_rg, mu_rg), ad::mul(mu_yb, mu_yb)), eps));
  auto cf = ad::add(sigma, ad::scale(mu, T(0.3)));        // [B,1]
  auto per_image = ad::add_scalar(ad::scale(cf, T(-0.01)), T(1));
  return ad::mean_all(per_image);
}

// Lab [B,3,H,W] -> RGB 0..255 through the differentiable path.
template <typename T>
Var<T> lab_to_rgb255(const Var<T>& lab) {
  return ad::scale(ad::lab_to_rgb_unit(lab), T(255));
}

// ---- least-squares adversarial terms ------------------------------------

// 0.5 [ mean (D(real) - 1)^2 + mean D(fake)^2 ]
template <typename T>
Var<T> lsgan_disc_loss(const Var<T>& real_logits, const Var<T>& fake_logits) {
  ad::check_finite(real_logits, "discriminator logits (real)");
  ad::check_finite(fake_logits, "discriminator logits (fake)");
  auto real_term = ad::mean_all(ad::mul(ad::add_scalar(real_logits, T(-1)),
                                        ad::add_scalar(real_logits, T(-1))));
  auto fake_term = ad::mean_all(ad::mul(fake_logits, fake_logits));
  return ad::scale(ad::add(real_term, fake_term), T(0.5));
}

// mean (D(fake) - 1)^2
template <typename T>
Var<T> lsgan_gen_loss(const Var<T>& fake_logits) {
  ad::check_finite(fake_logits, "discriminator logits (fake)");
  auto shifted = ad::add_scalar(fake_logits, T(-1));
  return ad::mean_all(ad::mul(shifted, shifted));
}

// Convenience pair per the module contract: the generator term sees the
// attached prediction, the discriminator term a detached copy.
template <typename T, typename Disc>
std::pair<Var<T>, Var<T>> adversarial_losses(const Disc& disc, const Var<T>& pred_rgb,
                                             const Var<T>& real_rgb) {
  auto gen_term = lsgan_gen_loss(disc.forward(pred_rgb));
  auto disc_term =
      lsgan_disc_loss(disc.forward(real_rgb), disc.forward(ad::detach(pred_rgb)));
  return {gen_term, disc_term};
}

// L = w_pix L_pix + w_per L_per + w_adv L_adv + w_col L_col
template <typename T>
Var<T> total_loss(const Var<T>& pix, const Var<T>& per, const Var<T>& adv,
                  const Var<T>& col, const LossWeights& w) {
  for (const Var<T>* t : {&pix, &per, &adv, &col})
    check_runtime((*t)->value.all_finite(), "total_loss: non-finite term");
  return ad::add(ad::add(ad::scale(pix, T(w.pix)), ad::scale(per, T(w.per))),
                 ad::add(ad::scale(adv, T(w.adv)), ad::scale(col, T(w.col))));
}

}  // namespace duocolor::losses
