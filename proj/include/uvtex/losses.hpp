/*
 * Copyright 2026 The uvtex Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "uvtex/image.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace uvtex {

/// A scalar objective and, where meaningful, its gradient w.r.t. the first argument.
struct LossValue
{
    double value = 0.0;
    std::vector<double> gradient;
};

enum class TvNorm {
    squared,  ///< sum of squared forward differences
    absolute, ///< sum of absolute forward differences (ablation)
};

/// Sum over channels of horizontal and vertical forward differences. Gradient w.r.t. the image data.
LossValue tv_loss(const Image& image, TvNorm norm = TvNorm::squared);

/**
 * Mean absolute difference over the entries of pixels where `mask` is true
 * (all pixels when absent). The gradient w.r.t. `a` is sign(a - b) / count.
 * Throws InputError on shape mismatch or an empty mask.
 */
LossValue l1_loss(const Image& a, const Image& b, const std::optional<Mask>& mask = std::nullopt);
LossValue l1_loss(std::span<const double> a, std::span<const double> b);

struct SamplerLoss
{
    double value = 0.0;
    double uv_term = 0.0;
    double image_term = 0.0;
    double tv_term = 0.0;
    std::vector<double> grad_uv;       ///< w.r.t. the sampled UV map
    std::vector<double> grad_rendered; ///< w.r.t. the rendered image
};

/**
 * ||uv_spl - uv_gt||_1 (over uv_gt.valid) + ||rendered - input||_1 (over the
 * pixels valid in both images) + lambda_tv * TV(uv_spl).
 */
SamplerLoss sampler_loss(const UVMap& uv_spl, const UVMap& uv_gt, const Image& rendered, const Image& input_masked,
                         double lambda_tv);

/// l1_loss(uv, mirror(uv)) over texels valid on both sides. Gradient w.r.t. uv texels.
LossValue symmetry_loss(const UVMap& uv);

enum class AdversarialMode {
    discriminator,            ///< mean log D(x) + mean log(1 - D(x_hat))
    generator_saturating,     ///< mean log(1 - D(x_hat))
    generator_non_saturating, ///< -mean log D(x_hat)
};

/**
 * Adversarial objective over discriminator scores in (0, 1). An empty score
 * list contributes nothing. The gradient is laid out as [real..., fake...].
 * Throws std::domain_error on a score outside (0, 1).
 */
LossValue adversarial_loss(std::span<const double> real_scores, std::span<const double> fake_scores,
                           AdversarialMode mode = AdversarialMode::discriminator);

/// Mean absolute difference of two feature vectors. Gradient w.r.t. feat_a.
LossValue identity_loss(std::span<const double> feat_a, std::span<const double> feat_b);

struct LossTerms
{
    double rec = 0.0;
    double adv = 0.0;
    double sym = 0.0;
    double id = 0.0;
    double tv = 0.0;
};

struct LossWeights
{
    double adv = 1.0;
    double sym = 1.0;
    double id = 1.0;
    double tv = 1.0;
};

/// rec + w.adv * adv + w.sym * sym + w.id * id + w.tv * tv; gradient w.r.t. (rec, adv, sym, id, tv).
LossValue total_loss(const LossTerms& terms, const LossWeights& weights = {});

struct Rect
{
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

struct PatchLayout
{
    Rect center;
    std::array<Rect, 2> sides; ///< left, right
};

/// Center: middle 50% of columns x middle 60% of rows. Sides: outer 35% of columns, all rows.
PatchLayout default_patch_layout(int resolution);

/// Rectangular crops; each image's mask is the cropped validity.
struct UVPatches
{
    Image center;
    Image left;
    Image right; ///< mirrored to share the left patch's orientation
};

/**
 * Crops the center and side patches. Texels inside `nose_mask` are zeroed and
 * marked invalid in every patch. Throws InputError for rectangles out of
 * bounds or side rectangles of different sizes.
 */
UVPatches crop_uv_patches(const UVMap& uv, const PatchLayout& layout, const std::optional<Mask>& nose_mask = std::nullopt);

/**
 * Mean structural similarity: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
 * C2 = 0.03^2 for data in [0, 1], over all fully contained windows and all
 * channels. Requires images of at least 11x11.
 */
double ssim(const Image& a, const Image& b);

/// <f1, f2> / (|f1| |f2|). Throws InputError on a zero vector or length mismatch.
double cosine_similarity(std::span<const double> f1, std::span<const double> f2);

/// Stand-in identity features: box-downsample by `cell` and flatten.
std::vector<double> downsample_features(const Image& image, int cell = 4);

} // namespace uvtex
