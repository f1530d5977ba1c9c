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
#include "uvtex/losses.hpp"

#include "uvtex/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace uvtex {

namespace {

double sign(double v)
{
    return static_cast<double>((v > 0.0) - (v < 0.0));
}

} // namespace

LossValue tv_loss(const Image& image, TvNorm norm)
{
    if (image.width < 2 || image.height < 2) {
        throw InputError("tv_loss: image must be at least 2x2");
    }
    LossValue out;
    out.gradient.assign(image.data.size(), 0.0);
    const auto accumulate = [&](std::size_t hi, std::size_t lo) {
        const double d = image.data[hi] - image.data[lo];
        if (norm == TvNorm::squared) {
            out.value += d * d;
            out.gradient[hi] += 2.0 * d;
            out.gradient[lo] -= 2.0 * d;
        } else {
            out.value += std::abs(d);
            out.gradient[hi] += sign(d);
            out.gradient[lo] -= sign(d);
        }
    };
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < image.channels; ++c) {
                if (x + 1 < image.width) {
                    accumulate(image.offset(y, x + 1, c), image.offset(y, x, c));
                }
                if (y + 1 < image.height) {
                    accumulate(image.offset(y + 1, x, c), image.offset(y, x, c));
                }
            }
        }
    }
    return out;
}

LossValue l1_loss(const Image& a, const Image& b, const std::optional<Mask>& mask)
{
    if (!a.same_shape(b)) {
        throw InputError("l1_loss: image shapes differ");
    }
    if (mask && (mask->width() != a.width || mask->height() != a.height)) {
        throw InputError("l1_loss: mask shape differs from the images");
    }
    std::size_t count = 0;
    double sum = 0.0;
    LossValue out;
    out.gradient.assign(a.data.size(), 0.0);
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (mask && !(*mask)(y, x)) {
                continue;
            }
            for (int c = 0; c < a.channels; ++c) {
                const std::size_t i = a.offset(y, x, c);
                const double d = a.data[i] - b.data[i];
                sum += std::abs(d);
                out.gradient[i] = sign(d);
                ++count;
            }
        }
    }
    if (count == 0) {
        throw InputError("l1_loss: empty mask");
    }
    out.value = sum / static_cast<double>(count);
    for (double& g : out.gradient) {
        g /= static_cast<double>(count);
    }
    return out;
}

LossValue l1_loss(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw InputError("l1_loss: length mismatch");
    }
    if (a.empty()) {
        throw InputError("l1_loss: empty input");
    }
    LossValue out;
    out.gradient.resize(a.size());
    const double n = static_cast<double>(a.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += std::abs(d);
        out.gradient[i] = sign(d) / n;
    }
    out.value = sum / n;
    return out;
}

SamplerLoss sampler_loss(const UVMap& uv_spl, const UVMap& uv_gt, const Image& rendered, const Image& input_masked,
                         double lambda_tv)
{
    if (!(lambda_tv >= 0.0)) {
        throw InputError("sampler_loss: lambda_tv must be non-negative");
    }
    if (!input_masked.same_shape(rendered)) {
        throw InputError("sampler_loss: rendered and input images differ in shape");
    }
    const LossValue uv_term = l1_loss(uv_spl.texels, uv_gt.texels, uv_gt.valid);
    const LossValue image_term = l1_loss(rendered, input_masked, rendered.validity() & input_masked.validity());
    const LossValue tv_term = tv_loss(uv_spl.texels);

    SamplerLoss out;
    out.uv_term = uv_term.value;
    out.image_term = image_term.value;
    out.tv_term = tv_term.value;
    out.value = uv_term.value + image_term.value + lambda_tv * tv_term.value;
    out.grad_uv = uv_term.gradient;
    for (std::size_t i = 0; i < out.grad_uv.size(); ++i) {
        out.grad_uv[i] += lambda_tv * tv_term.gradient[i];
    }
    out.grad_rendered = image_term.gradient;
    return out;
}

LossValue symmetry_loss(const UVMap& uv)
{
    const Image& t = uv.texels;
    const Mask joint = uv.valid & mirror_horizontal(uv.valid);
    const std::size_t count = joint.count() * static_cast<std::size_t>(t.channels);
    if (count == 0) {
        throw InputError("symmetry_loss: no texel is valid on both sides");
    }
    const double n = static_cast<double>(count);
    LossValue out;
    out.gradient.assign(t.data.size(), 0.0);
    double sum = 0.0;
    for (int y = 0; y < t.height; ++y) {
        for (int x = 0; x < t.width; ++x) {
            if (!joint(y, x)) {
                continue;
            }
            const int mx = t.width - 1 - x;
            for (int c = 0; c < t.channels; ++c) {
                const double d = t(y, x, c) - t(y, mx, c);
                sum += std::abs(d);
                out.gradient[t.offset(y, x, c)] += sign(d) / n;
                out.gradient[t.offset(y, mx, c)] -= sign(d) / n;
            }
        }
    }
    out.value = sum / n;
    return out;
}

LossValue adversarial_loss(std::span<const double> real_scores, std::span<const double> fake_scores,
                           AdversarialMode mode)
{
    for (const auto scores : {real_scores, fake_scores}) {
        for (double s : scores) {
            if (!(s > 0.0 && s < 1.0)) {
                throw std::domain_error("adversarial_loss: score " + std::to_string(s) + " is outside (0, 1)");
            }
        }
    }
    LossValue out;
    out.gradient.assign(real_scores.size() + fake_scores.size(), 0.0);
    const double nr = static_cast<double>(real_scores.size());
    const double nf = static_cast<double>(fake_scores.size());
    const bool use_real = mode == AdversarialMode::discriminator;

    if (use_real && !real_scores.empty()) {
        double sum = 0.0;
        for (std::size_t i = 0; i < real_scores.size(); ++i) {
            sum += std::log(real_scores[i]);
            out.gradient[i] = 1.0 / (nr * real_scores[i]);
        }
        out.value += sum / nr;
    }
    if (!fake_scores.empty()) {
        double sum = 0.0;
        for (std::size_t j = 0; j < fake_scores.size(); ++j) {
            const double f = fake_scores[j];
            double& g = out.gradient[real_scores.size() + j];
            if (mode == AdversarialMode::generator_non_saturating) {
                sum -= std::log(f);
                g = -1.0 / (nf * f);
            } else {
                sum += std::log1p(-f);
                g = -1.0 / (nf * (1.0 - f));
            }
        }
        out.value += sum / nf;
    }
    return out;
}

LossValue identity_loss(std::span<const double> feat_a, std::span<const double> feat_b)
{
    return l1_loss(feat_a, feat_b);
}

LossValue total_loss(const LossTerms& terms, const LossWeights& weights)
{
    for (double w : {weights.adv, weights.sym, weights.id, weights.tv}) {
        if (!(w >= 0.0)) {
            throw InputError("total_loss: weights must be non-negative");
        }
    }
    LossValue out;
    out.value = terms.rec + weights.adv * terms.adv + weights.sym * terms.sym + weights.id * terms.id +
                weights.tv * terms.tv;
    out.gradient = {1.0, weights.adv, weights.sym, weights.id, weights.tv};
    return out;
}

PatchLayout default_patch_layout(int resolution)
{
    const auto at = [resolution](double f) { return static_cast<int>(std::lround(f * resolution)); };
    PatchLayout layout;
    layout.center = {at(0.25), at(0.2), at(0.75) - at(0.25), at(0.8) - at(0.2)};
    const int side = at(0.35);
    layout.sides[0] = {0, 0, side, resolution};
    layout.sides[1] = {resolution - side, 0, side, resolution};
    return layout;
}

namespace {

Image crop(const UVMap& uv, const Rect& r, const std::optional<Mask>& nose)
{
    const int res = uv.resolution();
    if (r.x < 0 || r.y < 0 || r.width <= 0 || r.height <= 0 || r.x + r.width > res || r.y + r.height > res) {
        throw InputError("crop_uv_patches: rectangle (" + std::to_string(r.x) + ", " + std::to_string(r.y) + ", " +
                         std::to_string(r.width) + ", " + std::to_string(r.height) + ") is out of bounds");
    }
    Image out(r.width, r.height, uv.channels());
    out.mask = Mask(r.width, r.height);
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
            const int sy = r.y + y;
            const int sx = r.x + x;
            if (nose && (*nose)(sy, sx)) {
                continue;
            }
            out.mask->set(y, x, uv.valid(sy, sx));
            for (int c = 0; c < uv.channels(); ++c) {
                out(y, x, c) = uv(sy, sx, c);
            }
        }
    }
    return out;
}

} // namespace

UVPatches crop_uv_patches(const UVMap& uv, const PatchLayout& layout, const std::optional<Mask>& nose_mask)
{
    if (nose_mask && (nose_mask->width() != uv.resolution() || nose_mask->height() != uv.resolution())) {
        throw InputError("crop_uv_patches: nose mask does not match the UV map");
    }
    const Rect& l = layout.sides[0];
    const Rect& r = layout.sides[1];
    if (l.width != r.width || l.height != r.height) {
        throw InputError("crop_uv_patches: side rectangles must be congruent");
    }
    UVPatches out;
    out.center = crop(uv, layout.center, nose_mask);
    out.left = crop(uv, l, nose_mask);
    out.right = mirror_horizontal(crop(uv, r, nose_mask));
    return out;
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_window()
{
    std::array<double, kWindow> w;
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += w[i];
    }
    for (double& v : w) {
        v /= sum;
    }
    return w;
}

// "Valid" separable filtering of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int width, int height,
                                 const std::array<double, kWindow>& w)
{
    const int ow = width - kWindow + 1;
    const int oh = height - kWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(height) * ow, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += w[k] * plane[static_cast<std::size_t>(y) * width + x + k];
            }
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += w[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
            }
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

} // namespace

double ssim(const Image& a, const Image& b)
{
    if (!a.same_shape(b)) {
        throw InputError("ssim: image shapes differ");
    }
    if (a.width < kWindow || a.height < kWindow) {
        throw InputError("ssim: images must be at least 11x11");
    }
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto w = gaussian_window();
    const std::size_t pixels = static_cast<std::size_t>(a.width) * a.height;
    double total = 0.0;
    std::size_t windows = 0;
    for (int c = 0; c < a.channels; ++c) {
        std::vector<double> pa(pixels), pb(pixels), paa(pixels), pbb(pixels), pab(pixels);
        for (std::size_t i = 0; i < pixels; ++i) {
            pa[i] = a.data[i * a.channels + c];
            pb[i] = b.data[i * b.channels + c];
            paa[i] = pa[i] * pa[i];
            pbb[i] = pb[i] * pb[i];
            pab[i] = pa[i] * pb[i];
        }
        const auto mu_a = filter_valid(pa, a.width, a.height, w);
        const auto mu_b = filter_valid(pb, a.width, a.height, w);
        const auto e_aa = filter_valid(paa, a.width, a.height, w);
        const auto e_bb = filter_valid(pbb, a.width, a.height, w);
        const auto e_ab = filter_valid(pab, a.width, a.height, w);
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double mab = mu_a[i] * mu_b[i];
            const double maa = mu_a[i] * mu_a[i];
            const double mbb = mu_b[i] * mu_b[i];
            const double var_a = e_aa[i] - maa;
            const double var_b = e_bb[i] - mbb;
            const double cov = e_ab[i] - mab;
            total += ((2.0 * mab + c1) * (2.0 * cov + c2)) / ((maa + mbb + c1) * (var_a + var_b + c2));
        }
        windows += mu_a.size();
    }
    return total / static_cast<double>(windows);
}

double cosine_similarity(std::span<const double> f1, std::span<const double> f2)
{
    if (f1.size() != f2.size()) {
        throw InputError("cosine_similarity: length mismatch");
    }
    const double dot = std::inner_product(f1.begin(), f1.end(), f2.begin(), 0.0);
    const double n1 = std::sqrt(std::inner_product(f1.begin(), f1.end(), f1.begin(), 0.0));
    const double n2 = std::sqrt(std::inner_product(f2.begin(), f2.end(), f2.begin(), 0.0));
    if (n1 == 0.0 || n2 == 0.0) {
        throw InputError("cosine_similarity: zero vector");
    }
    return std::clamp(dot / (n1 * n2), -1.0, 1.0);
}

std::vector<double> downsample_features(const Image& image, int cell)
{
    if (cell < 1) {
        throw InputError("downsample_features: cell must be positive");
    }
    const int ow = std::max(1, image.width / cell);
    const int oh = std::max(1, image.height / cell);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(ow) * oh * image.channels);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int c = 0; c < image.channels; ++c) {
                double sum = 0.0;
                int count = 0;
                for (int y = oy * cell; y < std::min(image.height, (oy + 1) * cell); ++y) {
                    for (int x = ox * cell; x < std::min(image.width, (ox + 1) * cell); ++x) {
                        sum += image(y, x, c);
                        ++count;
                    }
                }
                out.push_back(sum / count);
            }
        }
    }
    return out;
}

} // namespace uvtex
