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
#include "oracles.hpp"

#include "uvtex/blending.hpp"
#include "uvtex/error.hpp"
#include "uvtex/synthetic.hpp"
#include "uvtex/texture_fit.hpp"
#include "uvtex/uv_pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace uvtex;

namespace {

UVMap constant_map(int res, double v, int channels = 3)
{
    UVMap uv(res, channels);
    std::fill(uv.texels.data.begin(), uv.texels.data.end(), v);
    uv.valid = Mask(res, res, true);
    return uv;
}

UVMap smooth_map(oracle::Rng& rng, int res)
{
    UVMap uv(res);
    const double a = oracle::uniform(rng, 1.0, 4.0);
    const double b = oracle::uniform(rng, 1.0, 4.0);
    const double ph = oracle::uniform(rng, 0.0, 6.0);
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            for (int c = 0; c < 3; ++c) {
                uv(y, x, c) = 0.5 + 0.35 * std::sin(a * x / res * 3.0 + b * y / res * 3.0 + ph + c);
            }
        }
    }
    uv.valid = Mask(res, res, true);
    return uv;
}

double max_abs_difference(const UVMap& a, const UVMap& b, const Mask& where)
{
    double worst = 0.0;
    for (int y = 0; y < a.resolution(); ++y) {
        for (int x = 0; x < a.resolution(); ++x) {
            for (int c = 0; where(y, x) && c < a.channels(); ++c) {
                worst = std::max(worst, std::abs(a(y, x, c) - b(y, x, c)));
            }
        }
    }
    return worst;
}

/// Largest |f_p - f_q| over 4-neighbor pairs accepted by `pair`.
double max_first_difference(const UVMap& f, const std::function<bool(int, int, int, int)>& pair)
{
    double worst = 0.0;
    const int res = f.resolution();
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            for (const auto& [dy, dx] : {std::pair{0, 1}, std::pair{1, 0}}) {
                const int qy = y + dy;
                const int qx = x + dx;
                if (qy >= res || qx >= res || !pair(y, x, qy, qx)) {
                    continue;
                }
                for (int c = 0; c < f.channels(); ++c) {
                    worst = std::max(worst, std::abs(f(y, x, c) - f(qy, qx, c)));
                }
            }
        }
    }
    return worst;
}

} // namespace

TEST(PoissonBlend, SingleTexelHandSolution)
{
    UVMap target = constant_map(5, 0.0, 1);
    target(1, 2, 0) = 0.0;
    target(3, 2, 0) = 0.0;
    target(2, 1, 0) = 0.4;
    target(2, 3, 0) = 0.4;
    target(2, 2, 0) = 0.9;
    Mask region(5, 5);
    region.set(2, 2, true);
    const BlendResult r = poisson_blend(target, constant_map(5, 0.7, 1), region);
    EXPECT_NEAR(r.map(2, 2, 0), 0.2, 1e-12);
    EXPECT_EQ(r.unknowns, 1u);
}

TEST(PoissonBlend, UniquenessReproducesSource)
{
    oracle::Rng rng(41);
    for (int rep = 0; rep < 5; ++rep) {
        const UVMap source = smooth_map(rng, 48);
        const Mask region = oracle::random_region(rng, 48);
        UVMap target = source;
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 48; ++x) {
                for (int c = 0; region(y, x) && c < 3; ++c) {
                    target(y, x, c) = oracle::uniform(rng);
                }
            }
        }
        const BlendResult r = poisson_blend(target, source, region);
        EXPECT_LT(max_abs_difference(r.map, source, Mask(48, 48, true)), 1e-6);
    }
}

TEST(PoissonBlend, MaximumPrinciple)
{
    oracle::Rng rng(42);
    const Mask region = oracle::random_region(rng, 32, 2);
    EXPECT_LT(max_abs_difference(poisson_blend(constant_map(32, 0.3), constant_map(32, 0.9), region).map,
                                 constant_map(32, 0.3), Mask(32, 32, true)),
              1e-6);

    UVMap target = smooth_map(rng, 32);
    BlendOptions raw;
    raw.clamp = false;
    const BlendResult r = poisson_blend(target, constant_map(32, 0.5), region, raw);
    double lo = 1e9;
    double hi = -1e9;
    for (int y = 1; y < 31; ++y) {
        for (int x = 1; x < 31; ++x) {
            if (region(y, x)) {
                continue;
            }
            const bool boundary = region(y - 1, x) || region(y + 1, x) || region(y, x - 1) || region(y, x + 1);
            if (boundary) {
                lo = std::min(lo, target(y, x, 0));
                hi = std::max(hi, target(y, x, 0));
            }
        }
    }
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            if (region(y, x)) {
                EXPECT_GE(r.map(y, x, 0), lo - 1e-9);
                EXPECT_LE(r.map(y, x, 0), hi + 1e-9);
            }
        }
    }
}

TEST(PoissonBlend, ResidualAndOutsideUnchanged)
{
    oracle::Rng rng(43);
    BlendOptions raw;
    raw.clamp = false;
    for (int rep = 0; rep < 5; ++rep) {
        const UVMap target = smooth_map(rng, 64);
        const UVMap source = smooth_map(rng, 64);
        const Mask region = oracle::random_region(rng, 64, 4);
        const BlendResult r = poisson_blend(target, source, region, raw);
        EXPECT_LT(oracle::poisson_residual(r.map.texels, source.texels, region), 1e-6);
        EXPECT_LT(r.residual, 1e-6);
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                for (int c = 0; !region(y, x) && c < 3; ++c) {
                    EXPECT_EQ(r.map(y, x, c), target(y, x, c));
                }
            }
        }
    }
}

TEST(PoissonBlend, IdempotentAndClamped)
{
    oracle::Rng rng(44);
    const UVMap target = smooth_map(rng, 40);
    UVMap source = smooth_map(rng, 40);
    for (double& v : source.texels.data) {
        v = 3.0 * v - 1.0; // steep guidance pushes the solution out of range
    }
    const Mask region = oracle::random_region(rng, 40);
    const UVMap once = poisson_blend(target, source, region).map;
    for (double v : once.texels.data) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    BlendOptions raw;
    raw.clamp = false;
    const UVMap unclamped = poisson_blend(target, smooth_map(rng, 40), region, raw).map;
    const UVMap twice = poisson_blend(unclamped, unclamped, region, raw).map;
    EXPECT_LT(max_abs_difference(unclamped, twice, Mask(40, 40, true)), 1e-6);
}

TEST(PoissonBlend, EmptyRegionAndErrors)
{
    oracle::Rng rng(45);
    const UVMap target = smooth_map(rng, 16);
    const UVMap source = smooth_map(rng, 16);
    const BlendResult same = poisson_blend(target, source, Mask(16, 16));
    EXPECT_EQ(same.map.texels.data, target.texels.data);
    EXPECT_EQ(same.unknowns, 0u);

    Mask border(16, 16);
    border.set(0, 5, true);
    EXPECT_THROW(poisson_blend(target, source, border), InputError);

    Mask inner(16, 16);
    inner.set(5, 5, true);
    UVMap hole = target;
    hole.valid.set(5, 6, false);
    EXPECT_THROW(poisson_blend(hole, source, inner), InputError);
    EXPECT_THROW(poisson_blend(target, source, Mask(15, 15)), InputError);
    EXPECT_THROW(poisson_blend(target, UVMap(16, 1), inner), InputError);
}

TEST(BlendRegion, ErodesAndDropsIsolated)
{
    Mask valid(9, 9);
    for (int y = 1; y <= 5; ++y) {
        for (int x = 1; x <= 5; ++x) {
            valid.set(y, x, true);
        }
    }
    // A plus shape whose eroded core is a single texel.
    for (const auto& [y, x] : {std::pair{7, 7}, std::pair{6, 7}, std::pair{8, 7}, std::pair{7, 6}, std::pair{7, 8}}) {
        valid.set(y, x, true);
    }
    const Mask region = blend_region(valid);
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 9; ++x) {
            EXPECT_EQ(region(y, x), y >= 2 && y <= 4 && x >= 2 && x <= 4) << y << "," << x;
        }
    }
}

TEST(SymmetricFill, FullyValidUnchanged)
{
    oracle::Rng rng(46);
    const UVMap uv = smooth_map(rng, 24);
    const BlendResult r = symmetric_fill(uv);
    EXPECT_EQ(r.map.texels.data, uv.texels.data);
    EXPECT_EQ(r.map.valid, uv.valid);
}

TEST(SymmetricFill, ConstantLeftHalf)
{
    UVMap uv = constant_map(20, 0.35);
    for (int y = 0; y < 20; ++y) {
        for (int x = 10; x < 20; ++x) {
            uv.valid.set(y, x, false);
        }
    }
    uv.zero_invalid();
    const BlendResult r = symmetric_fill(uv);
    EXPECT_EQ(r.map.valid.count(), 400u);
    EXPECT_LT(max_abs_difference(r.map, constant_map(20, 0.35), Mask(20, 20, true)), 1e-9);
}

TEST(SymmetricFill, GradientBecomesMirrorSymmetric)
{
    for (int res : {20, 21}) {
        UVMap uv(res);
        for (int y = 0; y < res; ++y) {
            for (int x = 0; x < res; ++x) {
                const bool left = x <= (res - 1) / 2;
                for (int c = 0; c < 3; ++c) {
                    uv(y, x, c) = left ? 0.1 + 0.8 * x / res : 0.0;
                }
                uv.valid.set(y, x, left);
            }
        }
        const BlendResult r = symmetric_fill(uv);
        const UVMap mirrored = mirror_horizontal(r.map);
        double sum = 0.0;
        std::size_t n = 0;
        for (int y = 0; y < res; ++y) {
            for (int x = 0; x < res; ++x) {
                EXPECT_TRUE(r.map.valid(y, x));
                for (int c = 0; !uv.valid(y, x) && c < 3; ++c) {
                    sum += std::abs(r.map(y, x, c) - mirrored(y, x, c));
                    ++n;
                }
                for (int c = 0; uv.valid(y, x) && c < 3; ++c) {
                    EXPECT_EQ(r.map(y, x, c), uv(y, x, c));
                }
            }
        }
        ASSERT_GT(n, 0u);
        EXPECT_LT(sum / static_cast<double>(n), 1e-4);
    }
}

TEST(SymmetricFill, NeitherSideValidStaysInvalid)
{
    UVMap uv = constant_map(12, 0.5);
    for (int y = 0; y < 12; ++y) {
        uv.valid.set(y, 2, false);
        uv.valid.set(y, 9, false);
    }
    uv.zero_invalid();
    const BlendResult r = symmetric_fill(uv);
    EXPECT_EQ(r.map.valid, uv.valid);
}

TEST(PseudoUV, EmptyGtGivesBfm)
{
    oracle::Rng rng(47);
    const UVMap bfm = smooth_map(rng, 32);
    const PseudoUV p = make_pseudo_uv(UVMap(32), bfm);
    EXPECT_EQ(p.map.texels.data, bfm.texels.data);
    EXPECT_EQ(p.map.valid, bfm.valid);
}

TEST(PseudoUV, FullGtReproducedInInterior)
{
    oracle::Rng rng(48);
    const UVMap gt = smooth_map(rng, 48);
    UVMap bfm = smooth_map(rng, 48);
    // The model texture agrees with the observation on the outer ring only.
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 48; ++x) {
            const bool ring = y == 0 || x == 0 || y == 47 || x == 47;
            for (int c = 0; ring && c < 3; ++c) {
                bfm(y, x, c) = gt(y, x, c);
            }
        }
    }
    const PseudoUV p = make_pseudo_uv(gt, bfm);
    const Mask interior = erode_mask(Mask(48, 48, true), 1);
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 48; ++x) {
            for (int c = 0; interior(y, x) && c < 3; ++c) {
                sum += std::abs(p.map(y, x, c) - gt(y, x, c));
                ++n;
            }
        }
    }
    EXPECT_LT(sum / static_cast<double>(n), 1e-3);
    EXPECT_EQ(p.map.valid.count(), 48u * 48u);
}

TEST(PseudoUV, SyntheticSceneSeamAndCoverage)
{
    synthetic::SceneOptions opts;
    opts.yaw_degrees = 30.0;
    const synthetic::Scene scene = synthetic::make_scene(opts);
    const UVCapture cap = capture_uv(scene.image, scene.model, scene.params.alpha_id, scene.params.alpha_exp,
                                     scene.params.pose, 128, 2);
    const TextureFit fit = fit_texture(scene.model, cap.samples.colors, cap.samples.sampled,
                                       default_texture_lambda(scene.model, cap.samples.sampled));
    const UVMap bfm = texture_to_uv(scene.model, fit, 128);
    const PseudoUV p = make_pseudo_uv(cap.uv, bfm);

    EXPECT_EQ(p.map.valid, bfm.valid);
    EXPECT_LT(p.blend_residual, 1e-6);
    EXPECT_LT(p.fill_residual, 1e-6);

    const Mask& omega = p.region;
    const double seam = max_first_difference(p.map, [&](int y, int x, int qy, int qx) {
        return omega(y, x) != omega(qy, qx) && p.map.valid(y, x) && p.map.valid(qy, qx);
    });
    const double bfm_step = max_first_difference(bfm, [&](int y, int x, int qy, int qx) {
        return bfm.valid(y, x) && bfm.valid(qy, qx);
    });
    const double gt_step = max_first_difference(cap.uv, [&](int y, int x, int qy, int qx) {
        return cap.uv.valid(y, x) && cap.uv.valid(qy, qx);
    });
    EXPECT_LE(seam, bfm_step + gt_step);

    // The mirrored counterpart of the observed region now holds observed texture.
    const Mask counterpart = mirror_horizontal(omega) & bfm.valid;
    std::size_t changed = 0;
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) {
            if (counterpart(y, x) && !omega(y, x) && p.map(y, x, 0) != bfm(y, x, 0)) {
                ++changed;
            }
        }
    }
    EXPECT_GT(changed, 0u);
}
