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

#include "uvtex/error.hpp"
#include "uvtex/synthetic.hpp"
#include "uvtex/texture_fit.hpp"
#include "uvtex/uv_pipeline.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include <limits>

using namespace uvtex;

namespace {

struct System
{
    Eigen::MatrixXd w;
    Eigen::VectorXd mean;
    Eigen::VectorXd c;
    std::vector<bool> mask;
    Eigen::VectorXd m;
};

System random_system(oracle::Rng& rng, int rows, int k, double keep = 0.7)
{
    System s;
    s.w = oracle::random_matrix(rng, rows, k);
    s.mean = oracle::random_matrix(rng, rows, 1, 0.0, 1.0);
    s.c = oracle::random_matrix(rng, rows, 1, 0.0, 1.0);
    s.mask.resize(static_cast<std::size_t>(rows));
    s.m.resize(rows);
    for (int i = 0; i < rows; ++i) {
        s.mask[static_cast<std::size_t>(i)] = oracle::uniform(rng) < keep;
        s.m(i) = s.mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    return s;
}

double objective(const System& s, const Eigen::VectorXd& p, double lambda, bool use_mean)
{
    const Eigen::VectorXd target = use_mean ? Eigen::VectorXd(s.c - s.mean) : s.c;
    return (s.m.asDiagonal() * (target - s.w * p)).squaredNorm() + lambda * p.squaredNorm();
}

Eigen::MatrixXd one(double v)
{
    return Eigen::MatrixXd::Constant(1, 1, v);
}

} // namespace

TEST(FitTexture, ScalarCases)
{
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    EXPECT_NEAR(fit_texture(one(1.0), zero, Eigen::VectorXd::Constant(1, 0.6), {true}, 0.0, false).params(0), 0.6, 1e-15);
    EXPECT_NEAR(fit_texture(one(1.0), zero, Eigen::VectorXd::Constant(1, 1.0), {true}, 1.0, false).params(0), 0.5, 1e-15);
    // With the mean: c' = 1 - 0.4.
    EXPECT_NEAR(fit_texture(one(1.0), Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, 1.0), {true}, 0.0)
                    .params(0),
                0.6, 1e-15);
}

TEST(FitTexture, AllMaskedOutGivesZero)
{
    oracle::Rng rng(31);
    const System s = random_system(rng, 12, 4, 0.0);
    const TextureFit fit = fit_texture(s.w, s.mean, s.c, s.mask, 0.3);
    EXPECT_EQ(fit.params.norm(), 0.0);
    EXPECT_EQ(fit.residual, 0.0);
}

TEST(FitTexture, Errors)
{
    oracle::Rng rng(32);
    const System s = random_system(rng, 12, 4);
    std::vector<bool> few(12, false);
    few[0] = few[1] = few[2] = true;
    EXPECT_THROW(fit_texture(s.w, s.mean, s.c, few, 0.0), NumericalError);
    EXPECT_NO_THROW(fit_texture(s.w, s.mean, s.c, few, 0.1));

    Eigen::MatrixXd dup = s.w;
    dup.col(1) = dup.col(0);
    EXPECT_THROW(fit_texture(dup, s.mean, s.c, std::vector<bool>(12, true), 0.0), NumericalError);

    EXPECT_THROW(fit_texture(s.w, s.mean, s.c, s.mask, -1.0), InputError);
    Eigen::VectorXd bad = s.c;
    bad(3) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(fit_texture(s.w, s.mean, bad, s.mask, 0.1), InputError);
    EXPECT_THROW(fit_texture(s.w, s.mean, s.c, std::vector<bool>(11, true), 0.1), InputError);
}

TEST(FitTexture, LocalOptimalityProbe)
{
    oracle::Rng rng(33);
    const System s = random_system(rng, 30, 5);
    const TextureFit fit = fit_texture(s.w, s.mean, s.c, s.mask, 0.1, false);
    const double best = objective(s, fit.params, 0.1, false);
    EXPECT_NEAR(fit.residual, best - 0.1 * fit.params.squaredNorm(), 1e-12);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 1000; ++i) {
        Eigen::VectorXd d(5);
        for (int k = 0; k < 5; ++k) {
            d(k) = normal(rng);
        }
        d *= 1e-3 / d.norm();
        EXPECT_LE(best, objective(s, fit.params + d, 0.1, false));
    }
}

TEST(FitTexture, GradientVanishes)
{
    oracle::Rng rng(34);
    for (int rep = 0; rep < 20; ++rep) {
        const int rows = 3 * (5 + static_cast<int>(oracle::uniform(rng, 0, 95)));
        const int k = 1 + static_cast<int>(oracle::uniform(rng, 0, 20));
        const System s = random_system(rng, rows, k);
        const double lambda = oracle::uniform(rng, 1e-3, 2.0);
        const TextureFit fit = fit_texture(s.w, s.mean, s.c, s.mask, lambda);
        const Eigen::VectorXd rhs = s.w.transpose() * s.m.asDiagonal() * (s.c - s.mean);
        const Eigen::VectorXd grad = 2.0 * (s.w.transpose() * s.m.asDiagonal() * s.w) * fit.params +
                                     2.0 * lambda * fit.params - 2.0 * rhs;
        EXPECT_LT(grad.norm(), 1e-8 * rhs.norm());
    }
}

TEST(FitTexture, NormShrinksWithLambda)
{
    oracle::Rng rng(35);
    const System s = random_system(rng, 60, 8);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
        const double norm = fit_texture(s.w, s.mean, s.c, s.mask, lambda).params.norm();
        EXPECT_LE(norm, prev * (1.0 + 1e-12)) << "lambda " << lambda;
        prev = norm;
    }
}

TEST(FitTexture, ExactRecovery)
{
    oracle::Rng rng(36);
    for (int rep = 0; rep < 20; ++rep) {
        System s = random_system(rng, 90, 12);
        const Eigen::VectorXd planted = oracle::random_matrix(rng, 12, 1);
        s.c = s.mean + s.w * planted;
        // Unmasked entries carry garbage that must be ignored.
        for (int i = 0; i < 90; ++i) {
            if (!s.mask[static_cast<std::size_t>(i)]) {
                s.c(i) = 7.0;
            }
        }
        const TextureFit fit = fit_texture(s.w, s.mean, s.c, s.mask, 0.0);
        EXPECT_LT((fit.params - planted).norm(), 1e-8 * planted.norm());
        EXPECT_LT(fit.residual, 1e-20);
    }
}

TEST(FitTexture, ModelWrapperExpandsMask)
{
    oracle::Rng rng(37);
    const MorphableModel model = synthetic::make_model({.subdivisions = 1, .texture_dims = 6});
    const int n = model.num_vertices();
    const Eigen::MatrixXd colors = oracle::random_matrix(rng, n, 3, 0.0, 1.0);
    VisibilityMask mask(static_cast<std::size_t>(n));
    std::vector<bool> rows(static_cast<std::size_t>(3 * n));
    Eigen::VectorXd flat(3 * n);
    for (int v = 0; v < n; ++v) {
        mask[static_cast<std::size_t>(v)] = v % 3 != 0;
        for (int c = 0; c < 3; ++c) {
            rows[static_cast<std::size_t>(3 * v + c)] = mask[static_cast<std::size_t>(v)];
            flat(3 * v + c) = colors(v, c);
        }
    }
    const TextureFit a = fit_texture(model, colors, mask, 0.01);
    const TextureFit b = fit_texture(model.tex_basis, model.mean_texture, flat, rows, 0.01);
    EXPECT_LT((a.params - b.params).norm(), 1e-14);

    Eigen::MatrixXd wmw = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 3 * n; ++i) {
        if (rows[static_cast<std::size_t>(i)]) {
            wmw += model.tex_basis.row(i).transpose() * model.tex_basis.row(i);
        }
    }
    EXPECT_NEAR(default_texture_lambda(model, mask), 1e-3 * wmw.trace() / 6.0, 1e-15);
}

TEST(TextureToUV, ZeroParams)
{
    const MorphableModel model = synthetic::make_model({.subdivisions = 2, .texture_dims = 4});
    TextureFit zero;
    zero.params = Eigen::VectorXd::Zero(4);
    const UVMap with_mean = texture_to_uv(model, zero, 32, true);
    const VisibilityMask all(static_cast<std::size_t>(model.num_vertices()), true);
    const Eigen::MatrixXd mean = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(
        model.mean_texture.data(), model.num_vertices(), 3);
    const UVMap expected = render_uv(mean, all, model.uv_coords, model.triangles, 32);
    EXPECT_EQ(with_mean.valid, expected.valid);
    EXPECT_EQ(with_mean.valid, rasterize_uv(model.uv_coords, model.triangles, 32).coverage());
    for (std::size_t i = 0; i < expected.texels.data.size(); ++i) {
        EXPECT_NEAR(with_mean.texels.data[i], expected.texels.data[i], 1e-15);
    }
    const UVMap black = texture_to_uv(model, zero, 32, false);
    EXPECT_EQ(black.valid, expected.valid);
    for (double v : black.texels.data) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(TextureToUV, ExactRecoveryOfSynthesizingMap)
{
    const MorphableModel model = synthetic::make_model({.subdivisions = 2, .texture_dims = 8});
    oracle::Rng rng(38);
    const Eigen::VectorXd planted = oracle::random_matrix(rng, 8, 1, -0.5, 0.5);
    const Eigen::MatrixXd colors = texture_colors(model, planted);
    ASSERT_GT(colors.minCoeff(), 0.0);
    ASSERT_LT(colors.maxCoeff(), 1.0);
    VisibilityMask mask(static_cast<std::size_t>(model.num_vertices()));
    for (std::size_t v = 0; v < mask.size(); ++v) {
        mask[v] = v % 2 == 0;
    }
    const TextureFit fit = fit_texture(model, colors, mask, 0.0);
    TextureFit truth;
    truth.params = planted;
    const UVMap a = texture_to_uv(model, fit, 64);
    const UVMap b = texture_to_uv(model, truth, 64);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.texels.data.size(); ++i) {
        worst = std::max(worst, std::abs(a.texels.data[i] - b.texels.data[i]));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(TextureColors, Clamped)
{
    const MorphableModel model = synthetic::make_model({.subdivisions = 1, .texture_dims = 2});
    const Eigen::MatrixXd c = texture_colors(model, Eigen::VectorXd::Constant(2, 1000.0));
    EXPECT_GE(c.minCoeff(), 0.0);
    EXPECT_LE(c.maxCoeff(), 1.0);
    EXPECT_THROW(texture_colors(model, Eigen::VectorXd::Zero(3)), InputError);
}

TEST(TextureFitFile, RoundTrip)
{
    oracle::TempDir dir("fitfile");
    TextureFit fit;
    fit.params = Eigen::VectorXd::LinSpaced(7, -1.0 / 3.0, 2.0 / 7.0);
    fit.lambda = 1.0 / 9.0;
    fit.residual = 0.123456789012345678;
    write_texture_fit(fit, dir / "fit.txt");
    const TextureFit back = read_texture_fit(dir / "fit.txt");
    EXPECT_EQ(back.params, fit.params);
    EXPECT_EQ(back.lambda, fit.lambda);
    EXPECT_EQ(back.residual, fit.residual);
    std::ofstream(dir / "bad.txt") << "# texture_fit\nlambda 1\nresidual 0\nparams 3\n1\n2\n";
    EXPECT_THROW(read_texture_fit(dir / "bad.txt"), InputError);
}
