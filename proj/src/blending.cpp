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
#include "uvtex/blending.hpp"

#include "uvtex/error.hpp"
#include "uvtex/uv_pipeline.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <string>

namespace uvtex {

namespace {

constexpr std::array<std::array<int, 2>, 4> kNeighbors = {{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

struct Texel
{
    int y;
    int x;
};

} // namespace

BlendResult poisson_blend(const UVMap& target, const UVMap& source, const Mask& region, const BlendOptions& options)
{
    const int res = target.resolution();
    const int channels = target.channels();
    if (source.resolution() != res || source.channels() != channels) {
        throw InputError("poisson_blend: source and target UV maps differ in shape");
    }
    if (region.width() != res || region.height() != res) {
        throw InputError("poisson_blend: region does not match the UV resolution");
    }

    BlendResult result;
    result.map = target;
    if (region.none()) {
        return result;
    }

    // Unknown numbering in scan order.
    std::vector<int> unknown(static_cast<std::size_t>(res) * res, -1);
    std::vector<Texel> texels;
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            if (region(y, x)) {
                unknown[static_cast<std::size_t>(y) * res + x] = static_cast<int>(texels.size());
                texels.push_back({y, x});
            }
        }
    }
    const auto id = [&](int y, int x) { return unknown[static_cast<std::size_t>(y) * res + x]; };

    // Stencil membership per texel and direction.
    const std::size_t n = texels.size();
    std::vector<std::array<bool, 4>> uses(n);
    std::vector<bool> anchored(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [y, x] = texels[i];
        if (options.strict_boundary && !source.valid(y, x)) {
            throw InputError("poisson_blend: source is invalid inside the region at texel (" + std::to_string(y) +
                             ", " + std::to_string(x) + ")");
        }
        for (int k = 0; k < 4; ++k) {
            const int qy = y + kNeighbors[k][0];
            const int qx = x + kNeighbors[k][1];
            bool use = false;
            if (region.contains(qy, qx)) {
                use = region(qy, qx) || target.valid(qy, qx);
                anchored[i] = anchored[i] || (!region(qy, qx) && use);
            }
            if (!use && options.strict_boundary) {
                throw InputError("poisson_blend: region texel (" + std::to_string(y) + ", " + std::to_string(x) +
                                 ") has no valid boundary value (grid border or invalid target)");
            }
            uses[i][k] = use;
        }
    }

    // Components with no Dirichlet neighbor have no unique solution; they take the source.
    std::vector<int> component(n, -1);
    std::vector<bool> component_anchored;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (component[seed] >= 0) {
            continue;
        }
        const int label = static_cast<int>(component_anchored.size());
        bool any = false;
        std::deque<std::size_t> queue{seed};
        component[seed] = label;
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            any = any || anchored[i];
            for (int k = 0; k < 4; ++k) {
                if (!uses[i][k]) {
                    continue;
                }
                const int qy = texels[i].y + kNeighbors[k][0];
                const int qx = texels[i].x + kNeighbors[k][1];
                const int j = id(qy, qx);
                if (j >= 0 && component[static_cast<std::size_t>(j)] < 0) {
                    component[static_cast<std::size_t>(j)] = label;
                    queue.push_back(static_cast<std::size_t>(j));
                }
            }
        }
        component_anchored.push_back(any);
    }

    // Solve only the anchored unknowns.
    std::vector<int> row_of(n, -1);
    int rows = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (component_anchored[static_cast<std::size_t>(component[i])]) {
            row_of[i] = rows++;
        }
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(rows) * 5);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rows, channels);
    for (std::size_t i = 0; i < n; ++i) {
        const int r = row_of[i];
        if (r < 0) {
            continue;
        }
        const auto [y, x] = texels[i];
        int degree = 0;
        for (int k = 0; k < 4; ++k) {
            if (!uses[i][k]) {
                continue;
            }
            ++degree;
            const int qy = y + kNeighbors[k][0];
            const int qx = x + kNeighbors[k][1];
            const int j = id(qy, qx);
            if (j >= 0) {
                triplets.emplace_back(r, row_of[static_cast<std::size_t>(j)], -1.0);
            }
            const bool guided = source.valid(y, x) && source.valid(qy, qx);
            for (int c = 0; c < channels; ++c) {
                if (j < 0) {
                    rhs(r, c) += target(qy, qx, c);
                }
                if (guided) {
                    rhs(r, c) += source(y, x, c) - source(qy, qx, c);
                }
            }
        }
        triplets.emplace_back(r, r, static_cast<double>(degree));
    }

    Eigen::MatrixXd solution = Eigen::MatrixXd::Zero(rows, channels);
    if (rows > 0) {
        Eigen::SparseMatrix<double> a(rows, rows);
        a.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setMaxIterations(10 * res * res);
        cg.compute(a);
        if (cg.info() != Eigen::Success) {
            throw NumericalError("poisson_blend: cannot set up the Poisson system");
        }
        for (int c = 0; c < channels; ++c) {
            const Eigen::VectorXd b = rhs.col(c);
            const double bnorm = b.norm();
            if (bnorm == 0.0) {
                continue;
            }
            cg.setTolerance(options.residual_tolerance / bnorm);
            solution.col(c) = cg.solve(b);
            result.iterations = std::max(result.iterations, static_cast<int>(cg.iterations()));
            const double residual = (a * solution.col(c) - b).lpNorm<Eigen::Infinity>();
            result.residual = std::max(result.residual, residual);
        }
        if (!solution.allFinite() || !(result.residual < 1e-6)) {
            throw NumericalError("poisson_blend: solver residual " + std::to_string(result.residual) +
                                 " exceeds 1e-6");
        }
    }
    result.unknowns = static_cast<std::size_t>(rows);

    for (std::size_t i = 0; i < n; ++i) {
        const auto [y, x] = texels[i];
        for (int c = 0; c < channels; ++c) {
            double v = row_of[i] >= 0 ? solution(row_of[i], c) : source(y, x, c);
            if (options.clamp) {
                v = std::clamp(v, 0.0, 1.0);
            }
            result.map(y, x, c) = v;
        }
        result.map.valid.set(y, x, true);
    }
    return result;
}

Mask blend_region(const Mask& valid)
{
    Mask inner(valid.width(), valid.height());
    for (int y = 0; y < valid.height(); ++y) {
        for (int x = 0; x < valid.width(); ++x) {
            bool keep = valid(y, x);
            for (const auto& d : kNeighbors) {
                const int qy = y + d[0];
                const int qx = x + d[1];
                keep = keep && valid.contains(qy, qx) && valid(qy, qx);
            }
            inner.set(y, x, keep);
        }
    }
    Mask out = inner;
    for (int y = 0; y < inner.height(); ++y) {
        for (int x = 0; x < inner.width(); ++x) {
            if (!inner(y, x)) {
                continue;
            }
            bool isolated = true;
            for (const auto& d : kNeighbors) {
                const int qy = y + d[0];
                const int qx = x + d[1];
                isolated = isolated && !(inner.contains(qy, qx) && inner(qy, qx));
            }
            if (isolated) {
                out.set(y, x, false);
            }
        }
    }
    return out;
}

BlendResult symmetric_fill(const UVMap& uv, const std::optional<Mask>& real)
{
    const Mask real_region = real ? *real : uv.valid;
    if (!real_region.same_shape(uv.valid)) {
        throw InputError("symmetric_fill: real-texture mask does not match the UV map");
    }
    const Mask mirrored_real = mirror_horizontal(real_region);
    Mask fill(uv.resolution(), uv.resolution());
    for (int y = 0; y < uv.resolution(); ++y) {
        for (int x = 0; x < uv.resolution(); ++x) {
            fill.set(y, x, !real_region(y, x) && mirrored_real(y, x) && (real ? uv.valid(y, x) : !uv.valid(y, x)));
        }
    }

    UVMap source = mirror_horizontal(uv);
    source.valid = mirrored_real;

    // Texels to be filled must not act as Dirichlet values.
    UVMap target = uv;
    for (int y = 0; y < uv.resolution(); ++y) {
        for (int x = 0; x < uv.resolution(); ++x) {
            if (fill(y, x)) {
                target.valid.set(y, x, false);
            }
        }
    }
    BlendOptions options;
    options.strict_boundary = false;
    BlendResult result = poisson_blend(target, source, fill, options);
    result.map.valid = uv.valid | fill;
    return result;
}

PseudoUV make_pseudo_uv(const UVMap& uv_gt, const UVMap& uv_bfm)
{
    if (uv_gt.resolution() != uv_bfm.resolution() || uv_gt.channels() != uv_bfm.channels()) {
        throw InputError("make_pseudo_uv: uv_gt and uv_bfm differ in shape");
    }
    PseudoUV out;
    out.region = blend_region(uv_gt.valid);
    // Keep the strict contract but never let a region texel sit next to a texel the
    // fitted texture does not cover.
    const Mask region = out.region & erode_mask(uv_bfm.valid, 1);
    out.region = region;
    const BlendResult blended = poisson_blend(uv_bfm, uv_gt, region);
    out.blend_residual = blended.residual;
    const BlendResult filled = symmetric_fill(blended.map, region);
    out.fill_residual = filled.residual;
    out.map = filled.map;
    return out;
}

} // namespace uvtex
