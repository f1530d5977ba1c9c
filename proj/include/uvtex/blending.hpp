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

#include <optional>

namespace uvtex {

struct BlendOptions
{
    /// Require every 4-neighbor of the region to exist and, outside the region, to be valid in the target.
    /// When false such neighbors are dropped from the stencil (zero-flux boundary).
    bool strict_boundary = true;
    /// Clamp the solved texels to [0, 1].
    bool clamp = true;
    /// CG stops once ||A f - b||_2 falls below this (absolute, per channel).
    double residual_tolerance = 1e-10;
};

struct BlendResult
{
    UVMap map;
    double residual = 0.0;  ///< max over channels of ||A f - b||_inf, before clamping
    int iterations = 0;     ///< max over channels
    std::size_t unknowns = 0;
};

/**
 * Gradient-domain blend: inside `region` solve the discrete Poisson equation
 *
 *   sum_{q in N(p)} (f_p - f_q) = sum_{q in N(p)} (s_p - s_q)
 *
 * with f_q = target_q for neighbors outside the region (Dirichlet boundary)
 * and s the source map. Pairs where the source is invalid contribute no
 * guidance. Outside the region the result equals the target.
 *
 * Connected components of the region without any Dirichlet neighbor (only
 * possible with strict_boundary = false) take the source values directly.
 *
 * Throws InputError on shape mismatches or, in strict mode, on a region that
 * touches the grid border or an invalid target texel. Throws NumericalError
 * if the solver residual exceeds 1e-6.
 */
BlendResult poisson_blend(const UVMap& target, const UVMap& source, const Mask& region,
                          const BlendOptions& options = {});

/// Blend region for a valid mask: erosion by one texel (4-neighborhood), isolated texels dropped.
Mask blend_region(const Mask& valid);

/**
 * Mirror fill about the vertical centerline (column x <-> R-1-x).
 *
 * With no `real` mask the fill set is every invalid texel whose mirror is
 * valid; these become valid and valid texels are left untouched. With a
 * `real` mask (texels holding observed texture) the fill set is every valid
 * texel outside `real` whose mirror is in `real`, so observed texture
 * replaces model texture on the occluded side.
 *
 * The mirrored map is blended into the fill set with poisson_blend in
 * non-strict mode; only mirrored texels from the real set guide the solve.
 */
BlendResult symmetric_fill(const UVMap& uv, const std::optional<Mask>& real = std::nullopt);

struct PseudoUV
{
    UVMap map;
    Mask region;              ///< blend region taken from uv_gt
    double blend_residual = 0.0;
    double fill_residual = 0.0;
};

/**
 * Pseudo ground truth: blend uv_gt into uv_bfm over blend_region(uv_gt.valid),
 * then mirror-fill the occluded counterpart of that region.
 */
PseudoUV make_pseudo_uv(const UVMap& uv_gt, const UVMap& uv_bfm);

} // namespace uvtex
