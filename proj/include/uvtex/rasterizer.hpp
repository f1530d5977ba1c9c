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
#include "uvtex/morphable_model.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace uvtex {

/// Per-vertex flags; true = visible (or, for sample masks, sampled).
using VisibilityMask = std::vector<bool>;

inline constexpr int kBackground = -1;

/**
 * Output of the rasterizer: for each pixel the frontmost triangle, its
 * barycentric weights at the pixel center and the interpolated depth.
 */
struct RasterBuffers
{
    int width = 0;
    int height = 0;
    std::vector<int> tri_index;               ///< kBackground where uncovered
    std::vector<std::array<double, 3>> bary;  ///< zero where uncovered
    std::vector<double> depth;                ///< -inf where uncovered

    std::size_t index(int y, int x) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
    bool covered(int y, int x) const noexcept { return tri_index[index(y, x)] != kBackground; }
    Mask coverage() const;
};

/**
 * Depth-buffered rasterization at pixel centers.
 *
 * A pixel is covered when its center lies inside or on the boundary of a
 * triangle. The larger depth wins; on exact ties the lower triangle index
 * wins. Zero-area triangles are skipped.
 */
RasterBuffers rasterize(const ProjectedVertices& projected, std::span<const Triangle> triangles, int width,
                        int height);

/// Barycentric interpolation of per-vertex attributes (N x C). Background pixels are 0 and masked out.
Image shade(const RasterBuffers& buffers, const Eigen::MatrixXd& colors, std::span<const Triangle> triangles);

/**
 * Adjoint of shade(): accumulates w_i * upstream into the three vertices of
 * each covered pixel's triangle. Returns an N x C matrix.
 */
Eigen::MatrixXd shade_backward(const RasterBuffers& buffers, std::span<const Triangle> triangles,
                               const Image& upstream, int num_vertices);

/**
 * Depth-buffer visibility. The depth buffer is sampled at each vertex's own
 * projected position; a vertex is visible when no other triangle covering
 * that position is nearer than its depth by more than
 * 1e-4 * (depth extent of the mesh). Vertices projecting outside the frame
 * are invisible.
 */
VisibilityMask visible_vertices(const ProjectedVertices& projected, std::span<const Triangle> triangles, int width,
                                int height);
VisibilityMask visible_vertices(const Vertices& vertices, const Pose& pose, std::span<const Triangle> triangles,
                                int width, int height);

} // namespace uvtex
