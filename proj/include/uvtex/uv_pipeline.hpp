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
#include "uvtex/rasterizer.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace uvtex {

/**
 * Per-texel source coordinates for grid sampling, normalized to [-1, 1]^2.
 * (-1, -1) is the center of the top-left source pixel and (+1, +1) the center
 * of the bottom-right one. Entry order is (x, y).
 */
struct SamplingGrid
{
    int resolution = 0;
    std::vector<double> coords; ///< resolution^2 * 2
    Mask valid;

    SamplingGrid() = default;
    explicit SamplingGrid(int resolution);

    double& x(int row, int col) { return coords[2 * index(row, col)]; }
    double& y(int row, int col) { return coords[2 * index(row, col) + 1]; }
    double x(int row, int col) const { return coords[2 * index(row, col)]; }
    double y(int row, int col) const { return coords[2 * index(row, col) + 1]; }

    std::size_t index(int row, int col) const noexcept
    {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(col);
    }
};

/// Grid that maps texel (row, col) to source pixel (row, col) of an equally sized image.
SamplingGrid identity_grid(int resolution);

/// Coverage of the triangles whose three vertices are all visible.
Mask build_face_mask(const ProjectedVertices& projected, std::span<const Triangle> triangles,
                     const VisibilityMask& visibility, int width, int height);

/// Binary erosion with a Euclidean disk of the given radius. Pixels outside the frame count as false.
Mask erode_mask(const Mask& mask, int radius);

/// ceil(2% of the image width).
int default_erosion_radius(int image_width);

struct VertexSamples
{
    Eigen::MatrixXd colors; ///< N x channels, zero where not sampled
    VisibilityMask sampled;
};

/**
 * Bilinear image lookup at every visible vertex whose projection falls on a
 * true face-mask pixel. Every other vertex gets color 0 and sampled = false.
 */
VertexSamples sample_vertex_colors(const Image& image, const ProjectedVertices& projected,
                                   const VisibilityMask& visibility, const Mask& face_mask);

/// Rasterizes uv_coords * resolution. Depth is zero, so the lower triangle index wins overlaps.
RasterBuffers rasterize_uv(const Eigen::MatrixX2d& uv_coords, std::span<const Triangle> triangles, int resolution);

/**
 * Renders per-vertex colors into UV space. A texel is valid iff its triangle
 * has all three vertices sampled; invalid texels are zero.
 */
UVMap render_uv(const Eigen::MatrixXd& colors, const VisibilityMask& sampled, const Eigen::MatrixX2d& uv_coords,
                std::span<const Triangle> triangles, int resolution);

/**
 * The sampling grid a UV attention sampler is trained to produce: the
 * projected image position of each texel's surface point, normalized.
 */
SamplingGrid grid_from_projection(const ProjectedVertices& projected, const VisibilityMask& sampled,
                                  const Eigen::MatrixX2d& uv_coords, std::span<const Triangle> triangles,
                                  int resolution, int image_width, int image_height);

/// Bilinear sampling with border clamping. Invalid grid entries give invalid, zero texels.
UVMap grid_sample(const Image& image, const SamplingGrid& grid);

struct GridSampleGradients
{
    Image d_image;               ///< same shape as the input image, no mask
    std::vector<double> d_grid;  ///< same layout as SamplingGrid::coords
};

/// Exact gradients of grid_sample. `upstream` has the shape of the grid_sample output.
GridSampleGradients grid_sample_backward(const Image& image, const SamplingGrid& grid, const Image& upstream);

/// Intermediate products of the incomplete UV map construction.
struct UVCapture
{
    Vertices vertices;
    ProjectedVertices projected;
    VisibilityMask visible;
    Mask face_mask;       ///< before erosion
    Mask eroded_mask;
    VertexSamples samples;
    UVMap uv;
};

/**
 * Shape synthesis, projection, visibility, face mask, erosion, vertex color
 * sampling and UV rendering, in that order.
 */
UVCapture capture_uv(const Image& image, const MorphableModel& model, const Eigen::VectorXd& alpha_id,
                     const Eigen::VectorXd& alpha_exp, const Pose& pose, int resolution, int erosion_radius);

UVMap make_uv_gt(const Image& image, const MorphableModel& model, const Eigen::VectorXd& alpha_id,
                 const Eigen::VectorXd& alpha_exp, const Pose& pose, int resolution, int erosion_radius);

/**
 * Renders a mesh textured by a UV map: per-pixel uv from barycentric
 * interpolation, then a bilinear texel lookup. A pixel is valid when it is
 * covered and every texel with nonzero bilinear weight is valid.
 */
Image render_textured(const ProjectedVertices& projected, std::span<const Triangle> triangles,
                      const Eigen::MatrixX2d& uv_coords, const UVMap& uv, int width, int height);

} // namespace uvtex
