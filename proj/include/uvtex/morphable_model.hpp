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

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace uvtex {

using Triangle = std::array<int, 3>;

inline constexpr int kIdentityDims = 40;
inline constexpr int kExpressionDims = 10;

/**
 * A linear 3D morphable model with a fixed UV parameterisation.
 *
 * Shape and texture vectors have 3N rows, interleaved per vertex (x, y, z or
 * r, g, b). Texture values live in [0, 1]. UV coordinates are in [0, 1]^2 with
 * u growing to the right and v growing downward, so that texel (row, col) of an
 * R x R atlas is centered at uv ((col + 0.5) / R, (row + 0.5) / R).
 */
struct MorphableModel
{
    Eigen::VectorXd mean_shape;
    Eigen::MatrixXd id_basis;
    Eigen::MatrixXd exp_basis;
    Eigen::VectorXd mean_texture;
    Eigen::MatrixXd tex_basis;
    std::vector<Triangle> triangles;
    Eigen::MatrixX2d uv_coords;
    /// Several vertices may share a uv pair (seams). Stored as a container flag.
    bool uv_duplicates_allowed = false;

    int num_vertices() const noexcept { return static_cast<int>(uv_coords.rows()); }
    int num_triangles() const noexcept { return static_cast<int>(triangles.size()); }
    int identity_dims() const noexcept { return static_cast<int>(id_basis.cols()); }
    int expression_dims() const noexcept { return static_cast<int>(exp_basis.cols()); }
    int texture_dims() const noexcept { return static_cast<int>(tex_basis.cols()); }

    /// Throws ModelError on the first violated invariant.
    void validate() const;
};

/**
 * Weak-perspective pose: rotation, translation in model units and a scale that
 * maps model units to pixels.
 */
struct Pose
{
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double scale = 1.0;

    /// Throws InputError unless rotation is a proper rotation (1e-6) and scale > 0.
    void validate() const;
};

/// R = Rz(roll) * Rx(pitch) * Ry(yaw), angles in radians.
Eigen::Matrix3d rotation_from_euler(double yaw, double pitch, double roll);

struct Vertices
{
    Eigen::MatrixX3d positions;
};

/**
 * Orthographic projection result. `points` are continuous pixel coordinates
 * (pixel (i, j) has its center at (j + 0.5, i + 0.5)); `depth` grows toward
 * the viewer, so the depth buffer keeps the maximum.
 */
struct ProjectedVertices
{
    Eigen::MatrixX2d points;
    Eigen::VectorXd depth;

    int size() const noexcept { return static_cast<int>(points.rows()); }
};

/**
 * Reads the binary container described in docs/model_format.md. Throws
 * ModelError with a code identifying the failure.
 */
MorphableModel load_model(const std::filesystem::path& path);
void save_model(const MorphableModel& model, const std::filesystem::path& path);

/// mean_shape + id_basis * alpha_id + exp_basis * alpha_exp, reshaped to N x 3.
Vertices synthesize_shape(const MorphableModel& model, const Eigen::VectorXd& alpha_id,
                          const Eigen::VectorXd& alpha_exp);

/// scale * (R * S^T + t): rows 0-1 are the image point, row 2 the depth.
ProjectedVertices project(const Vertices& vertices, const Pose& pose);

} // namespace uvtex
