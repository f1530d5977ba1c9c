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
#include "uvtex/params_io.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

// Small synthetic face stand-ins with exactly known geometry and texture.
namespace uvtex::synthetic {

struct Mesh
{
    Eigen::MatrixX3d positions;
    std::vector<Triangle> triangles;
};

/// Closed unit icosphere. subdivisions = 0 is the icosahedron.
Mesh icosphere(int subdivisions);

/**
 * Unit icosphere with every triangle that reaches beyond `cap_degrees` from
 * the +z pole removed, plus an azimuthal uv layout centered on +z. The layout
 * maps x -> u and y -> v, so the mesh's x mirror symmetry is the uv map's
 * left-right symmetry.
 */
struct OpenSphere
{
    Mesh mesh;
    Eigen::MatrixX2d uv;
};
OpenSphere open_sphere(int subdivisions, double cap_degrees = 135.0);

struct ModelOptions
{
    int subdivisions = 3;
    int texture_dims = 10;
    double cap_degrees = 135.0;
    std::uint64_t seed = 7;
};

/// Morphable model on an open sphere: radial identity/expression bases and a smooth texture basis.
MorphableModel make_model(const ModelOptions& options = {});

struct SceneOptions
{
    ModelOptions model;
    int width = 64;
    int height = 64;
    double yaw_degrees = 20.0;
    double pitch_degrees = 0.0;
    double fill = 0.42;           ///< sphere radius as a fraction of the image width
    double shape_amplitude = 0.5; ///< scale of the random identity/expression coefficients
    double tex_amplitude = 1.0;   ///< scale of the true texture coefficients
    double detail = 0.05;         ///< texture component outside the model's span
    bool mirror_symmetric = false; ///< texture even in x (coefficients and detail zeroed)
};

struct Scene
{
    SceneOptions options;
    MorphableModel model;
    FaceParams params;
    Eigen::VectorXd tex_params;
    Image image; ///< masked to the rendered silhouette, background 0
};

Scene make_scene(const SceneOptions& options = {});

/// Pose that centers the unit sphere in a width x height frame at the given angles.
Pose centered_pose(int width, int height, double fill, double yaw_degrees, double pitch_degrees = 0.0);

/// Scene texture at a unit direction of the reference sphere.
Eigen::Vector3d scene_texture(const Scene& scene, const Eigen::Vector3d& direction);

/// Renders the scene's true texture under an arbitrary pose (per-pixel evaluation).
Image render_scene(const Scene& scene, const Pose& pose);

/// Writes model.uvmm, image.png and params.txt into `dir`.
void write_scene(const Scene& scene, const std::filesystem::path& dir);

} // namespace uvtex::synthetic
