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
#include "uvtex/synthetic.hpp"

#include "uvtex/error.hpp"
#include "uvtex/image_io.hpp"
#include "uvtex/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <utility>

namespace uvtex::synthetic {

namespace fs = std::filesystem;

namespace {

struct Wave
{
    Eigen::Vector3d freq;
    double phase = 0.0;

    double operator()(const Eigen::Vector3d& d) const { return std::sin(freq.dot(d) + phase); }
};

struct Fields
{
    std::vector<Wave> identity;
    std::vector<Wave> expression;
    std::vector<Wave> texture;
    std::vector<Eigen::Vector3d> texture_gain; ///< per-channel amplitude of each texture column
};

Fields make_fields(const ModelOptions& options)
{
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> freq(-2.5, 2.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> gain(0.02, 0.05);
    const auto wave = [&] { return Wave{Eigen::Vector3d(freq(rng), freq(rng), freq(rng)), phase(rng)}; };
    Fields f;
    for (int k = 0; k < kIdentityDims; ++k) {
        f.identity.push_back(wave());
    }
    for (int k = 0; k < kExpressionDims; ++k) {
        f.expression.push_back(wave());
    }
    for (int k = 0; k < options.texture_dims; ++k) {
        f.texture.push_back(wave());
        f.texture_gain.emplace_back(gain(rng), gain(rng), gain(rng));
    }
    return f;
}

Eigen::Vector3d mean_color(const Eigen::Vector3d& d)
{
    // Even in x, so the mean texture is mirror symmetric.
    const double band = 0.08 * std::cos(2.2 * d.y());
    const double cheek = 0.05 * std::cos(3.0 * d.x());
    return Eigen::Vector3d(0.62 + band + cheek, 0.46 + 0.8 * band + 0.6 * cheek, 0.38 + 0.7 * band + 0.5 * cheek);
}

Eigen::Vector3d texture_column(const Fields& f, int k, const Eigen::Vector3d& d)
{
    return f.texture_gain[static_cast<std::size_t>(k)] * f.texture[static_cast<std::size_t>(k)](d);
}

Eigen::Vector3d detail_color(const Eigen::Vector3d& d)
{
    const double v = std::sin(5.0 * d.x() + 1.0) * std::cos(4.0 * d.y());
    return Eigen::Vector3d(v, 0.7 * v, 0.9 * v);
}

Eigen::Vector3d texture_value(const Scene& scene, const Fields& f, const Eigen::Vector3d& d)
{
    Eigen::Vector3d c = mean_color(d) + scene.options.detail * detail_color(d);
    for (Eigen::Index k = 0; k < scene.tex_params.size(); ++k) {
        c += scene.tex_params(k) * texture_column(f, static_cast<int>(k), d);
    }
    return c.cwiseMax(0.0).cwiseMin(1.0);
}

Eigen::Vector3d direction(const Eigen::Vector3d& p)
{
    const double n = p.norm();
    return n > 0.0 ? Eigen::Vector3d(p / n) : Eigen::Vector3d(0.0, 0.0, 1.0);
}

} // namespace

Mesh icosphere(int subdivisions)
{
    if (subdivisions < 0) {
        throw InputError("icosphere: subdivisions must be non-negative");
    }
    const double phi = std::numbers::phi;
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
        {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : verts) {
        v.normalize();
    }
    std::vector<Triangle> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoints;
        const auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoints.find(key);
            if (it != midpoints.end()) {
                return it->second;
            }
            verts.push_back((verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]).normalized());
            const int id = static_cast<int>(verts.size()) - 1;
            midpoints.emplace(key, id);
            return id;
        };
        std::vector<Triangle> next;
        next.reserve(faces.size() * 4);
        for (const auto& t : faces) {
            const int ab = midpoint(t[0], t[1]);
            const int bc = midpoint(t[1], t[2]);
            const int ca = midpoint(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    Mesh mesh;
    mesh.positions.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) {
        mesh.positions.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
    }
    mesh.triangles = std::move(faces);
    return mesh;
}

OpenSphere open_sphere(int subdivisions, double cap_degrees)
{
    if (!(cap_degrees > 0.0 && cap_degrees < 180.0)) {
        throw InputError("open_sphere: cap must be in (0, 180) degrees");
    }
    const Mesh full = icosphere(subdivisions);
    const double cap = cap_degrees * std::numbers::pi / 180.0;
    const auto polar = [&](Eigen::Index v) { return std::acos(std::clamp(full.positions(v, 2), -1.0, 1.0)); };

    std::vector<int> remap(static_cast<std::size_t>(full.positions.rows()), -1);
    OpenSphere out;
    for (const auto& t : full.triangles) {
        if (polar(t[0]) <= cap && polar(t[1]) <= cap && polar(t[2]) <= cap) {
            out.mesh.triangles.push_back(t);
            for (int v : t) {
                remap[static_cast<std::size_t>(v)] = 0;
            }
        }
    }
    int n = 0;
    for (int& r : remap) {
        if (r == 0) {
            r = n++;
        }
    }
    for (auto& t : out.mesh.triangles) {
        for (int& v : t) {
            v = remap[static_cast<std::size_t>(v)];
        }
    }
    out.mesh.positions.resize(n, 3);
    out.uv.resize(n, 2);
    for (Eigen::Index v = 0; v < full.positions.rows(); ++v) {
        const int r = remap[static_cast<std::size_t>(v)];
        if (r < 0) {
            continue;
        }
        const Eigen::Vector3d p = full.positions.row(v).transpose();
        out.mesh.positions.row(r) = p.transpose();
        const double rho = std::hypot(p.x(), p.y());
        const double radius = 0.48 * polar(v) / cap;
        out.uv(r, 0) = rho > 0.0 ? 0.5 + radius * p.x() / rho : 0.5;
        out.uv(r, 1) = rho > 0.0 ? 0.5 + radius * p.y() / rho : 0.5;
    }
    return out;
}

MorphableModel make_model(const ModelOptions& options)
{
    if (options.texture_dims < 0) {
        throw InputError("make_model: texture_dims must be non-negative");
    }
    const OpenSphere sphere = open_sphere(options.subdivisions, options.cap_degrees);
    const Fields fields = make_fields(options);
    const Eigen::Index n = sphere.mesh.positions.rows();

    MorphableModel model;
    model.mean_shape.resize(3 * n);
    model.id_basis.resize(3 * n, kIdentityDims);
    model.exp_basis.resize(3 * n, kExpressionDims);
    model.mean_texture.resize(3 * n);
    model.tex_basis.resize(3 * n, options.texture_dims);
    for (Eigen::Index v = 0; v < n; ++v) {
        const Eigen::Vector3d d = sphere.mesh.positions.row(v).transpose();
        model.mean_shape.segment<3>(3 * v) = d;
        for (int k = 0; k < kIdentityDims; ++k) {
            model.id_basis.block<3, 1>(3 * v, k) = 0.02 * fields.identity[static_cast<std::size_t>(k)](d) * d;
        }
        for (int k = 0; k < kExpressionDims; ++k) {
            model.exp_basis.block<3, 1>(3 * v, k) = 0.015 * fields.expression[static_cast<std::size_t>(k)](d) * d;
        }
        model.mean_texture.segment<3>(3 * v) = mean_color(d);
        for (int k = 0; k < options.texture_dims; ++k) {
            model.tex_basis.block<3, 1>(3 * v, k) = texture_column(fields, k, d);
        }
    }
    model.triangles = sphere.mesh.triangles;
    model.uv_coords = sphere.uv;
    model.validate();
    return model;
}

Pose centered_pose(int width, int height, double fill, double yaw_degrees, double pitch_degrees)
{
    Pose pose;
    const double to_rad = std::numbers::pi / 180.0;
    pose.rotation = rotation_from_euler(yaw_degrees * to_rad, pitch_degrees * to_rad, 0.0);
    pose.scale = fill * width;
    pose.translation = Eigen::Vector3d(0.5 * width / pose.scale, 0.5 * height / pose.scale, 0.0);
    return pose;
}

Scene make_scene(const SceneOptions& options)
{
    Scene scene;
    scene.options = options;
    scene.model = make_model(options.model);
    std::mt19937_64 rng(options.model.seed + 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    scene.params.alpha_id = Eigen::VectorXd::Zero(kIdentityDims);
    scene.params.alpha_exp = Eigen::VectorXd::Zero(kExpressionDims);
    scene.tex_params = Eigen::VectorXd::Zero(options.model.texture_dims);
    if (options.mirror_symmetric) {
        scene.options.detail = 0.0;
    } else {
        for (Eigen::Index k = 0; k < kIdentityDims; ++k) {
            scene.params.alpha_id(k) = options.shape_amplitude * unit(rng);
        }
        for (Eigen::Index k = 0; k < kExpressionDims; ++k) {
            scene.params.alpha_exp(k) = options.shape_amplitude * unit(rng);
        }
        for (Eigen::Index k = 0; k < scene.tex_params.size(); ++k) {
            scene.tex_params(k) = options.tex_amplitude * unit(rng);
        }
    }
    scene.params.pose = centered_pose(options.width, options.height, options.fill, options.yaw_degrees,
                                      options.pitch_degrees);
    scene.image = render_scene(scene, scene.params.pose);
    return scene;
}

Eigen::Vector3d scene_texture(const Scene& scene, const Eigen::Vector3d& dir)
{
    return texture_value(scene, make_fields(scene.options.model), direction(dir));
}

Image render_scene(const Scene& scene, const Pose& pose)
{
    const Fields fields = make_fields(scene.options.model);
    const Vertices shape = synthesize_shape(scene.model, scene.params.alpha_id, scene.params.alpha_exp);
    const ProjectedVertices projected = project(shape, pose);
    const RasterBuffers buffers =
        rasterize(projected, scene.model.triangles, scene.options.width, scene.options.height);
    const Eigen::Index n = scene.model.num_vertices();
    Eigen::MatrixXd reference(n, 3);
    for (Eigen::Index v = 0; v < n; ++v) {
        reference.row(v) = scene.model.mean_shape.segment<3>(3 * v).transpose();
    }
    const Image surface = shade(buffers, reference, scene.model.triangles);

    Image image(scene.options.width, scene.options.height, 3);
    image.mask = buffers.coverage();
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            if (!buffers.covered(y, x)) {
                continue;
            }
            const Eigen::Vector3d d(surface(y, x, 0), surface(y, x, 1), surface(y, x, 2));
            const Eigen::Vector3d c = texture_value(scene, fields, direction(d));
            for (int ch = 0; ch < 3; ++ch) {
                image(y, x, ch) = c(ch);
            }
        }
    }
    return image;
}

void write_scene(const Scene& scene, const fs::path& dir)
{
    fs::create_directories(dir);
    save_model(scene.model, dir / "model.uvmm");
    write_png(scene.image, dir / "image.png");
    write_params(scene.params, dir / "params.txt");
}

} // namespace uvtex::synthetic
