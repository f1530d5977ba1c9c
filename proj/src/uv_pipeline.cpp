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
#include "uvtex/uv_pipeline.hpp"

#include "uvtex/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uvtex {

namespace {

bool all_sampled(const VisibilityMask& sampled, const Triangle& tri)
{
    return sampled[static_cast<std::size_t>(tri[0])] && sampled[static_cast<std::size_t>(tri[1])] &&
           sampled[static_cast<std::size_t>(tri[2])];
}

Mask triangle_validity(const RasterBuffers& buffers, std::span<const Triangle> triangles,
                       const VisibilityMask& sampled)
{
    Mask valid(buffers.width, buffers.height);
    for (int y = 0; y < buffers.height; ++y) {
        for (int x = 0; x < buffers.width; ++x) {
            const int t = buffers.tri_index[buffers.index(y, x)];
            if (t != kBackground && all_sampled(sampled, triangles[static_cast<std::size_t>(t)])) {
                valid.set(y, x, true);
            }
        }
    }
    return valid;
}

// Bilinear footprint in index space (pixel centers at integers), clamped to the border.
struct Footprint
{
    int x0, x1, y0, y1;
    double ax, ay;
    bool clamped_x, clamped_y;
};

Footprint footprint(double ix, double iy, int width, int height)
{
    Footprint f{};
    const double cx = std::clamp(ix, 0.0, static_cast<double>(width - 1));
    const double cy = std::clamp(iy, 0.0, static_cast<double>(height - 1));
    f.clamped_x = cx != ix;
    f.clamped_y = cy != iy;
    f.x0 = std::min(static_cast<int>(std::floor(cx)), std::max(width - 2, 0));
    f.y0 = std::min(static_cast<int>(std::floor(cy)), std::max(height - 2, 0));
    f.x1 = std::min(f.x0 + 1, width - 1);
    f.y1 = std::min(f.y0 + 1, height - 1);
    f.ax = cx - f.x0;
    f.ay = cy - f.y0;
    return f;
}

void check_sizes(const VisibilityMask& mask, Eigen::Index n, const char* what)
{
    if (static_cast<Eigen::Index>(mask.size()) != n) {
        throw InputError(std::string(what) + ": vertex mask length does not match the vertex count");
    }
}

} // namespace

SamplingGrid::SamplingGrid(int resolution)
    : resolution(resolution), coords(static_cast<std::size_t>(resolution) * resolution * 2, 0.0),
      valid(resolution, resolution)
{
}

SamplingGrid identity_grid(int resolution)
{
    SamplingGrid grid(resolution);
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            grid.x(r, c) = to_normalized(c + 0.5, resolution);
            grid.y(r, c) = to_normalized(r + 0.5, resolution);
            grid.valid.set(r, c, true);
        }
    }
    return grid;
}

Mask build_face_mask(const ProjectedVertices& projected, std::span<const Triangle> triangles,
                     const VisibilityMask& visibility, int width, int height)
{
    check_sizes(visibility, projected.size(), "build_face_mask");
    std::vector<Triangle> visible;
    for (const auto& tri : triangles) {
        if (all_sampled(visibility, tri)) {
            visible.push_back(tri);
        }
    }
    return rasterize(projected, visible, width, height).coverage();
}

Mask erode_mask(const Mask& mask, int radius)
{
    if (radius < 0) {
        throw InputError("erode_mask: radius must be non-negative");
    }
    if (radius == 0) {
        return mask;
    }
    const int w = mask.width();
    const int h = mask.height();
    // falses[y][x] = number of false pixels in row y before column x.
    std::vector<int> falses(static_cast<std::size_t>(h) * (w + 1), 0);
    for (int y = 0; y < h; ++y) {
        int* row = &falses[static_cast<std::size_t>(y) * (w + 1)];
        for (int x = 0; x < w; ++x) {
            row[x + 1] = row[x] + (mask(y, x) ? 0 : 1);
        }
    }
    std::vector<int> half(static_cast<std::size_t>(2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy) {
        int hw = 0;
        while ((hw + 1) * (hw + 1) + dy * dy <= radius * radius) {
            ++hw;
        }
        half[static_cast<std::size_t>(dy + radius)] = hw;
    }

    Mask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x)) {
                continue;
            }
            bool keep = true;
            for (int dy = -radius; dy <= radius && keep; ++dy) {
                const int yy = y + dy;
                const int hw = half[static_cast<std::size_t>(dy + radius)];
                if (yy < 0 || yy >= h || x - hw < 0 || x + hw >= w) {
                    keep = false;
                    break;
                }
                const int* row = &falses[static_cast<std::size_t>(yy) * (w + 1)];
                keep = row[x + hw + 1] - row[x - hw] == 0;
            }
            out.set(y, x, keep);
        }
    }
    return out;
}

int default_erosion_radius(int image_width)
{
    return static_cast<int>(std::ceil(0.02 * image_width - 1e-12));
}

VertexSamples sample_vertex_colors(const Image& image, const ProjectedVertices& projected,
                                   const VisibilityMask& visibility, const Mask& face_mask)
{
    if (face_mask.width() != image.width || face_mask.height() != image.height) {
        throw InputError("sample_vertex_colors: face mask and image sizes differ");
    }
    const int n = projected.size();
    check_sizes(visibility, n, "sample_vertex_colors");
    VertexSamples out;
    out.colors = Eigen::MatrixXd::Zero(n, image.channels);
    out.sampled.assign(static_cast<std::size_t>(n), false);
    for (int v = 0; v < n; ++v) {
        if (!visibility[static_cast<std::size_t>(v)]) {
            continue;
        }
        const double px = projected.points(v, 0);
        const double py = projected.points(v, 1);
        if (!(px >= 0.0 && px < image.width && py >= 0.0 && py < image.height)) {
            continue;
        }
        if (!face_mask(static_cast<int>(py), static_cast<int>(px))) {
            continue;
        }
        for (int c = 0; c < image.channels; ++c) {
            out.colors(v, c) = sample_bilinear(image, px, py, c);
        }
        out.sampled[static_cast<std::size_t>(v)] = true;
    }
    return out;
}

RasterBuffers rasterize_uv(const Eigen::MatrixX2d& uv_coords, std::span<const Triangle> triangles, int resolution)
{
    if (resolution < 8) {
        throw InputError("UV resolution must be at least 8, got " + std::to_string(resolution));
    }
    ProjectedVertices texel_space;
    texel_space.points = uv_coords * static_cast<double>(resolution);
    texel_space.depth = Eigen::VectorXd::Zero(uv_coords.rows());
    return rasterize(texel_space, triangles, resolution, resolution);
}

UVMap render_uv(const Eigen::MatrixXd& colors, const VisibilityMask& sampled, const Eigen::MatrixX2d& uv_coords,
                std::span<const Triangle> triangles, int resolution)
{
    check_sizes(sampled, uv_coords.rows(), "render_uv");
    if (colors.rows() != uv_coords.rows()) {
        throw InputError("render_uv: color rows do not match the vertex count");
    }
    const RasterBuffers buffers = rasterize_uv(uv_coords, triangles, resolution);
    UVMap uv;
    uv.texels = shade(buffers, colors, triangles);
    uv.texels.mask.reset();
    uv.valid = triangle_validity(buffers, triangles, sampled);
    uv.zero_invalid();
    return uv;
}

SamplingGrid grid_from_projection(const ProjectedVertices& projected, const VisibilityMask& sampled,
                                  const Eigen::MatrixX2d& uv_coords, std::span<const Triangle> triangles,
                                  int resolution, int image_width, int image_height)
{
    if (projected.size() != uv_coords.rows()) {
        throw InputError("grid_from_projection: projected vertices do not match uv coordinates");
    }
    check_sizes(sampled, uv_coords.rows(), "grid_from_projection");
    Eigen::MatrixXd normalized(projected.size(), 2);
    for (int v = 0; v < projected.size(); ++v) {
        normalized(v, 0) = to_normalized(projected.points(v, 0), image_width);
        normalized(v, 1) = to_normalized(projected.points(v, 1), image_height);
    }
    const RasterBuffers buffers = rasterize_uv(uv_coords, triangles, resolution);
    const Image shaded = shade(buffers, normalized, triangles);
    SamplingGrid grid(resolution);
    grid.valid = triangle_validity(buffers, triangles, sampled);
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            if (grid.valid(r, c)) {
                grid.x(r, c) = shaded(r, c, 0);
                grid.y(r, c) = shaded(r, c, 1);
            }
        }
    }
    return grid;
}

UVMap grid_sample(const Image& image, const SamplingGrid& grid)
{
    if (image.width < 1 || image.height < 1) {
        throw InputError("grid_sample: empty image");
    }
    if (grid.valid.width() != grid.resolution || grid.valid.height() != grid.resolution) {
        throw InputError("grid_sample: grid validity mask missing or mis-sized");
    }
    UVMap out(grid.resolution, image.channels);
    out.valid = grid.valid;
    for (int r = 0; r < grid.resolution; ++r) {
        for (int c = 0; c < grid.resolution; ++c) {
            if (!grid.valid(r, c)) {
                continue;
            }
            const Footprint f = footprint(from_normalized(grid.x(r, c), image.width),
                                          from_normalized(grid.y(r, c), image.height), image.width, image.height);
            for (int ch = 0; ch < image.channels; ++ch) {
                const double top = (1.0 - f.ax) * image(f.y0, f.x0, ch) + f.ax * image(f.y0, f.x1, ch);
                const double bottom = (1.0 - f.ax) * image(f.y1, f.x0, ch) + f.ax * image(f.y1, f.x1, ch);
                out(r, c, ch) = (1.0 - f.ay) * top + f.ay * bottom;
            }
        }
    }
    return out;
}

GridSampleGradients grid_sample_backward(const Image& image, const SamplingGrid& grid, const Image& upstream)
{
    if (upstream.width != grid.resolution || upstream.height != grid.resolution ||
        upstream.channels != image.channels) {
        throw InputError("grid_sample_backward: upstream gradient shape does not match the sampled map");
    }
    GridSampleGradients out;
    out.d_image = Image(image.width, image.height, image.channels);
    out.d_grid.assign(grid.coords.size(), 0.0);
    const double sx = image.width > 1 ? 0.5 * (image.width - 1) : 0.0;
    const double sy = image.height > 1 ? 0.5 * (image.height - 1) : 0.0;
    for (int r = 0; r < grid.resolution; ++r) {
        for (int c = 0; c < grid.resolution; ++c) {
            if (!grid.valid(r, c)) {
                continue;
            }
            const Footprint f = footprint(from_normalized(grid.x(r, c), image.width),
                                          from_normalized(grid.y(r, c), image.height), image.width, image.height);
            double d_ix = 0.0;
            double d_iy = 0.0;
            for (int ch = 0; ch < image.channels; ++ch) {
                const double g = upstream(r, c, ch);
                if (g == 0.0) {
                    continue;
                }
                out.d_image(f.y0, f.x0, ch) += (1.0 - f.ax) * (1.0 - f.ay) * g;
                out.d_image(f.y0, f.x1, ch) += f.ax * (1.0 - f.ay) * g;
                out.d_image(f.y1, f.x0, ch) += (1.0 - f.ax) * f.ay * g;
                out.d_image(f.y1, f.x1, ch) += f.ax * f.ay * g;
                const double v00 = image(f.y0, f.x0, ch);
                const double v01 = image(f.y0, f.x1, ch);
                const double v10 = image(f.y1, f.x0, ch);
                const double v11 = image(f.y1, f.x1, ch);
                d_ix += g * ((1.0 - f.ay) * (v01 - v00) + f.ay * (v11 - v10));
                d_iy += g * ((1.0 - f.ax) * (v10 - v00) + f.ax * (v11 - v01));
            }
            const std::size_t i = grid.index(r, c);
            out.d_grid[2 * i] = f.clamped_x ? 0.0 : d_ix * sx;
            out.d_grid[2 * i + 1] = f.clamped_y ? 0.0 : d_iy * sy;
        }
    }
    return out;
}

UVCapture capture_uv(const Image& image, const MorphableModel& model, const Eigen::VectorXd& alpha_id,
                     const Eigen::VectorXd& alpha_exp, const Pose& pose, int resolution, int erosion_radius)
{
    UVCapture cap;
    cap.vertices = synthesize_shape(model, alpha_id, alpha_exp);
    cap.projected = project(cap.vertices, pose);
    cap.visible = visible_vertices(cap.projected, model.triangles, image.width, image.height);
    cap.face_mask = build_face_mask(cap.projected, model.triangles, cap.visible, image.width, image.height);
    cap.eroded_mask = erode_mask(cap.face_mask, erosion_radius);
    cap.samples = sample_vertex_colors(image, cap.projected, cap.visible, cap.eroded_mask);
    cap.uv = render_uv(cap.samples.colors, cap.samples.sampled, model.uv_coords, model.triangles, resolution);
    return cap;
}

UVMap make_uv_gt(const Image& image, const MorphableModel& model, const Eigen::VectorXd& alpha_id,
                 const Eigen::VectorXd& alpha_exp, const Pose& pose, int resolution, int erosion_radius)
{
    return capture_uv(image, model, alpha_id, alpha_exp, pose, resolution, erosion_radius).uv;
}

Image render_textured(const ProjectedVertices& projected, std::span<const Triangle> triangles,
                      const Eigen::MatrixX2d& uv_coords, const UVMap& uv, int width, int height)
{
    if (projected.size() != uv_coords.rows()) {
        throw InputError("render_textured: projected vertices do not match uv coordinates");
    }
    const RasterBuffers buffers = rasterize(projected, triangles, width, height);
    const Image uv_at_pixel = shade(buffers, uv_coords, triangles);
    const int res = uv.resolution();
    Image out(width, height, uv.channels());
    out.mask = Mask(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (!buffers.covered(y, x)) {
                continue;
            }
            // Texel space: texel (row, col) has its center at ((col + 0.5) / res, (row + 0.5) / res).
            const double tx = uv_at_pixel(y, x, 0) * res;
            const double ty = uv_at_pixel(y, x, 1) * res;
            const Footprint f = footprint(tx - 0.5, ty - 0.5, res, res);
            const auto usable = [&](int ty_, int tx_, double weight) { return weight == 0.0 || uv.valid(ty_, tx_); };
            const bool ok = usable(f.y0, f.x0, (1.0 - f.ax) * (1.0 - f.ay)) && usable(f.y0, f.x1, f.ax * (1.0 - f.ay)) &&
                            usable(f.y1, f.x0, (1.0 - f.ax) * f.ay) && usable(f.y1, f.x1, f.ax * f.ay);
            if (!ok) {
                continue;
            }
            out.mask->set(y, x, true);
            for (int c = 0; c < uv.channels(); ++c) {
                out(y, x, c) = sample_bilinear(uv.texels, tx, ty, c);
            }
        }
    }
    return out;
}

} // namespace uvtex
