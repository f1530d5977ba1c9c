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
#include "uvtex/rasterizer.hpp"

#include "uvtex/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uvtex {

namespace {

struct Point
{
    double x;
    double y;
};

// Edge function with endpoints ordered by vertex index. Two triangles that
// share an edge evaluate it bit-identically (up to sign), so a pixel center
// lying exactly on a shared edge is never dropped by both.
double edge(const Point& a, int ia, const Point& b, int ib, double px, double py)
{
    if (ia > ib) {
        return -((a.x - b.x) * (py - b.y) - (a.y - b.y) * (px - b.x));
    }
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

struct SetupTriangle
{
    Triangle idx;
    std::array<Point, 3> p;
    double sign = 0.0; // 0 for degenerate triangles

    // Inclusive containment; on success writes normalized barycentrics.
    bool weights(double px, double py, std::array<double, 3>& w) const
    {
        const double e0 = edge(p[1], idx[1], p[2], idx[2], px, py) * sign;
        const double e1 = edge(p[2], idx[2], p[0], idx[0], px, py) * sign;
        const double e2 = edge(p[0], idx[0], p[1], idx[1], px, py) * sign;
        if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) {
            return false;
        }
        const double sum = e0 + e1 + e2;
        if (!(sum > 0.0)) {
            return false;
        }
        w = {e0 / sum, e1 / sum, e2 / sum};
        return true;
    }

    // Interpolated relative to the lowest-index vertex, so a constant-depth
    // triangle gives that depth exactly whatever its vertex order.
    double depth(const ProjectedVertices& pv, const std::array<double, 3>& w) const
    {
        int a = 0;
        for (int k = 1; k < 3; ++k) {
            a = idx[k] < idx[a] ? k : a;
        }
        const int b = (a + 1) % 3;
        const int c = (a + 2) % 3;
        const double za = pv.depth(idx[a]);
        return za + w[b] * (pv.depth(idx[b]) - za) + w[c] * (pv.depth(idx[c]) - za);
    }
};

SetupTriangle setup(const ProjectedVertices& pv, const Triangle& tri)
{
    SetupTriangle st;
    st.idx = tri;
    for (int k = 0; k < 3; ++k) {
        st.p[k] = {pv.points(tri[k], 0), pv.points(tri[k], 1)};
    }
    const double area = (st.p[1].x - st.p[0].x) * (st.p[2].y - st.p[0].y) -
                        (st.p[1].y - st.p[0].y) * (st.p[2].x - st.p[0].x);
    if (std::isfinite(area) && area != 0.0) {
        st.sign = area > 0.0 ? 1.0 : -1.0;
    }
    return st;
}

void check_indices(std::span<const Triangle> triangles, int n)
{
    for (const auto& tri : triangles) {
        for (int idx : tri) {
            if (idx < 0 || idx >= n) {
                throw InputError("triangle index " + std::to_string(idx) + " out of range");
            }
        }
    }
}

} // namespace

Mask RasterBuffers::coverage() const
{
    Mask out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            out.set(y, x, covered(y, x));
        }
    }
    return out;
}

RasterBuffers rasterize(const ProjectedVertices& projected, std::span<const Triangle> triangles, int width,
                        int height)
{
    if (width < 1 || height < 1) {
        throw InputError("rasterize: frame must be at least 1x1");
    }
    check_indices(triangles, projected.size());

    RasterBuffers buf;
    buf.width = width;
    buf.height = height;
    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    buf.tri_index.assign(pixels, kBackground);
    buf.bary.assign(pixels, {0.0, 0.0, 0.0});
    buf.depth.assign(pixels, -std::numeric_limits<double>::infinity());

    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const SetupTriangle st = setup(projected, triangles[t]);
        if (st.sign == 0.0) {
            continue;
        }
        const double min_x = std::min({st.p[0].x, st.p[1].x, st.p[2].x});
        const double max_x = std::max({st.p[0].x, st.p[1].x, st.p[2].x});
        const double min_y = std::min({st.p[0].y, st.p[1].y, st.p[2].y});
        const double max_y = std::max({st.p[0].y, st.p[1].y, st.p[2].y});
        // Pixel j's center is j + 0.5.
        const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
        const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y - 0.5)));

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                std::array<double, 3> w;
                if (!st.weights(x + 0.5, y + 0.5, w)) {
                    continue;
                }
                const double z = st.depth(projected, w);
                const std::size_t i = buf.index(y, x);
                if (z > buf.depth[i]) {
                    buf.depth[i] = z;
                    buf.tri_index[i] = static_cast<int>(t);
                    buf.bary[i] = w;
                }
            }
        }
    }
    return buf;
}

Image shade(const RasterBuffers& buffers, const Eigen::MatrixXd& colors, std::span<const Triangle> triangles)
{
    check_indices(triangles, static_cast<int>(colors.rows()));
    const int channels = static_cast<int>(colors.cols());
    Image out(buffers.width, buffers.height, channels);
    out.mask = Mask(buffers.width, buffers.height);
    for (int y = 0; y < buffers.height; ++y) {
        for (int x = 0; x < buffers.width; ++x) {
            const std::size_t i = buffers.index(y, x);
            const int t = buffers.tri_index[i];
            if (t == kBackground) {
                continue;
            }
            out.mask->set(y, x, true);
            const Triangle& tri = triangles[static_cast<std::size_t>(t)];
            const auto& w = buffers.bary[i];
            for (int c = 0; c < channels; ++c) {
                out(y, x, c) = w[0] * colors(tri[0], c) + w[1] * colors(tri[1], c) + w[2] * colors(tri[2], c);
            }
        }
    }
    return out;
}

Eigen::MatrixXd shade_backward(const RasterBuffers& buffers, std::span<const Triangle> triangles,
                               const Image& upstream, int num_vertices)
{
    if (upstream.width != buffers.width || upstream.height != buffers.height) {
        throw InputError("shade_backward: upstream gradient size does not match the raster buffers");
    }
    check_indices(triangles, num_vertices);
    const int channels = upstream.channels;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(num_vertices, channels);
    // Serial scan in pixel order keeps the accumulation order fixed.
    for (int y = 0; y < buffers.height; ++y) {
        for (int x = 0; x < buffers.width; ++x) {
            const std::size_t i = buffers.index(y, x);
            const int t = buffers.tri_index[i];
            if (t == kBackground) {
                continue;
            }
            const Triangle& tri = triangles[static_cast<std::size_t>(t)];
            const auto& w = buffers.bary[i];
            for (int c = 0; c < channels; ++c) {
                const double g = upstream(y, x, c);
                grad(tri[0], c) += w[0] * g;
                grad(tri[1], c) += w[1] * g;
                grad(tri[2], c) += w[2] * g;
            }
        }
    }
    return grad;
}

VisibilityMask visible_vertices(const ProjectedVertices& projected, std::span<const Triangle> triangles, int width,
                                int height)
{
    if (width < 1 || height < 1) {
        throw InputError("visible_vertices: frame must be at least 1x1");
    }
    const int n = projected.size();
    check_indices(triangles, n);
    VisibilityMask visible(static_cast<std::size_t>(n), false);
    if (n == 0) {
        return visible;
    }
    const double extent = projected.depth.maxCoeff() - projected.depth.minCoeff();
    const double eps = 1e-4 * extent;

    // Bin triangles by the pixel cells their bounding boxes touch (CSR layout).
    const std::size_t cells = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<SetupTriangle> setups;
    setups.reserve(triangles.size());
    struct Range
    {
        int x0, x1, y0, y1;
    };
    std::vector<Range> ranges;
    ranges.reserve(triangles.size());
    std::vector<std::size_t> offsets(cells + 1, 0);
    for (const auto& tri : triangles) {
        setups.push_back(setup(projected, tri));
        const auto& st = setups.back();
        Range r{0, -1, 0, -1};
        if (st.sign != 0.0) {
            const auto cell = [](double v, int hi) {
                return std::clamp(static_cast<int>(std::floor(v)), 0, hi - 1);
            };
            r.x0 = cell(std::min({st.p[0].x, st.p[1].x, st.p[2].x}), width);
            r.x1 = cell(std::max({st.p[0].x, st.p[1].x, st.p[2].x}), width);
            r.y0 = cell(std::min({st.p[0].y, st.p[1].y, st.p[2].y}), height);
            r.y1 = cell(std::max({st.p[0].y, st.p[1].y, st.p[2].y}), height);
        }
        ranges.push_back(r);
        for (int y = r.y0; y <= r.y1; ++y) {
            for (int x = r.x0; x <= r.x1; ++x) {
                ++offsets[static_cast<std::size_t>(y) * width + x + 1];
            }
        }
    }
    for (std::size_t i = 0; i < cells; ++i) {
        offsets[i + 1] += offsets[i];
    }
    std::vector<int> binned(offsets[cells]);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t t = 0; t < ranges.size(); ++t) {
        const Range& r = ranges[t];
        for (int y = r.y0; y <= r.y1; ++y) {
            for (int x = r.x0; x <= r.x1; ++x) {
                binned[fill[static_cast<std::size_t>(y) * width + x]++] = static_cast<int>(t);
            }
        }
    }

    for (int v = 0; v < n; ++v) {
        const double px = projected.points(v, 0);
        const double py = projected.points(v, 1);
        const double pz = projected.depth(v);
        if (!(px >= 0.0 && px < width && py >= 0.0 && py < height) || !std::isfinite(pz)) {
            continue;
        }
        const std::size_t cell = static_cast<std::size_t>(py) * width + static_cast<std::size_t>(px);
        bool occluded = false;
        for (std::size_t k = offsets[cell]; k < offsets[cell + 1] && !occluded; ++k) {
            const SetupTriangle& st = setups[static_cast<std::size_t>(binned[k])];
            if (st.idx[0] == v || st.idx[1] == v || st.idx[2] == v) {
                continue;
            }
            std::array<double, 3> w;
            if (!st.weights(px, py, w)) {
                continue;
            }
            const double z = st.depth(projected, w);
            occluded = z > pz + eps;
        }
        visible[static_cast<std::size_t>(v)] = !occluded;
    }
    return visible;
}

VisibilityMask visible_vertices(const Vertices& vertices, const Pose& pose, std::span<const Triangle> triangles,
                                int width, int height)
{
    return visible_vertices(project(vertices, pose), triangles, width, height);
}

} // namespace uvtex
