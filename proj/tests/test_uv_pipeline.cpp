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
#include "uvtex/rasterizer.hpp"
#include "uvtex/synthetic.hpp"
#include "uvtex/uv_pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace uvtex;

namespace {

ProjectedVertices points(std::initializer_list<std::array<double, 2>> xy)
{
    ProjectedVertices p;
    p.points.resize(static_cast<Eigen::Index>(xy.size()), 2);
    p.depth = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(xy.size()));
    Eigen::Index i = 0;
    for (const auto& v : xy) {
        p.points(i, 0) = v[0];
        p.points(i, 1) = v[1];
        ++i;
    }
    return p;
}

Eigen::MatrixX2d uv_rows(std::initializer_list<std::array<double, 2>> uv)
{
    return points(uv).points;
}

double mean_abs_difference(const UVMap& a, const UVMap& b, const Mask& where)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < a.resolution(); ++y) {
        for (int x = 0; x < a.resolution(); ++x) {
            if (!where(y, x)) {
                continue;
            }
            for (int c = 0; c < a.channels(); ++c) {
                sum += std::abs(a(y, x, c) - b(y, x, c));
                ++n;
            }
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double masked_l1(const Image& a, const Image& b, const Mask& where)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            for (int c = 0; where(y, x) && c < a.channels; ++c) {
                sum += std::abs(a(y, x, c) - b(y, x, c));
                ++n;
            }
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

} // namespace

TEST(FaceMask, FullFrameAndEmpty)
{
    const auto p = points({{{-1, -1}}, {{40, -1}}, {{-1, 40}}});
    const std::vector<Triangle> tris = {{0, 1, 2}};
    EXPECT_EQ(build_face_mask(p, tris, {true, true, true}, 10, 12).count(), 120u);
    EXPECT_EQ(build_face_mask(p, tris, {true, false, true}, 10, 12).count(), 0u);
    EXPECT_EQ(build_face_mask(p, tris, {false, false, false}, 10, 12).count(), 0u);
}

TEST(FaceMask, IcosphereMatchesBruteCoverage)
{
    const synthetic::Scene scene = synthetic::make_scene();
    const Vertices shape = synthesize_shape(scene.model, scene.params.alpha_id, scene.params.alpha_exp);
    const ProjectedVertices p = project(shape, scene.params.pose);
    const VisibilityMask vis = visible_vertices(p, scene.model.triangles, 64, 64);
    const Mask mask = build_face_mask(p, scene.model.triangles, vis, 64, 64);
    const Mask brute = oracle::brute_coverage(p.points, scene.model.triangles, 64, 64, [&](int t) {
        const Triangle& tri = scene.model.triangles[static_cast<std::size_t>(t)];
        return vis[static_cast<std::size_t>(tri[0])] && vis[static_cast<std::size_t>(tri[1])] &&
               vis[static_cast<std::size_t>(tri[2])];
    });
    EXPECT_EQ(mask.count(), brute.count());
    EXPECT_EQ(mask, brute);
    EXPECT_GT(mask.count(), 1000u);
}

TEST(Erode, RadiusZeroIsIdentity)
{
    oracle::Rng rng(21);
    Mask m(13, 9);
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 13; ++x) {
            m.set(y, x, oracle::uniform(rng) < 0.5);
        }
    }
    EXPECT_EQ(erode_mask(m, 0), m);
}

TEST(Erode, FullMaskLosesBorderBand)
{
    const Mask full(20, 20, true);
    const Mask eroded = erode_mask(full, 3);
    EXPECT_EQ(eroded, oracle::brute_erode(full, 3));
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) {
            const bool inner = y >= 3 && y < 17 && x >= 3 && x < 17;
            EXPECT_EQ(eroded(y, x), inner) << y << "," << x;
        }
    }
}

TEST(Erode, EmptyStaysEmpty)
{
    EXPECT_EQ(erode_mask(Mask(7, 7), 2).count(), 0u);
}

TEST(Erode, MatchesMinFilterAndIsMonotone)
{
    oracle::Rng rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        const int w = 5 + static_cast<int>(oracle::uniform(rng, 0, 30));
        const int h = 5 + static_cast<int>(oracle::uniform(rng, 0, 30));
        Mask m(w, h);
        const double cx = oracle::uniform(rng, 0, w);
        const double cy = oracle::uniform(rng, 0, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                m.set(y, x, std::hypot(x - cx, y - cy) < 0.6 * w || oracle::uniform(rng) < 0.1);
            }
        }
        Mask prev = m;
        for (int r = 0; r <= 6; ++r) {
            const Mask e = erode_mask(m, r);
            EXPECT_EQ(e, oracle::brute_erode(m, r)) << "rep " << rep << " radius " << r;
            EXPECT_EQ((e & prev), e); // shrinks with radius and stays inside the input
            prev = e;
        }
    }
    EXPECT_THROW(erode_mask(Mask(3, 3), -1), InputError);
}

TEST(Erode, DefaultRadius)
{
    EXPECT_EQ(default_erosion_radius(64), 2);
    EXPECT_EQ(default_erosion_radius(50), 1);
    EXPECT_EQ(default_erosion_radius(256), 6);
    EXPECT_EQ(default_erosion_radius(100), 2);
}

TEST(SampleVertexColors, ConstantImage)
{
    const Image gray(16, 16, 3, 0.42);
    const auto p = points({{{1.2, 3.3}}, {{8.0, 8.0}}, {{15.9, 0.1}}});
    const VertexSamples s = sample_vertex_colors(gray, p, {true, true, true}, Mask(16, 16, true));
    EXPECT_EQ(s.sampled, VisibilityMask(3, true));
    EXPECT_NEAR((s.colors.array() - 0.42).abs().maxCoeff(), 0.0, 1e-15);
}

TEST(SampleVertexColors, LatticePointAndMidpoint)
{
    oracle::Rng rng(23);
    const Image img = oracle::random_image(rng, 10, 8, 3);
    const auto p = points({{{7.5, 3.5}}});
    const VertexSamples s = sample_vertex_colors(img, p, {true}, Mask(10, 8, true));
    for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(s.colors(0, c), img(3, 7, c));
    }

    Image quad(2, 2, 1);
    quad(1, 0, 0) = 1.0;
    quad(1, 1, 0) = 1.0;
    const VertexSamples m = sample_vertex_colors(quad, points({{{1.0, 1.0}}}), {true}, Mask(2, 2, true));
    EXPECT_DOUBLE_EQ(m.colors(0, 0), 0.5);
}

TEST(SampleVertexColors, Exclusions)
{
    const Image img(8, 8, 3, 0.5);
    Mask mask(8, 8, true);
    mask.set(2, 2, false);
    const auto p = points({{{2.5, 2.5}}, {{-0.1, 3.0}}, {{3.0, 8.0}}, {{4.5, 4.5}}, {{5.5, 5.5}}});
    const VertexSamples s = sample_vertex_colors(img, p, {true, true, true, false, true}, mask);
    EXPECT_EQ(s.sampled, (VisibilityMask{false, false, false, false, true}));
    EXPECT_EQ(s.colors.row(0).norm(), 0.0);
    EXPECT_EQ(s.colors.row(3).norm(), 0.0);
    EXPECT_THROW(sample_vertex_colors(img, p, {true, true, true, false, true}, Mask(7, 8, true)), InputError);
}

TEST(RenderUV, ConstantColorsCoverTriangles)
{
    const Eigen::MatrixX2d uv = uv_rows({{{0.1, 0.1}}, {{0.9, 0.15}}, {{0.2, 0.85}}, {{0.95, 0.9}}});
    const std::vector<Triangle> tris = {{0, 1, 2}, {1, 3, 2}};
    const Eigen::MatrixXd colors = Eigen::MatrixXd::Constant(4, 3, 0.25);
    const UVMap map = render_uv(colors, VisibilityMask(4, true), uv, tris, 16);
    EXPECT_EQ(map.valid, rasterize_uv(uv, tris, 16).coverage());
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            EXPECT_NEAR(map(y, x, 1), map.valid(y, x) ? 0.25 : 0.0, 1e-15);
        }
    }
    EXPECT_THROW(render_uv(colors, VisibilityMask(4, true), uv, tris, 7), InputError);
}

TEST(RenderUV, UnsampledVertexInvalidatesIncidentTriangles)
{
    const Eigen::MatrixX2d uv = uv_rows({{{0.1, 0.1}}, {{0.9, 0.15}}, {{0.2, 0.85}}, {{0.95, 0.9}}});
    const std::vector<Triangle> tris = {{0, 1, 2}, {1, 3, 2}};
    const Eigen::MatrixXd colors = Eigen::MatrixXd::Constant(4, 3, 0.25);
    EXPECT_EQ(render_uv(colors, {true, true, true, false}, uv, tris, 16).valid,
              rasterize_uv(uv, {tris.data(), 1}, 16).coverage());
    EXPECT_EQ(render_uv(colors, {true, false, true, true}, uv, tris, 16).valid.count(), 0u);
}

TEST(RenderUV, ValidityCountMatchesBruteCoverage)
{
    oracle::Rng rng(24);
    const synthetic::OpenSphere sphere = synthetic::open_sphere(2);
    const Eigen::Index n = sphere.uv.rows();
    VisibilityMask sampled(static_cast<std::size_t>(n));
    for (auto&& s : sampled) {
        s = oracle::uniform(rng) < 0.8;
    }
    const UVMap map = render_uv(Eigen::MatrixXd::Ones(n, 3), sampled, sphere.uv, sphere.mesh.triangles, 32);
    const Mask brute = oracle::brute_coverage(sphere.uv * 32.0, sphere.mesh.triangles, 32, 32, [&](int t) {
        const Triangle& tri = sphere.mesh.triangles[static_cast<std::size_t>(t)];
        return sampled[static_cast<std::size_t>(tri[0])] && sampled[static_cast<std::size_t>(tri[1])] &&
               sampled[static_cast<std::size_t>(tri[2])];
    });
    EXPECT_EQ(map.valid.count(), brute.count());
}

TEST(GridFromProjection, NormalizationEndpoints)
{
    const Eigen::MatrixX2d uv = uv_rows({{{0.0, 0.0}}, {{1.0, 0.0}}, {{0.0, 1.0}}});
    const std::vector<Triangle> tris = {{0, 1, 2}};
    const SamplingGrid center = grid_from_projection(points({{{4.5, 3.5}}, {{4.5, 3.5}}, {{4.5, 3.5}}}),
                                                     VisibilityMask(3, true), uv, tris, 8, 9, 7);
    const SamplingGrid corner = grid_from_projection(points({{{0.5, 0.5}}, {{0.5, 0.5}}, {{0.5, 0.5}}}),
                                                     VisibilityMask(3, true), uv, tris, 8, 9, 7);
    ASSERT_GT(center.valid.count(), 0u);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            if (center.valid(r, c)) {
                EXPECT_NEAR(center.x(r, c), 0.0, 1e-15);
                EXPECT_NEAR(center.y(r, c), 0.0, 1e-15);
                EXPECT_NEAR(corner.x(r, c), -1.0, 1e-15);
                EXPECT_NEAR(corner.y(r, c), -1.0, 1e-15);
            }
        }
    }
}

TEST(GridSample, IdentityGrid)
{
    oracle::Rng rng(25);
    const Image img = oracle::random_image(rng, 12, 12, 3);
    const UVMap out = grid_sample(img, identity_grid(12));
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        EXPECT_NEAR(out.texels.data[i], img.data[i], 1e-12);
    }
    EXPECT_EQ(out.valid.count(), 144u);
}

TEST(GridSample, ConstantHandValueAndBounds)
{
    oracle::Rng rng(26);
    SamplingGrid grid(6);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            grid.x(r, c) = oracle::uniform(rng, -1.5, 1.5);
            grid.y(r, c) = oracle::uniform(rng, -1.5, 1.5);
            grid.valid.set(r, c, (r + c) % 3 != 0);
        }
    }
    const UVMap flat = grid_sample(Image(5, 7, 3, 0.3), grid);
    const UVMap rnd_out = grid_sample(oracle::random_image(rng, 5, 7, 1), grid);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            EXPECT_NEAR(flat(r, c, 2), grid.valid(r, c) ? 0.3 : 0.0, 1e-15);
        }
    }
    const Image rnd = oracle::random_image(rng, 5, 7, 1);
    const UVMap sampled = grid_sample(rnd, grid);
    const auto [lo, hi] = std::minmax_element(rnd.data.begin(), rnd.data.end());
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            if (grid.valid(r, c)) {
                EXPECT_GE(sampled(r, c, 0), *lo - 1e-15);
                EXPECT_LE(sampled(r, c, 0), *hi + 1e-15);
            }
        }
    }
    EXPECT_EQ(rnd_out.valid, grid.valid);

    Image quad(2, 2, 1);
    quad(1, 0, 0) = 1.0;
    quad(1, 1, 0) = 1.0;
    SamplingGrid g1(1);
    g1.valid.set(0, 0, true);
    EXPECT_DOUBLE_EQ(grid_sample(quad, g1)(0, 0, 0), 0.5);
}

TEST(GridSampleBackward, IdentityGridOnes)
{
    oracle::Rng rng(27);
    const Image img = oracle::random_image(rng, 6, 6, 2);
    const GridSampleGradients g = grid_sample_backward(img, identity_grid(6), Image(6, 6, 2, 1.0));
    for (double v : g.d_image.data) {
        EXPECT_NEAR(v, 1.0, 1e-12);
    }
    for (double v : g.d_grid) {
        EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(GridSampleBackward, MatchesFiniteDifferences)
{
    oracle::Rng rng(28);
    for (int rep = 0; rep < 20; ++rep) {
        const Image img = oracle::random_image(rng, 4, 4, 3);
        SamplingGrid grid(3);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                grid.x(r, c) = oracle::uniform(rng, -0.95, 0.95);
                grid.y(r, c) = oracle::uniform(rng, -0.95, 0.95);
                grid.valid.set(r, c, true);
            }
        }
        const Image up = oracle::random_image(rng, 3, 3, 3, -1.0, 1.0);
        const GridSampleGradients g = grid_sample_backward(img, grid, up);
        const auto by_image = [&](const std::vector<double>& d) {
            Image im = img;
            im.data = d;
            return oracle::dot(grid_sample(im, grid).texels.data, up.data);
        };
        const auto by_grid = [&](const std::vector<double>& coords) {
            SamplingGrid gr = grid;
            gr.coords = coords;
            return oracle::dot(grid_sample(img, gr).texels.data, up.data);
        };
        EXPECT_LT(oracle::relative_error(g.d_image.data, oracle::central_difference(img.data, by_image, 1e-5)), 1e-4);
        EXPECT_LT(oracle::relative_error(g.d_grid, oracle::central_difference(grid.coords, by_grid, 1e-5)), 1e-4);
    }
}

TEST(GridSampleBackward, ZeroUpstreamAndAdjoint)
{
    oracle::Rng rng(29);
    const Image img = oracle::random_image(rng, 9, 7, 3);
    SamplingGrid grid(8);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            grid.x(r, c) = oracle::uniform(rng, -1.2, 1.2);
            grid.y(r, c) = oracle::uniform(rng, -1.2, 1.2);
            grid.valid.set(r, c, oracle::uniform(rng) < 0.8);
        }
    }
    const GridSampleGradients zero = grid_sample_backward(img, grid, Image(8, 8, 3));
    EXPECT_EQ(*std::max_element(zero.d_image.data.begin(), zero.d_image.data.end()), 0.0);
    EXPECT_EQ(*std::max_element(zero.d_grid.begin(), zero.d_grid.end()), 0.0);

    const Image up = oracle::random_image(rng, 8, 8, 3, -1.0, 1.0);
    const double lhs = oracle::dot(grid_sample(img, grid).texels.data, up.data);
    const double rhs = oracle::dot(img.data, grid_sample_backward(img, grid, up).d_image.data);
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::abs(lhs));
}

TEST(MakeUVGt, ConstantImage)
{
    synthetic::Scene scene = synthetic::make_scene();
    const Image gray(64, 64, 3, 0.37);
    const UVMap uv = make_uv_gt(gray, scene.model, scene.params.alpha_id, scene.params.alpha_exp, scene.params.pose, 64, 2);
    ASSERT_GT(uv.valid.count(), 100u);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            EXPECT_NEAR(uv(y, x, 0), uv.valid(y, x) ? 0.37 : 0.0, 1e-12);
        }
    }
    const UVMap none = make_uv_gt(gray, scene.model, scene.params.alpha_id, scene.params.alpha_exp, scene.params.pose, 64, 40);
    EXPECT_EQ(none.valid.count(), 0u);
}

TEST(MakeUVGt, RoundTripReproducesInput)
{
    for (double yaw : {0.0, 20.0, -35.0}) {
        synthetic::SceneOptions opts;
        opts.yaw_degrees = yaw;
        const synthetic::Scene scene = synthetic::make_scene(opts);
        const UVCapture cap = capture_uv(scene.image, scene.model, scene.params.alpha_id, scene.params.alpha_exp,
                                         scene.params.pose, 256, default_erosion_radius(64));
        const Image back = render_textured(cap.projected, scene.model.triangles, scene.model.uv_coords, cap.uv, 64, 64);
        const Mask joint = back.validity() & scene.image.validity();
        ASSERT_GT(joint.count(), 500u);
        EXPECT_LT(masked_l1(back, scene.image, joint), 0.01) << "yaw " << yaw;
    }
}

TEST(GridFromProjection, AgreesWithVertexColorPath)
{
    const synthetic::Scene scene = synthetic::make_scene();
    const UVCapture cap = capture_uv(scene.image, scene.model, scene.params.alpha_id, scene.params.alpha_exp,
                                     scene.params.pose, 64, 2);
    const SamplingGrid grid = grid_from_projection(cap.projected, cap.samples.sampled, scene.model.uv_coords,
                                                   scene.model.triangles, 64, 64, 64);
    const UVMap sampled = grid_sample(scene.image, grid);
    const Mask joint = sampled.valid & cap.uv.valid;
    EXPECT_EQ(joint, cap.uv.valid);
    EXPECT_LT(mean_abs_difference(sampled, cap.uv, joint), 0.02);
}

TEST(RenderTextured, ConstantMapGivesConstantSilhouette)
{
    const synthetic::OpenSphere sphere = synthetic::open_sphere(2);
    Pose pose;
    pose.scale = 12.0;
    pose.translation = Eigen::Vector3d(16.0 / 12.0, 16.0 / 12.0, 0.0);
    const ProjectedVertices p = project(Vertices{sphere.mesh.positions}, pose);
    UVMap flat(32);
    std::fill(flat.texels.data.begin(), flat.texels.data.end(), 0.6);
    flat.valid = Mask(32, 32, true);
    const Image img = render_textured(p, sphere.mesh.triangles, sphere.uv, flat, 32, 32);
    const Mask cover = rasterize(p, sphere.mesh.triangles, 32, 32).coverage();
    EXPECT_EQ(img.validity(), cover);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            EXPECT_NEAR(img(y, x, 0), cover(y, x) ? 0.6 : 0.0, 1e-12);
        }
    }
}
