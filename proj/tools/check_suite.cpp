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
#include "check_suite.hpp"

#include "uvtex/blending.hpp"
#include "uvtex/error.hpp"
#include "uvtex/losses.hpp"
#include "uvtex/rasterizer.hpp"
#include "uvtex/texture_fit.hpp"
#include "uvtex/uv_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>

namespace uvtex::tools {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Image random_image(Rng& rng, int w, int h, int c)
{
    Image img(w, h, c);
    for (double& v : img.data) {
        v = uniform(rng, 0.0, 1.0);
    }
    return img;
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

/// ||analytic - numeric||_inf / ||numeric||_inf
double gradient_error(const std::vector<double>& analytic, const std::vector<double>& numeric)
{
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max(scale, std::abs(numeric[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

std::vector<double> central_difference(std::vector<double> x, const std::function<double(const std::vector<double>&)>& f,
                                       double step)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + step;
        const double fp = f(x);
        x[i] = x0 - step;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

struct RandomScene
{
    ProjectedVertices projected;
    std::vector<Triangle> triangles;
};

RandomScene random_scene(Rng& rng, int vertices, int triangles, int extent)
{
    RandomScene s;
    s.projected.points.resize(vertices, 2);
    s.projected.depth.resize(vertices);
    for (int v = 0; v < vertices; ++v) {
        s.projected.points(v, 0) = uniform(rng, -2.0, extent + 2.0);
        s.projected.points(v, 1) = uniform(rng, -2.0, extent + 2.0);
        s.projected.depth(v) = uniform(rng, -1.0, 1.0);
    }
    std::uniform_int_distribution<int> pick(0, vertices - 1);
    for (int t = 0; t < triangles; ++t) {
        Triangle tri{pick(rng), pick(rng), pick(rng)};
        while (tri[1] == tri[0]) {
            tri[1] = pick(rng);
        }
        while (tri[2] == tri[0] || tri[2] == tri[1]) {
            tri[2] = pick(rng);
        }
        s.triangles.push_back(tri);
    }
    return s;
}

CheckResult make(const std::string& name, double measured, double tolerance)
{
    return {name, measured, tolerance, std::isfinite(measured) && measured < tolerance};
}

CheckResult check_shade_adjoint(Rng& rng, bool fault)
{
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const RandomScene s = random_scene(rng, 40, 60, 32);
        const RasterBuffers buffers = rasterize(s.projected, s.triangles, 32, 32);
        Eigen::MatrixXd colors = Eigen::MatrixXd::Random(40, 3);
        const Image upstream = random_image(rng, 32, 32, 3);
        const Image shaded = shade(buffers, colors, s.triangles);
        Eigen::MatrixXd grad = shade_backward(buffers, s.triangles, upstream, 40);
        if (fault) {
            grad *= 1.001;
        }
        const double lhs = dot(shaded.data, upstream.data);
        const double rhs = (colors.array() * grad.array()).sum();
        worst = std::max(worst, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
    }
    return make("shade/shade_backward adjoint (rel)", worst, 1e-9);
}

SamplingGrid random_grid(Rng& rng, int res)
{
    SamplingGrid grid(res);
    for (int r = 0; r < res; ++r) {
        for (int c = 0; c < res; ++c) {
            grid.x(r, c) = uniform(rng, -0.9, 0.9);
            grid.y(r, c) = uniform(rng, -0.9, 0.9);
            grid.valid.set(r, c, true);
        }
    }
    return grid;
}

std::vector<CheckResult> check_grid_sample(Rng& rng, bool fault)
{
    double image_err = 0.0;
    double grid_err = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        const Image image = random_image(rng, 4, 4, 3);
        const SamplingGrid grid = random_grid(rng, 3);
        const Image upstream = random_image(rng, 3, 3, 3);
        GridSampleGradients g = grid_sample_backward(image, grid, upstream);
        if (fault) {
            for (double& v : g.d_grid) {
                v *= 1.01;
            }
        }
        const auto loss_image = [&](const std::vector<double>& data) {
            Image im = image;
            im.data = data;
            return dot(grid_sample(im, grid).texels.data, upstream.data);
        };
        const auto loss_grid = [&](const std::vector<double>& coords) {
            SamplingGrid gr = grid;
            gr.coords = coords;
            return dot(grid_sample(image, gr).texels.data, upstream.data);
        };
        image_err = std::max(image_err, gradient_error(g.d_image.data, central_difference(image.data, loss_image, 1e-5)));
        grid_err = std::max(grid_err, gradient_error(g.d_grid, central_difference(grid.coords, loss_grid, 1e-5)));
    }
    return {make("grid_sample_backward d/dimage vs FD", image_err, 1e-4),
            make("grid_sample_backward d/dgrid vs FD", grid_err, 1e-4)};
}

std::vector<CheckResult> check_texture_fit(Rng& rng, bool fault)
{
    double optimality = 0.0;
    double recovery = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        const int rows = 3 * std::uniform_int_distribution<int>(20, 100)(rng);
        const int k = std::uniform_int_distribution<int>(1, 20)(rng);
        const Eigen::MatrixXd w = Eigen::MatrixXd::Random(rows, k);
        const Eigen::VectorXd mean = Eigen::VectorXd::Random(rows);
        const Eigen::VectorXd c = Eigen::VectorXd::Random(rows);
        std::vector<bool> mask(static_cast<std::size_t>(rows));
        Eigen::VectorXd m(rows);
        for (int i = 0; i < rows; ++i) {
            mask[static_cast<std::size_t>(i)] = uniform(rng, 0.0, 1.0) < 0.7;
            m(i) = mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
        }
        const double lambda = uniform(rng, 0.01, 1.0);
        TextureFit fit = fit_texture(w, mean, c, mask, lambda, true);
        if (fault) {
            fit.params.array() += 1e-6;
        }
        const Eigen::VectorXd cp = c - mean;
        const Eigen::VectorXd rhs = w.transpose() * m.asDiagonal() * cp;
        const Eigen::VectorXd grad =
            2.0 * (w.transpose() * m.asDiagonal() * w + lambda * Eigen::MatrixXd::Identity(k, k)) * fit.params -
            2.0 * rhs;
        optimality = std::max(optimality, grad.norm() / rhs.norm());

        const Eigen::VectorXd planted = Eigen::VectorXd::Random(k);
        const Eigen::VectorXd exact = mean + w * planted;
        TextureFit exact_fit = fit_texture(w, mean, exact, mask, 0.0, true);
        if (fault) {
            exact_fit.params.array() += 1e-6;
        }
        recovery = std::max(recovery, (exact_fit.params - planted).norm() / planted.norm());
    }
    // Bound is 1e-8 * ||W^T M c'||; the measured value is already divided by it.
    return {make("texture fit gradient norm / |W^T M c'|", optimality, 1e-8),
            make("texture fit planted recovery (rel)", recovery, 1e-8)};
}

UVMap random_smooth_map(Rng& rng, int res)
{
    UVMap uv(res);
    const double a = uniform(rng, 0.5, 3.0);
    const double b = uniform(rng, 0.5, 3.0);
    const double ph = uniform(rng, 0.0, 6.0);
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            for (int c = 0; c < 3; ++c) {
                uv(y, x, c) = 0.5 + 0.4 * std::sin(a * x / res * 6.0 + b * y / res * 6.0 + ph + c);
            }
            uv.valid.set(y, x, true);
        }
    }
    return uv;
}

Mask random_region(Rng& rng, int res)
{
    Mask region(res, res);
    const int blobs = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int b = 0; b < blobs; ++b) {
        const double cx = uniform(rng, 0.3 * res, 0.7 * res);
        const double cy = uniform(rng, 0.3 * res, 0.7 * res);
        const double rad = uniform(rng, 0.05 * res, 0.25 * res);
        for (int y = 1; y < res - 1; ++y) {
            for (int x = 1; x < res - 1; ++x) {
                if (std::hypot(x - cx, y - cy) <= rad) {
                    region.set(y, x, true);
                }
            }
        }
    }
    return region;
}

/// max |sum_q (f_p - f_q) - sum_q (s_p - s_q)| over region texels.
double poisson_residual(const UVMap& f, const UVMap& s, const Mask& region)
{
    double worst = 0.0;
    const int res = f.resolution();
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            if (!region(y, x)) {
                continue;
            }
            for (int c = 0; c < f.channels(); ++c) {
                double r = 0.0;
                for (const auto& [dy, dx] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}}) {
                    r += (f(y, x, c) - f(y + dy, x + dx, c)) - (s(y, x, c) - s(y + dy, x + dx, c));
                }
                worst = std::max(worst, std::abs(r));
            }
        }
    }
    return worst;
}

std::vector<CheckResult> check_poisson(Rng& rng, bool fault)
{
    constexpr int res = 32;
    BlendOptions raw;
    raw.clamp = false;
    double residual = 0.0;
    double uniqueness = 0.0;
    double maximum = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const UVMap target = random_smooth_map(rng, res);
        const UVMap source = random_smooth_map(rng, res);
        const Mask region = random_region(rng, res);
        BlendResult out = poisson_blend(target, source, region, raw);
        if (fault) {
            out.map(res / 2, res / 2, 0) += 1e-5;
        }
        residual = std::max(residual, poisson_residual(out.map, source, region));

        const BlendResult same = poisson_blend(source, source, region, raw);
        for (std::size_t i = 0; i < source.texels.data.size(); ++i) {
            uniqueness = std::max(uniqueness, std::abs(same.map.texels.data[i] - source.texels.data[i]));
        }

        UVMap flat(res);
        const double k = uniform(rng, 0.0, 1.0);
        std::fill(flat.texels.data.begin(), flat.texels.data.end(), k);
        flat.valid = Mask(res, res, true);
        const BlendResult harmonic = poisson_blend(flat, flat, region, raw);
        for (double v : harmonic.map.texels.data) {
            maximum = std::max(maximum, std::abs(v - k));
        }
    }
    return {make("poisson residual |Lf - div v|_inf", residual, 1e-6),
            make("poisson uniqueness |f - source|_inf", uniqueness, 1e-6),
            make("poisson max principle |f - k|_inf", maximum, 1e-6)};
}

std::vector<CheckResult> check_losses(Rng& rng, bool fault)
{
    double tv = 0.0;
    double l1 = 0.0;
    double sym = 0.0;
    double adv = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const Image x = random_image(rng, 5, 5, 3);
        LossValue t = tv_loss(x);
        if (fault) {
            t.gradient[0] += 1e-2;
        }
        tv = std::max(tv, gradient_error(t.gradient, central_difference(x.data, [&](const std::vector<double>& d) {
                                             Image im = x;
                                             im.data = d;
                                             return tv_loss(im).value;
                                         }, 1e-6)));

        const Image y = random_image(rng, 5, 5, 3);
        const LossValue l = l1_loss(x, y);
        l1 = std::max(l1, gradient_error(l.gradient, central_difference(x.data, [&](const std::vector<double>& d) {
                                             Image im = x;
                                             im.data = d;
                                             return l1_loss(im, y).value;
                                         }, 1e-6)));

        UVMap uv(5);
        uv.texels = x;
        uv.valid = Mask(5, 5, true);
        // Keep mirrored pairs apart so no |a - b| sits at its kink.
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 2; ++c) {
                for (int ch = 0; ch < 3; ++ch) {
                    uv(r, 4 - c, ch) = uv(r, c, ch) + (ch % 2 == 0 ? 0.3 : -0.3);
                }
            }
        }
        const LossValue s = symmetry_loss(uv);
        sym = std::max(sym, gradient_error(s.gradient, central_difference(uv.texels.data, [&](const std::vector<double>& d) {
                                               UVMap m = uv;
                                               m.texels.data = d;
                                               return symmetry_loss(m).value;
                                           }, 1e-6)));

        std::vector<double> scores(6);
        for (double& v : scores) {
            v = uniform(rng, 0.05, 0.95);
        }
        for (AdversarialMode mode : {AdversarialMode::discriminator, AdversarialMode::generator_saturating,
                                     AdversarialMode::generator_non_saturating}) {
            const auto f = [&](const std::vector<double>& v) {
                return adversarial_loss(std::span(v).first(3), std::span(v).subspan(3), mode).value;
            };
            const LossValue a = adversarial_loss(std::span(scores).first(3), std::span(scores).subspan(3), mode);
            adv = std::max(adv, gradient_error(a.gradient, central_difference(scores, f, 1e-6)));
        }
    }
    return {make("tv_loss gradient vs FD", tv, 1e-4), make("l1_loss gradient vs FD", l1, 1e-4),
            make("symmetry_loss gradient vs FD", sym, 1e-4), make("adversarial_loss gradient vs FD", adv, 1e-4)};
}

CheckResult check_erosion(Rng& rng, bool fault)
{
    double mismatches = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const int w = std::uniform_int_distribution<int>(10, 30)(rng);
        const int h = std::uniform_int_distribution<int>(10, 30)(rng);
        const int radius = std::uniform_int_distribution<int>(0, 4)(rng);
        Mask m(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                m.set(y, x, uniform(rng, 0.0, 1.0) < 0.9);
            }
        }
        Mask eroded = erode_mask(m, radius);
        if (fault) {
            eroded.set(h / 2, w / 2, !eroded(h / 2, w / 2));
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                bool all = true;
                for (int dy = -radius; dy <= radius && all; ++dy) {
                    for (int dx = -radius; dx <= radius && all; ++dx) {
                        if (dx * dx + dy * dy > radius * radius) {
                            continue;
                        }
                        all = m.contains(y + dy, x + dx) && m(y + dy, x + dx);
                    }
                }
                mismatches += all != eroded(y, x) ? 1.0 : 0.0;
            }
        }
    }
    return make("erode_mask vs brute-force min filter (mismatches)", mismatches, 0.5);
}

CheckResult check_raster(Rng& rng, bool fault)
{
    double mismatches = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const RandomScene s = random_scene(rng, 3, 1, 16);
        RasterBuffers buffers = rasterize(s.projected, s.triangles, 16, 16);
        if (fault) {
            buffers.tri_index[0] = buffers.tri_index[0] == kBackground ? 0 : kBackground;
        }
        const auto p = [&](int v) { return Eigen::Vector2d(s.projected.points.row(s.triangles[0][static_cast<std::size_t>(v)]).transpose()); };
        const auto side = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& q) {
            return (b.x() - a.x()) * (q.y() - a.y()) - (b.y() - a.y()) * (q.x() - a.x());
        };
        const double area = side(p(0), p(1), p(2));
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
                const Eigen::Vector2d q(x + 0.5, y + 0.5);
                const double s0 = side(p(1), p(2), q);
                const double s1 = side(p(2), p(0), q);
                const double s2 = side(p(0), p(1), q);
                const bool inside = area != 0.0 && ((s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0));
                mismatches += inside != buffers.covered(y, x) ? 1.0 : 0.0;
            }
        }
    }
    return make("rasterize vs half-plane oracle (mismatches)", mismatches, 0.5);
}

} // namespace

std::vector<std::string> fault_names()
{
    return {"shade_backward", "grid_sample_backward", "texture_fit", "poisson", "loss_gradient", "erosion",
            "rasterize"};
}

std::vector<CheckResult> run_checks(std::uint64_t seed, const std::string& fault)
{
    const auto names = fault_names();
    if (!fault.empty() && std::find(names.begin(), names.end(), fault) == names.end()) {
        throw InputError("unknown fault '" + fault + "'");
    }
    Rng rng(seed);
    std::srand(static_cast<unsigned>(seed)); // Eigen's Random() draws from rand()
    std::vector<CheckResult> out;
    const auto append = [&](std::vector<CheckResult> more) { out.insert(out.end(), more.begin(), more.end()); };
    out.push_back(check_shade_adjoint(rng, fault == "shade_backward"));
    append(check_grid_sample(rng, fault == "grid_sample_backward"));
    append(check_texture_fit(rng, fault == "texture_fit"));
    append(check_poisson(rng, fault == "poisson"));
    append(check_losses(rng, fault == "loss_gradient"));
    out.push_back(check_erosion(rng, fault == "erosion"));
    out.push_back(check_raster(rng, fault == "rasterize"));
    return out;
}

void print_check_table(const std::vector<CheckResult>& results, std::ostream& out)
{
    char line[256];
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-4s  %-52s  %.3e  < %.1e\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                      r.measured, r.tolerance);
        out << line;
    }
}

} // namespace uvtex::tools
