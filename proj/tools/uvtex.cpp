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
#include "uvtex/image_io.hpp"
#include "uvtex/losses.hpp"
#include "uvtex/morphable_model.hpp"
#include "uvtex/params_io.hpp"
#include "uvtex/rasterizer.hpp"
#include "uvtex/synthetic.hpp"
#include "uvtex/texture_fit.hpp"
#include "uvtex/uv_pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace uvtex;

namespace {

/// A failure tagged with the pipeline stage it happened in and the exit code to report.
struct StageFailure
{
    std::string stage;
    std::string message;
    int code;
};

template <typename F>
auto run_stage(const std::string& stage, F&& body) -> decltype(body())
{
    try {
        return body();
    } catch (const NumericalError& e) {
        throw StageFailure{stage, e.what(), 2};
    } catch (const std::exception& e) {
        throw StageFailure{stage, e.what(), 1};
    }
}

std::string number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double fraction(const Mask& m)
{
    const double total = static_cast<double>(m.width()) * m.height();
    return total > 0 ? static_cast<double>(m.count()) / total : 0.0;
}

std::size_t count_true(const std::vector<bool>& flags)
{
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

/// Ordered key/value report, written as key=value text and as JSON.
class Report
{
public:
    template <typename T>
    void add(const std::string& key, const T& value)
    {
        if constexpr (std::is_floating_point_v<T>) {
            text_.emplace_back(key, number(value));
        } else if constexpr (std::is_same_v<T, bool>) {
            text_.emplace_back(key, value ? "true" : "false");
        } else if constexpr (std::is_arithmetic_v<T>) {
            text_.emplace_back(key, std::to_string(value));
        } else {
            text_.emplace_back(key, std::string(value));
        }
        json_[key] = value;
    }

    std::string text() const
    {
        std::string out;
        for (const auto& [k, v] : text_) {
            out += k + "=" + v + "\n";
        }
        return out;
    }

    std::string json() const { return json_.dump(2) + "\n"; }

private:
    std::vector<std::pair<std::string, std::string>> text_;
    nlohmann::ordered_json json_ = nlohmann::ordered_json::object();
};

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
}

std::vector<double> read_features(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open feature file " + path.string());
    }
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw InputError("malformed value '" + token + "' in " + path.string());
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw InputError("feature file " + path.string() + " is empty");
    }
    return values;
}

// ---------------------------------------------------------------------------

struct PipelineConfig
{
    std::string model_path;
    std::string image_path;
    std::string params_path;
    int uv_resolution = 256;
    int erosion_radius = -1; ///< negative: default from the image width
    double lambda_fit = -1.0; ///< negative: scale-aware default
    bool use_mean = true;
    double lambda_adv = 1.0;
    double lambda_sym = 1.0;
    double lambda_id = 1.0;
    double lambda_tv = 1.0;
    std::string output_dir = "out";
    std::string config;
};

void add_pipeline_options(CLI::App* cmd, PipelineConfig& cfg)
{
    cmd->add_option("--config", cfg.config, "flat key = value file; keys are the long option names");
    cmd->add_option("--model_path", cfg.model_path, "morphable model container (.uvmm)")->required();
    cmd->add_option("--image_path", cfg.image_path, "input image (.png or .pfm)")->required();
    cmd->add_option("--params_path", cfg.params_path, "shape and pose parameter file")->required();
    cmd->add_option("--uv_resolution", cfg.uv_resolution, "UV map side in texels")
        ->capture_default_str()
        ->check(CLI::Range(8, 8192));
    cmd->add_option("--erosion_radius", cfg.erosion_radius, "face mask erosion radius; -1 = ceil(2% of width)")
        ->capture_default_str();
    cmd->add_option("--lambda_fit", cfg.lambda_fit, "texture fit regularization; -1 = 1e-3 trace/K")
        ->capture_default_str();
    cmd->add_option("--use_mean", cfg.use_mean, "fit the texture around the model mean")->capture_default_str();
    for (auto [name, value] : {std::pair{"--lambda_adv", &cfg.lambda_adv}, std::pair{"--lambda_sym", &cfg.lambda_sym},
                               std::pair{"--lambda_id", &cfg.lambda_id}, std::pair{"--lambda_tv", &cfg.lambda_tv}}) {
        cmd->add_option(name, *value, "loss weight")->capture_default_str()->check(CLI::NonNegativeNumber);
    }
    cmd->add_option("--output_dir", cfg.output_dir, "output directory")->capture_default_str();
}

int cmd_pseudo_uv(const PipelineConfig& cfg)
{
    const MorphableModel model = run_stage("load_model", [&] { return load_model(cfg.model_path); });
    const Image image = run_stage("read_image", [&] {
        Image im = read_image(cfg.image_path);
        if (im.channels != 3) {
            throw InputError("expected an RGB image, got " + std::to_string(im.channels) + " channel(s)");
        }
        return im;
    });
    const FaceParams params = run_stage("read_params", [&] {
        FaceParams p = read_params(cfg.params_path);
        p.pose.validate();
        return p;
    });
    const int radius = cfg.erosion_radius >= 0 ? cfg.erosion_radius : default_erosion_radius(image.width);

    const UVCapture capture = run_stage("uv_gt", [&] {
        UVCapture c = capture_uv(image, model, params.alpha_id, params.alpha_exp, params.pose, cfg.uv_resolution, radius);
        if (c.uv.valid.none()) {
            throw InputError("empty UV_gt: no valid texels remain after erosion (radius " + std::to_string(radius) + ")");
        }
        return c;
    });
    const TextureFit fit = run_stage("texture_fit", [&] {
        const double lambda =
            cfg.lambda_fit >= 0.0 ? cfg.lambda_fit : default_texture_lambda(model, capture.samples.sampled);
        return fit_texture(model, capture.samples.colors, capture.samples.sampled, lambda, cfg.use_mean);
    });
    const UVMap uv_bfm = run_stage("uv_bfm", [&] { return texture_to_uv(model, fit, cfg.uv_resolution, cfg.use_mean); });
    const PseudoUV pseudo = run_stage("blend", [&] { return make_pseudo_uv(capture.uv, uv_bfm); });

    Report report;
    report.add("uv_resolution", cfg.uv_resolution);
    report.add("erosion_radius", radius);
    report.add("use_mean", cfg.use_mean);
    report.add("lambda_fit", fit.lambda);
    report.add("lambda_adv", cfg.lambda_adv);
    report.add("lambda_sym", cfg.lambda_sym);
    report.add("lambda_id", cfg.lambda_id);
    report.add("lambda_tv", cfg.lambda_tv);
    report.add("vertices", model.num_vertices());
    report.add("visible_vertices", count_true(capture.visible));
    report.add("sampled_vertices", count_true(capture.samples.sampled));
    report.add("face_mask_pixels", capture.face_mask.count());
    report.add("eroded_mask_pixels", capture.eroded_mask.count());
    report.add("fit_residual", fit.residual);
    report.add("blend_region_texels", pseudo.region.count());
    report.add("blend_residual", pseudo.blend_residual);
    report.add("fill_residual", pseudo.fill_residual);
    report.add("uv_gt_valid_fraction", fraction(capture.uv.valid));
    report.add("uv_bfm_valid_fraction", fraction(uv_bfm.valid));
    report.add("uv_bl_valid_fraction", fraction(pseudo.map.valid));

    run_stage("write", [&] {
        const fs::path dir = cfg.output_dir;
        fs::create_directories(dir);
        save_uv_map(capture.uv, dir / "uv_gt");
        save_uv_map(uv_bfm, dir / "uv_bfm");
        save_uv_map(pseudo.map, dir / "uv_bl");
        write_mask_png(capture.face_mask, dir / "face_mask.png");
        write_mask_png(capture.eroded_mask, dir / "face_mask_eroded.png");
        write_texture_fit(fit, dir / "texture_fit.txt");
        write_text(dir / "report.txt", report.text());
        write_text(dir / "report.json", report.json());
    });
    std::cout << report.text();
    return 0;
}

// ---------------------------------------------------------------------------

struct RenderConfig
{
    std::string model_path;
    std::string params_path;
    std::string uv;
    std::string config;
    std::string pose;
    std::string image_path;
    int width = 0;
    int height = 0;
    std::string output;
    std::string mask_output;
};

int cmd_render(const RenderConfig& cfg)
{
    const MorphableModel model = run_stage("load_model", [&] { return load_model(cfg.model_path); });
    FaceParams params = run_stage("read_params", [&] { return read_params(cfg.params_path); });
    if (!cfg.pose.empty()) {
        params.pose = run_stage("read_pose", [&] { return read_pose(cfg.pose); });
    }
    run_stage("read_params", [&] { params.pose.validate(); });
    const UVMap uv = run_stage("read_uv", [&] { return load_uv_map(cfg.uv); });
    auto [width, height] = run_stage("frame", [&] {
        int w = cfg.width;
        int h = cfg.height;
        if (!cfg.image_path.empty() && (w <= 0 || h <= 0)) {
            const Image ref = read_image(cfg.image_path);
            w = w > 0 ? w : ref.width;
            h = h > 0 ? h : ref.height;
        }
        if (w <= 0 || h <= 0) {
            throw InputError("output size unknown: pass --width/--height or --image_path");
        }
        return std::pair{w, h};
    });
    const Image rendered = run_stage("render", [&] {
        const Vertices shape = synthesize_shape(model, params.alpha_id, params.alpha_exp);
        return render_textured(project(shape, params.pose), model.triangles, model.uv_coords, uv, width, height);
    });
    run_stage("write", [&] {
        write_image(rendered, cfg.output);
        if (!cfg.mask_output.empty()) {
            write_mask_png(rendered.validity(), cfg.mask_output);
        }
    });
    return 0;
}

// ---------------------------------------------------------------------------

struct MetricsConfig
{
    std::string a;
    std::string b;
    std::string features_a;
    std::string features_b;
    std::string mask;
    bool json = false;
};

int cmd_metrics(const MetricsConfig& cfg)
{
    const Image a = run_stage("read_image", [&] { return read_image(cfg.a); });
    const Image b = run_stage("read_image", [&] { return read_image(cfg.b); });
    Report report;
    run_stage("metrics", [&] {
        if (!a.same_shape(b)) {
            throw InputError("images differ in shape");
        }
        std::optional<Mask> mask;
        if (!cfg.mask.empty()) {
            mask = read_mask_png(cfg.mask);
        }
        const std::vector<double> fa = cfg.features_a.empty() ? downsample_features(a) : read_features(cfg.features_a);
        const std::vector<double> fb = cfg.features_b.empty() ? downsample_features(b) : read_features(cfg.features_b);
        report.add("l1", l1_loss(a, b, mask).value);
        report.add("ssim", ssim(a, b));
        const auto zero = [](const std::vector<double>& f) {
            return std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; });
        };
        if (fa.size() == fb.size() && (zero(fa) || zero(fb))) {
            report.add("cosine", std::numeric_limits<double>::quiet_NaN());
        } else {
            report.add("cosine", cosine_similarity(fa, fb));
        }
    });
    std::cout << (cfg.json ? report.json() : report.text());
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_check(std::uint64_t seed, const std::string& fault)
{
    const auto results = run_stage("check", [&] { return tools::run_checks(seed, fault); });
    tools::print_check_table(results, std::cout);
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
    return ok ? 0 : 2;
}

// ---------------------------------------------------------------------------

int cmd_synth(const synthetic::SceneOptions& options, const std::string& dir)
{
    run_stage("synth", [&] { synthetic::write_scene(synthetic::make_scene(options), dir); });
    return 0;
}


std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/**
 * Replaces "--config FILE" with one "--key value" pair per line of FILE.
 * Pairs go right after the subcommand so explicit flags take precedence.
 */
std::vector<std::string> expand_config(std::vector<std::string> args)
{
    if (args.empty() || (args[0] != "pseudo-uv" && args[0] != "render")) {
        return args;
    }
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) {
        return args;
    }
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot read config file '" + path + "'");
    }
    const auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> injected;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (key.rfind("--", 0) != 0) {
            key = "--" + key;
        }
        if (!given(key)) {
            injected.push_back(key);
            injected.push_back(value);
        }
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    return args;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"uvtex: UV texture maps for face reconstruction"};
    app.require_subcommand(1);

    PipelineConfig pipeline;
    CLI::App* pseudo = app.add_subcommand("pseudo-uv", "build UV_gt, UV_bfm and the blended UV_bl");
    add_pipeline_options(pseudo, pipeline);

    RenderConfig render;
    CLI::App* rend = app.add_subcommand("render", "render the mesh textured by a UV map");
    rend->add_option("--config", render.config, "flat key = value file; keys are the long option names");
    rend->add_option("--model_path", render.model_path, "morphable model container")->required();
    rend->add_option("--params_path", render.params_path, "shape and pose parameter file")->required();
    rend->add_option("--uv", render.uv, "UV map stem (reads <stem>.pfm or .png and <stem>_valid.png)")->required();
    rend->add_option("--pose", render.pose, "pose file overriding the pose in --params_path");
    rend->add_option("--image_path", render.image_path, "take the output size from this image");
    rend->add_option("--width", render.width, "output width");
    rend->add_option("--height", render.height, "output height");
    rend->add_option("--output", render.output, "output image (.png or .pfm)")->required();
    rend->add_option("--mask_output", render.mask_output, "optional validity mask PNG");

    MetricsConfig metrics;
    CLI::App* met = app.add_subcommand("metrics", "L1, SSIM and feature cosine similarity of two images");
    met->add_option("a", metrics.a, "first image")->required();
    met->add_option("b", metrics.b, "second image")->required();
    met->add_option("--features_a", metrics.features_a, "feature vector file for a (default: downsampled pixels)");
    met->add_option("--features_b", metrics.features_b, "feature vector file for b");
    met->add_option("--mask", metrics.mask, "restrict L1 to this mask PNG");
    met->add_flag("--json", metrics.json, "print JSON instead of key=value lines");

    std::uint64_t seed = 1;
    std::string fault;
    CLI::App* chk = app.add_subcommand("check", "run the gradient, adjoint and oracle checks");
    chk->add_option("--seed", seed, "random seed")->capture_default_str();
    chk->add_option("--fault", fault, "inject a fault into one component")
        ->check(CLI::IsMember(tools::fault_names()));

    synthetic::SceneOptions scene;
    std::string synth_dir = "scene";
    CLI::App* syn = app.add_subcommand("synth", "write a synthetic sphere scene (model, image, params)");
    syn->add_option("--output_dir", synth_dir, "output directory")->capture_default_str();
    syn->add_option("--width", scene.width)->capture_default_str()->check(CLI::Range(8, 4096));
    syn->add_option("--height", scene.height)->capture_default_str()->check(CLI::Range(8, 4096));
    syn->add_option("--yaw", scene.yaw_degrees, "degrees")->capture_default_str();
    syn->add_option("--pitch", scene.pitch_degrees, "degrees")->capture_default_str();
    syn->add_option("--seed", scene.model.seed)->capture_default_str();
    syn->add_option("--subdivisions", scene.model.subdivisions)->capture_default_str()->check(CLI::Range(0, 6));
    syn->add_option("--texture_dims", scene.model.texture_dims)->capture_default_str()->check(CLI::Range(0, 200));
    syn->add_option("--detail", scene.detail, "texture detail outside the model span")->capture_default_str();
    syn->add_flag("--symmetric", scene.mirror_symmetric, "left-right symmetric texture and shape");

    std::vector<std::string> args;
    try {
        args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const InputError& e) {
        std::cerr << "uvtex: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*pseudo) {
            return cmd_pseudo_uv(pipeline);
        }
        if (*rend) {
            return cmd_render(render);
        }
        if (*met) {
            return cmd_metrics(metrics);
        }
        if (*chk) {
            return cmd_check(seed, fault);
        }
        if (*syn) {
            return cmd_synth(scene, synth_dir);
        }
    } catch (const StageFailure& f) {
        std::cerr << "uvtex: stage " << f.stage << " failed: " << f.message << "\n";
        return f.code;
    }
    return 1;
}
