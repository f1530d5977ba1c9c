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
#include "uvtex/texture_fit.hpp"

#include "uvtex/error.hpp"
#include "uvtex/uv_pipeline.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace uvtex {

TextureFit fit_texture(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mean, const Eigen::VectorXd& colors,
                       const std::vector<bool>& row_mask, double lambda, bool use_mean)
{
    const Eigen::Index rows = basis.rows();
    const Eigen::Index k = basis.cols();
    if (colors.size() != rows || static_cast<Eigen::Index>(row_mask.size()) != rows ||
        (use_mean && mean.size() != rows)) {
        throw InputError("fit_texture: basis, colors, mean and mask lengths disagree");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InputError("fit_texture: lambda must be finite and non-negative");
    }
    if (!basis.allFinite() || !colors.allFinite() || (use_mean && !mean.allFinite())) {
        throw InputError("fit_texture: non-finite input");
    }

    Eigen::Index active = 0;
    for (bool m : row_mask) {
        active += m ? 1 : 0;
    }
    if (lambda == 0.0 && active < k) {
        throw NumericalError("fit_texture: " + std::to_string(active) + " masked rows cannot determine " +
                             std::to_string(k) + " parameters without regularization");
    }

    // Gather the masked rows once; M W and M c' are then plain dense blocks.
    Eigen::MatrixXd wm(active, k);
    Eigen::VectorXd cm(active);
    for (Eigen::Index r = 0, j = 0; r < rows; ++r) {
        if (row_mask[static_cast<std::size_t>(r)]) {
            wm.row(j) = basis.row(r);
            cm(j) = colors(r) - (use_mean ? mean(r) : 0.0);
            ++j;
        }
    }

    Eigen::MatrixXd normal = wm.transpose() * wm;
    normal.diagonal().array() += lambda;
    const Eigen::VectorXd rhs = wm.transpose() * cm;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("fit_texture: factorization of the normal equations failed");
    }
    if (k > 0) {
        const Eigen::VectorXd d = ldlt.vectorD();
        const double largest = d.cwiseAbs().maxCoeff();
        const double smallest = d.minCoeff();
        if (!(smallest > largest * 1e-13) || !ldlt.isPositive()) {
            throw NumericalError("fit_texture: normal equations are singular; increase lambda or the masked set");
        }
    }

    TextureFit fit;
    fit.lambda = lambda;
    fit.params = k > 0 ? Eigen::VectorXd(ldlt.solve(rhs)) : Eigen::VectorXd();
    if (!fit.params.allFinite()) {
        throw NumericalError("fit_texture: solution is not finite");
    }
    fit.residual = (cm - wm * fit.params).squaredNorm();
    return fit;
}

namespace {

std::vector<bool> expand_mask(const VisibilityMask& mask)
{
    std::vector<bool> rows(mask.size() * 3);
    for (std::size_t v = 0; v < mask.size(); ++v) {
        rows[3 * v] = rows[3 * v + 1] = rows[3 * v + 2] = mask[v];
    }
    return rows;
}

Eigen::VectorXd interleave(const Eigen::MatrixXd& colors)
{
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = colors;
    return Eigen::Map<const Eigen::VectorXd>(rm.data(), rm.size());
}

} // namespace

TextureFit fit_texture(const MorphableModel& model, const Eigen::MatrixXd& colors, const VisibilityMask& mask,
                       double lambda, bool use_mean)
{
    if (colors.rows() != model.num_vertices() || colors.cols() != 3 ||
        static_cast<int>(mask.size()) != model.num_vertices()) {
        throw InputError("fit_texture: expected N x 3 colors and an N-vertex mask");
    }
    return fit_texture(model.tex_basis, model.mean_texture, interleave(colors), expand_mask(mask), lambda, use_mean);
}

double default_texture_lambda(const MorphableModel& model, const VisibilityMask& mask)
{
    const Eigen::Index k = model.tex_basis.cols();
    if (k == 0) {
        return 0.0;
    }
    const std::vector<bool> rows = expand_mask(mask);
    double trace = 0.0;
    for (Eigen::Index r = 0; r < model.tex_basis.rows(); ++r) {
        if (rows[static_cast<std::size_t>(r)]) {
            trace += model.tex_basis.row(r).squaredNorm();
        }
    }
    return 1e-3 * trace / static_cast<double>(k);
}

Eigen::MatrixXd texture_colors(const MorphableModel& model, const Eigen::VectorXd& params, bool use_mean)
{
    if (params.size() != model.tex_basis.cols()) {
        throw InputError("texture_colors: parameter count does not match the texture basis");
    }
    Eigen::VectorXd flat = model.tex_basis * params;
    if (use_mean) {
        flat += model.mean_texture;
    }
    flat = flat.cwiseMax(0.0).cwiseMin(1.0);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(flat.data(), flat.size() / 3, 3);
}

UVMap texture_to_uv(const MorphableModel& model, const TextureFit& fit, int resolution, bool use_mean)
{
    const Eigen::MatrixXd colors = texture_colors(model, fit.params, use_mean);
    const VisibilityMask all(static_cast<std::size_t>(model.num_vertices()), true);
    return render_uv(colors, all, model.uv_coords, model.triangles, resolution);
}

void write_texture_fit(const TextureFit& fit, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17);
    out << "# texture_fit\n";
    out << "lambda " << fit.lambda << '\n';
    out << "residual " << fit.residual << '\n';
    out << "params " << fit.params.size() << '\n';
    for (Eigen::Index i = 0; i < fit.params.size(); ++i) {
        out << fit.params(i) << '\n';
    }
}

TextureFit read_texture_fit(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::string line;
    std::getline(in, line);
    if (line != "# texture_fit") {
        throw InputError("'" + path.string() + "' is not a texture fit file");
    }
    TextureFit fit;
    std::string key;
    Eigen::Index count = 0;
    if (!(in >> key >> fit.lambda) || key != "lambda" || !(in >> key >> fit.residual) || key != "residual" ||
        !(in >> key >> count) || key != "params" || count < 0) {
        throw InputError("malformed texture fit header in '" + path.string() + "'");
    }
    fit.params.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        if (!(in >> fit.params(i))) {
            throw InputError("texture fit '" + path.string() + "' is truncated");
        }
    }
    return fit;
}

} // namespace uvtex
