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

#include <filesystem>
#include <vector>

namespace uvtex {

struct TextureFit
{
    Eigen::VectorXd params;
    double residual = 0.0; ///< masked data term at params
    double lambda = 0.0;
};

/**
 * Masked ridge regression
 *
 *   min_p ||(c' - W p) .* m||^2 + lambda ||p||^2,   c' = c - mean (if use_mean) or c,
 *
 * solved through the normal equations (W^T M W + lambda I) p = W^T M c' with a
 * Cholesky-type factorization. `row_mask` has one entry per row of W.
 *
 * Throws NumericalError when lambda = 0 and the masked system is rank
 * deficient, InputError on non-finite input or negative lambda.
 */
TextureFit fit_texture(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mean, const Eigen::VectorXd& colors,
                       const std::vector<bool>& row_mask, double lambda, bool use_mean = true);

/// Model-level wrapper: colors are N x 3, the vertex mask is expanded to the 3N rgb rows.
TextureFit fit_texture(const MorphableModel& model, const Eigen::MatrixXd& colors, const VisibilityMask& mask,
                       double lambda, bool use_mean = true);

/// 1e-3 * trace(W^T M W) / K.
double default_texture_lambda(const MorphableModel& model, const VisibilityMask& mask);

/// N x 3 vertex colors clamp(mean * [use_mean] + W p, 0, 1).
Eigen::MatrixXd texture_colors(const MorphableModel& model, const Eigen::VectorXd& params, bool use_mean = true);

/// UV map of the fitted texture, valid over the full UV triangle coverage.
UVMap texture_to_uv(const MorphableModel& model, const TextureFit& fit, int resolution, bool use_mean = true);

/**
 * Text form:
 *   # texture_fit
 *   lambda <value>
 *   residual <value>
 *   params <K>
 *   <one parameter per line>
 */
void write_texture_fit(const TextureFit& fit, const std::filesystem::path& path);
TextureFit read_texture_fit(const std::filesystem::path& path);

} // namespace uvtex
