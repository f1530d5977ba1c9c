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

#include "uvtex/morphable_model.hpp"

#include <Eigen/Core>

#include <filesystem>

namespace uvtex {

/// Shape and pose parameters as produced by an upstream shape regressor.
struct FaceParams
{
    Eigen::VectorXd alpha_id;
    Eigen::VectorXd alpha_exp;
    Pose pose;
};

/**
 * Plain-text parameter file: section headers in brackets followed by one
 * value per line. Blank lines and lines starting with '#' are ignored.
 *
 *   [alpha_id]       identity coefficients
 *   [alpha_exp]      expression coefficients
 *   [rotation]       9 values, row-major
 *   [translation]    3 values, model units
 *   [scale]          1 value
 *
 * Missing pose sections keep their defaults (identity, zero, 1). Unknown
 * sections, malformed numbers and wrong value counts throw InputError.
 */
FaceParams read_params(const std::filesystem::path& path);
void write_params(const FaceParams& params, const std::filesystem::path& path);

/// Reads only the pose sections of a parameter file; the result is validated.
Pose read_pose(const std::filesystem::path& path);

} // namespace uvtex
