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
#include "uvtex/morphable_model.hpp"

#include "uvtex/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <string>
#include <utility>

namespace uvtex {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'U', 'V', 'M', 'M'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kFlagUvDuplicates = 1u << 16;
constexpr std::size_t kHeaderBytes = 4 + 6 * 4;

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

bool finite(const Eigen::MatrixXd& m)
{
    return m.allFinite();
}

class Reader
{
public:
    explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

    std::uint32_t u32()
    {
        std::uint32_t v;
        std::memcpy(&v, bytes_.data() + pos_, 4);
        pos_ += 4;
        return v;
    }

    void f64(double* dst, std::size_t count)
    {
        std::memcpy(dst, bytes_.data() + pos_, count * 8);
        pos_ += count * 8;
    }

    Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols)
    {
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
        f64(m.data(), static_cast<std::size_t>(rows * cols));
        return m;
    }

private:
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

void write_u32(std::ofstream& out, std::uint32_t v)
{
    out.write(reinterpret_cast<const char*>(&v), 4);
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m)
{
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * 8));
}

} // namespace

void MorphableModel::validate() const
{
    const Eigen::Index n = uv_coords.rows();
    if (n == 0) {
        throw ModelError(ModelErrc::dimension_mismatch, "model has no vertices");
    }
    const Eigen::Index rows = 3 * n;
    if (mean_shape.size() != rows || id_basis.rows() != rows || exp_basis.rows() != rows ||
        mean_texture.size() != rows || tex_basis.rows() != rows) {
        throw ModelError(ModelErrc::dimension_mismatch, "shape/texture arrays must have 3N rows");
    }
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (int idx : triangles[t]) {
            if (idx < 0 || idx >= n) {
                throw ModelError(ModelErrc::index_out_of_range,
                                 "triangle " + std::to_string(t) + " references vertex " + std::to_string(idx) +
                                     " but the model has " + std::to_string(n) + " vertices");
            }
        }
    }
    if (!finite(mean_shape) || !finite(id_basis) || !finite(exp_basis) || !finite(mean_texture) ||
        !finite(tex_basis) || !finite(uv_coords)) {
        throw ModelError(ModelErrc::non_finite, "model contains non-finite values");
    }
    if ((uv_coords.array() < 0.0).any() || (uv_coords.array() > 1.0).any()) {
        throw ModelError(ModelErrc::invalid_uv, "uv coordinates must lie in [0, 1]");
    }
    if (!uv_duplicates_allowed) {
        std::set<std::pair<double, double>> seen;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!seen.emplace(uv_coords(i, 0), uv_coords(i, 1)).second) {
                throw ModelError(ModelErrc::invalid_uv,
                                 "vertex " + std::to_string(i) + " repeats a uv coordinate pair");
            }
        }
    }
}

void Pose::validate() const
{
    if (!rotation.allFinite() || !translation.allFinite() || !std::isfinite(scale)) {
        throw InputError("pose contains non-finite values");
    }
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-6 || std::abs(rotation.determinant() - 1.0) > 1e-6) {
        throw InputError("pose rotation is not a proper rotation matrix");
    }
    if (!(scale > 0.0)) {
        throw InputError("pose scale must be positive");
    }
}

Eigen::Matrix3d rotation_from_euler(double yaw, double pitch, double roll)
{
    const Eigen::Matrix3d ry = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
    const Eigen::Matrix3d rx = Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()).toRotationMatrix();
    const Eigen::Matrix3d rz = Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    return rz * rx * ry;
}

MorphableModel load_model(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ModelError(ModelErrc::io, "cannot open model file '" + path.string() + "'");
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ModelError(ModelErrc::malformed_header, "'" + path.string() + "' is not a UVMM container");
    }
    const std::size_t file_size = bytes.size();
    Reader reader(std::move(bytes));
    reader.u32(); // magic
    const std::uint32_t version_word = reader.u32();
    if ((version_word & 0xffffu) != kFormatVersion || (version_word & ~(0xffffu | kFlagUvDuplicates)) != 0) {
        throw ModelError(ModelErrc::malformed_header, "unsupported container version " + std::to_string(version_word));
    }
    const std::uint64_t n = reader.u32();
    const std::uint64_t t = reader.u32();
    const std::uint64_t k_id = reader.u32();
    const std::uint64_t k_exp = reader.u32();
    const std::uint64_t k_tex = reader.u32();
    if (n == 0) {
        throw ModelError(ModelErrc::dimension_mismatch, "container declares zero vertices");
    }
    const std::uint64_t doubles = 3 * n * (2 + k_id + k_exp + k_tex) + 2 * n;
    const std::uint64_t expected = kHeaderBytes + 8 * doubles + 4 * 3 * t;
    if (expected != file_size) {
        throw ModelError(ModelErrc::dimension_mismatch,
                         "container size " + std::to_string(file_size) + " does not match declared dimensions (" +
                             std::to_string(expected) + " bytes expected)");
    }

    const auto rows = static_cast<Eigen::Index>(3 * n);
    MorphableModel model;
    model.uv_duplicates_allowed = (version_word & kFlagUvDuplicates) != 0;
    model.mean_shape = reader.matrix(rows, 1);
    model.id_basis = reader.matrix(rows, static_cast<Eigen::Index>(k_id));
    model.exp_basis = reader.matrix(rows, static_cast<Eigen::Index>(k_exp));
    model.mean_texture = reader.matrix(rows, 1);
    model.tex_basis = reader.matrix(rows, static_cast<Eigen::Index>(k_tex));
    model.uv_coords = reader.matrix(static_cast<Eigen::Index>(n), 2);
    model.triangles.resize(t);
    for (auto& tri : model.triangles) {
        for (int& idx : tri) {
            const std::uint32_t v = reader.u32();
            idx = v >= n ? static_cast<int>(std::min<std::uint64_t>(v, 0x7fffffff)) : static_cast<int>(v);
        }
    }
    model.validate();
    return model;
}

void save_model(const MorphableModel& model, const fs::path& path)
{
    model.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ModelError(ModelErrc::io, "cannot write model file '" + path.string() + "'");
    }
    out.write(kMagic, 4);
    write_u32(out, kFormatVersion | (model.uv_duplicates_allowed ? kFlagUvDuplicates : 0u));
    write_u32(out, static_cast<std::uint32_t>(model.num_vertices()));
    write_u32(out, static_cast<std::uint32_t>(model.num_triangles()));
    write_u32(out, static_cast<std::uint32_t>(model.identity_dims()));
    write_u32(out, static_cast<std::uint32_t>(model.expression_dims()));
    write_u32(out, static_cast<std::uint32_t>(model.texture_dims()));
    write_matrix(out, model.mean_shape);
    write_matrix(out, model.id_basis);
    write_matrix(out, model.exp_basis);
    write_matrix(out, model.mean_texture);
    write_matrix(out, model.tex_basis);
    write_matrix(out, model.uv_coords);
    for (const auto& tri : model.triangles) {
        for (int idx : tri) {
            write_u32(out, static_cast<std::uint32_t>(idx));
        }
    }
    if (!out) {
        throw ModelError(ModelErrc::io, "failed while writing '" + path.string() + "'");
    }
}

Vertices synthesize_shape(const MorphableModel& model, const Eigen::VectorXd& alpha_id,
                          const Eigen::VectorXd& alpha_exp)
{
    if (alpha_id.size() != model.id_basis.cols() || alpha_exp.size() != model.exp_basis.cols()) {
        throw InputError("synthesize_shape: coefficient lengths (" + std::to_string(alpha_id.size()) + ", " +
                         std::to_string(alpha_exp.size()) + ") do not match basis columns (" +
                         std::to_string(model.id_basis.cols()) + ", " + std::to_string(model.exp_basis.cols()) + ")");
    }
    const Eigen::VectorXd s = model.mean_shape + model.id_basis * alpha_id + model.exp_basis * alpha_exp;
    Vertices out;
    out.positions = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(s.data(), s.size() / 3, 3);
    return out;
}

ProjectedVertices project(const Vertices& vertices, const Pose& pose)
{
    pose.validate();
    const Eigen::Matrix3Xd camera =
        pose.scale * ((pose.rotation * vertices.positions.transpose()).colwise() + pose.translation);
    ProjectedVertices out;
    out.points = camera.topRows<2>().transpose();
    out.depth = camera.row(2).transpose();
    return out;
}

} // namespace uvtex
