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
#include "uvtex/params_io.hpp"

#include "uvtex/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>
#include <vector>

namespace uvtex {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::vector<double>> read_sections(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open parameter file '" + path.string() + "'");
    }
    std::map<std::string, std::vector<double>> sections;
    std::vector<double>* current = nullptr;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                throw InputError(path.string() + ":" + std::to_string(line_no) + ": malformed section header");
            }
            const std::string name = t.substr(1, t.size() - 2);
            if (name != "alpha_id" && name != "alpha_exp" && name != "rotation" && name != "translation" &&
                name != "scale") {
                throw InputError(path.string() + ":" + std::to_string(line_no) + ": unknown section '" + name + "'");
            }
            if (sections.count(name) != 0) {
                throw InputError(path.string() + ":" + std::to_string(line_no) + ": duplicate section '" + name + "'");
            }
            current = &sections[name];
            continue;
        }
        if (current == nullptr) {
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": value outside any section");
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": invalid number '" + t + "'");
        }
        current->push_back(v);
    }
    return sections;
}

void expect_count(const std::vector<double>& values, std::size_t n, const std::string& name)
{
    if (values.size() != n) {
        throw InputError("section [" + name + "] needs " + std::to_string(n) + " values, found " +
                         std::to_string(values.size()));
    }
}

Pose pose_from(const std::map<std::string, std::vector<double>>& sections)
{
    Pose pose;
    if (const auto it = sections.find("rotation"); it != sections.end()) {
        expect_count(it->second, 9, "rotation");
        for (int i = 0; i < 9; ++i) {
            pose.rotation(i / 3, i % 3) = it->second[static_cast<std::size_t>(i)];
        }
    }
    if (const auto it = sections.find("translation"); it != sections.end()) {
        expect_count(it->second, 3, "translation");
        pose.translation = Eigen::Vector3d(it->second[0], it->second[1], it->second[2]);
    }
    if (const auto it = sections.find("scale"); it != sections.end()) {
        expect_count(it->second, 1, "scale");
        pose.scale = it->second[0];
    }
    pose.validate();
    return pose;
}

Eigen::VectorXd to_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

FaceParams read_params(const std::filesystem::path& path)
{
    const auto sections = read_sections(path);
    FaceParams params;
    const auto id = sections.find("alpha_id");
    const auto exp = sections.find("alpha_exp");
    if (id == sections.end() || exp == sections.end()) {
        throw InputError("parameter file '" + path.string() + "' needs [alpha_id] and [alpha_exp] sections");
    }
    params.alpha_id = to_vector(id->second);
    params.alpha_exp = to_vector(exp->second);
    params.pose = pose_from(sections);
    return params;
}

Pose read_pose(const std::filesystem::path& path)
{
    return pose_from(read_sections(path));
}

void write_params(const FaceParams& params, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write parameter file '" + path.string() + "'");
    }
    out << std::setprecision(17);
    out << "[alpha_id]\n";
    for (Eigen::Index i = 0; i < params.alpha_id.size(); ++i) {
        out << params.alpha_id(i) << '\n';
    }
    out << "[alpha_exp]\n";
    for (Eigen::Index i = 0; i < params.alpha_exp.size(); ++i) {
        out << params.alpha_exp(i) << '\n';
    }
    out << "[rotation]\n";
    for (int i = 0; i < 9; ++i) {
        out << params.pose.rotation(i / 3, i % 3) << '\n';
    }
    out << "[translation]\n";
    for (int i = 0; i < 3; ++i) {
        out << params.pose.translation(i) << '\n';
    }
    out << "[scale]\n" << params.pose.scale << '\n';
}

} // namespace uvtex
