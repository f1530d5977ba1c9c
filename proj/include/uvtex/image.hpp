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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace uvtex {

/**
 * Dense boolean grid. Used for face masks, UV validity and blend regions.
 */
class Mask
{
public:
    Mask() = default;
    Mask(int width, int height, bool value = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool operator()(int y, int x) const { return bits_[index(y, x)] != 0; }
    void set(int y, int x, bool value) { bits_[index(y, x)] = value ? 1 : 0; }

    bool contains(int y, int x) const noexcept { return y >= 0 && x >= 0 && y < height_ && x < width_; }
    std::size_t count() const;
    bool none() const { return count() == 0; }
    bool same_shape(const Mask& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool operator==(const Mask&) const = default;

private:
    std::size_t index(int y, int x) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

Mask operator&(const Mask& a, const Mask& b);
Mask operator|(const Mask& a, const Mask& b);

/**
 * Row-major, channel-interleaved floating point image.
 *
 * Pixel (y, x) covers the continuous square [x, x+1) x [y, y+1); its center is
 * at (x + 0.5, y + 0.5). Every routine that takes continuous pixel coordinates
 * uses this convention.
 */
struct Image
{
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;
    std::optional<Mask> mask; ///< Absent means every pixel is valid.

    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0);

    double& operator()(int y, int x, int c) { return data[offset(y, x, c)]; }
    double operator()(int y, int x, int c) const { return data[offset(y, x, c)]; }

    bool valid(int y, int x) const { return !mask || (*mask)(y, x); }
    bool same_shape(const Image& other) const noexcept
    {
        return width == other.width && height == other.height && channels == other.channels;
    }
    std::size_t offset(int y, int x, int c) const noexcept
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels) +
               static_cast<std::size_t>(c);
    }
    /// The mask if present, otherwise an all-true mask.
    Mask validity() const;
};

/**
 * Square texture atlas with per-texel validity. Invalid texels hold 0.
 */
struct UVMap
{
    Image texels;
    Mask valid;

    UVMap() = default;
    explicit UVMap(int resolution, int channels = 3);

    int resolution() const noexcept { return texels.width; }
    int channels() const noexcept { return texels.channels; }

    double& operator()(int y, int x, int c) { return texels(y, x, c); }
    double operator()(int y, int x, int c) const { return texels(y, x, c); }

    /// Copy of the texels carrying `valid` as the image mask.
    Image as_image() const;
    /// Zero every invalid texel.
    void zero_invalid();
};

/// Bilinear lookup at continuous pixel coordinates, clamped to the border pixel centers.
double sample_bilinear(const Image& image, double x, double y, int channel);

/// Continuous pixel coordinate -> [-1, 1], with -1/+1 at the first/last pixel center.
double to_normalized(double pixel, int extent);
/// Inverse of to_normalized, giving a pixel index coordinate (pixel centers at integers).
double from_normalized(double coord, int extent);

Mask mirror_horizontal(const Mask& mask);
Image mirror_horizontal(const Image& image);
UVMap mirror_horizontal(const UVMap& uv);

bool all_finite(std::span<const double> values);

} // namespace uvtex
