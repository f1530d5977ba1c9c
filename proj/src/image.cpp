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
#include "uvtex/image.hpp"

#include "uvtex/error.hpp"

#include <algorithm>
#include <cmath>

namespace uvtex {

Mask::Mask(int width, int height, bool value) : width_(width), height_(height)
{
    if (width < 0 || height < 0) {
        throw InputError("Mask: negative dimensions");
    }
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value ? 1 : 0);
}

std::size_t Mask::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

template <typename Op>
Mask combine(const Mask& a, const Mask& b, Op op)
{
    if (!a.same_shape(b)) {
        throw InputError("Mask: shape mismatch");
    }
    Mask out(a.width(), a.height());
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            out.set(y, x, op(a(y, x), b(y, x)));
        }
    }
    return out;
}

} // namespace

Mask operator&(const Mask& a, const Mask& b)
{
    return combine(a, b, [](bool p, bool q) { return p && q; });
}

Mask operator|(const Mask& a, const Mask& b)
{
    return combine(a, b, [](bool p, bool q) { return p || q; });
}

Image::Image(int width, int height, int channels, double fill)
    : width(width), height(height), channels(channels)
{
    if (width < 0 || height < 0 || channels < 0) {
        throw InputError("Image: negative dimensions");
    }
    data.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                    static_cast<std::size_t>(channels),
                fill);
}

Mask Image::validity() const
{
    return mask ? *mask : Mask(width, height, true);
}

UVMap::UVMap(int resolution, int channels) : texels(resolution, resolution, channels), valid(resolution, resolution)
{
}

Image UVMap::as_image() const
{
    Image out = texels;
    out.mask = valid;
    return out;
}

void UVMap::zero_invalid()
{
    for (int y = 0; y < resolution(); ++y) {
        for (int x = 0; x < resolution(); ++x) {
            if (!valid(y, x)) {
                for (int c = 0; c < channels(); ++c) {
                    texels(y, x, c) = 0.0;
                }
            }
        }
    }
}

double sample_bilinear(const Image& image, double x, double y, int channel)
{
    const double fx = std::clamp(x - 0.5, 0.0, static_cast<double>(image.width - 1));
    const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(image.height - 1));
    const int x0 = std::min(static_cast<int>(std::floor(fx)), std::max(image.width - 2, 0));
    const int y0 = std::min(static_cast<int>(std::floor(fy)), std::max(image.height - 2, 0));
    const int x1 = std::min(x0 + 1, image.width - 1);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double ax = fx - x0;
    const double ay = fy - y0;
    const double top = (1.0 - ax) * image(y0, x0, channel) + ax * image(y0, x1, channel);
    const double bottom = (1.0 - ax) * image(y1, x0, channel) + ax * image(y1, x1, channel);
    return (1.0 - ay) * top + ay * bottom;
}

double to_normalized(double pixel, int extent)
{
    if (extent <= 1) {
        return 0.0;
    }
    return (pixel - 0.5) / static_cast<double>(extent - 1) * 2.0 - 1.0;
}

double from_normalized(double coord, int extent)
{
    if (extent <= 1) {
        return 0.0;
    }
    return (coord + 1.0) * 0.5 * static_cast<double>(extent - 1);
}

Mask mirror_horizontal(const Mask& mask)
{
    Mask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            out.set(y, x, mask(y, mask.width() - 1 - x));
        }
    }
    return out;
}

Image mirror_horizontal(const Image& image)
{
    Image out(image.width, image.height, image.channels);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < image.channels; ++c) {
                out(y, x, c) = image(y, image.width - 1 - x, c);
            }
        }
    }
    if (image.mask) {
        out.mask = mirror_horizontal(*image.mask);
    }
    return out;
}

UVMap mirror_horizontal(const UVMap& uv)
{
    UVMap out;
    out.texels = mirror_horizontal(uv.texels);
    out.valid = mirror_horizontal(uv.valid);
    return out;
}

bool all_finite(std::span<const double> values)
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

} // namespace uvtex
