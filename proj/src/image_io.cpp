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
#include "uvtex/image_io.hpp"

#include "uvtex/error.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace uvtex {

namespace fs = std::filesystem;

namespace {

std::uint8_t quantize(double v)
{
    if (!std::isfinite(v)) {
        v = 0.0;
    }
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct PngBuffer
{
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> bytes;
};

PngBuffer read_png_bytes(const fs::path& path, bool force_gray)
{
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
        throw InputError("cannot read PNG '" + path.string() + "': " + img.message);
    }
    const bool gray = force_gray || (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
    img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    PngBuffer out;
    out.width = static_cast<int>(img.width);
    out.height = static_cast<int>(img.height);
    out.channels = gray ? 1 : 3;
    out.bytes.resize(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, out.bytes.data(), 0, nullptr)) {
        png_image_free(&img);
        throw InputError("cannot decode PNG '" + path.string() + "': " + img.message);
    }
    return out;
}

void write_png_bytes(const fs::path& path, int width, int height, int channels, const std::vector<std::uint8_t>& bytes)
{
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
        throw InputError("cannot write PNG '" + path.string() + "': " + img.message);
    }
}

bool has_extension(const fs::path& path, const char* ext)
{
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

} // namespace

Image read_png(const fs::path& path)
{
    const PngBuffer buf = read_png_bytes(path, false);
    Image out(buf.width, buf.height, buf.channels);
    for (std::size_t i = 0; i < buf.bytes.size(); ++i) {
        out.data[i] = buf.bytes[i] / 255.0;
    }
    return out;
}

void write_png(const Image& image, const fs::path& path)
{
    if (image.channels != 1 && image.channels != 3) {
        throw InputError("write_png: only 1 or 3 channels are supported");
    }
    std::vector<std::uint8_t> bytes(image.data.size());
    std::transform(image.data.begin(), image.data.end(), bytes.begin(), quantize);
    write_png_bytes(path, image.width, image.height, image.channels, bytes);
}

Mask read_mask_png(const fs::path& path)
{
    const PngBuffer buf = read_png_bytes(path, true);
    Mask out(buf.width, buf.height);
    for (int y = 0; y < buf.height; ++y) {
        for (int x = 0; x < buf.width; ++x) {
            out.set(y, x, buf.bytes[static_cast<std::size_t>(y) * buf.width + x] >= 128);
        }
    }
    return out;
}

void write_mask_png(const Mask& mask, const fs::path& path)
{
    std::vector<std::uint8_t> bytes(mask.bits().size());
    std::transform(mask.bits().begin(), mask.bits().end(), bytes.begin(),
                   [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
    write_png_bytes(path, mask.width(), mask.height(), 1, bytes);
}

Image read_pfm(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open PFM '" + path.string() + "'");
    }
    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    in.get();
    if (!in || (magic != "PF" && magic != "Pf") || width <= 0 || height <= 0 || scale == 0.0) {
        throw InputError("malformed PFM header in '" + path.string() + "'");
    }
    const int channels = magic == "PF" ? 3 : 1;
    const bool little = scale < 0.0;
    const std::size_t row_floats = static_cast<std::size_t>(width) * channels;
    std::vector<std::uint32_t> raw(row_floats * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (in.gcount() != static_cast<std::streamsize>(raw.size() * 4)) {
        throw InputError("truncated PFM '" + path.string() + "'");
    }
    const bool swap = little != (std::endian::native == std::endian::little);
    Image out(width, height, channels);
    for (int row = 0; row < height; ++row) {
        const int y = height - 1 - row;
        for (std::size_t i = 0; i < row_floats; ++i) {
            std::uint32_t bits = raw[row * row_floats + i];
            if (swap) {
                bits = __builtin_bswap32(bits);
            }
            out.data[y * row_floats + i] = static_cast<double>(std::bit_cast<float>(bits));
        }
    }
    return out;
}

void write_pfm(const Image& image, const fs::path& path)
{
    if (image.channels != 1 && image.channels != 3) {
        throw InputError("write_pfm: only 1 or 3 channels are supported");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write PFM '" + path.string() + "'");
    }
    out << (image.channels == 3 ? "PF" : "Pf") << '\n' << image.width << ' ' << image.height << '\n' << "-1.0\n";
    const std::size_t row_floats = static_cast<std::size_t>(image.width) * image.channels;
    std::vector<std::uint32_t> row(row_floats);
    for (int y = image.height - 1; y >= 0; --y) {
        for (std::size_t i = 0; i < row_floats; ++i) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(image.data[y * row_floats + i]));
            if constexpr (std::endian::native != std::endian::little) {
                bits = __builtin_bswap32(bits);
            }
            row[i] = bits;
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    }
}

Image read_image(const fs::path& path)
{
    return has_extension(path, ".pfm") ? read_pfm(path) : read_png(path);
}

void write_image(const Image& image, const fs::path& path)
{
    if (has_extension(path, ".pfm")) {
        write_pfm(image, path);
    } else {
        write_png(image, path);
    }
}

void save_uv_map(const UVMap& uv, const fs::path& stem)
{
    const std::string base = stem.string();
    write_png(uv.texels, base + ".png");
    write_pfm(uv.texels, base + ".pfm");
    write_mask_png(uv.valid, base + "_valid.png");
}

UVMap load_uv_map(const fs::path& stem)
{
    const std::string base = stem.string();
    UVMap uv;
    uv.texels = fs::exists(base + ".pfm") ? read_pfm(base + ".pfm") : read_png(base + ".png");
    if (uv.texels.width != uv.texels.height) {
        throw InputError("UV map '" + base + "' is not square");
    }
    uv.valid = fs::exists(base + "_valid.png") ? read_mask_png(base + "_valid.png")
                                               : Mask(uv.texels.width, uv.texels.height, true);
    if (!uv.valid.same_shape(uv.texels.validity())) {
        throw InputError("UV map '" + base + "': validity size does not match texels");
    }
    uv.zero_invalid();
    return uv;
}

} // namespace uvtex
