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

#include <filesystem>

namespace uvtex {

/// 8-bit PNG, grayscale or RGB. Values are mapped to [0, 1].
Image read_png(const std::filesystem::path& path);
/// 8-bit PNG with 1 or 3 channels. Values are clamped to [0, 1] and rounded.
void write_png(const Image& image, const std::filesystem::path& path);

Mask read_mask_png(const std::filesystem::path& path);
/// Single channel PNG, 255 = true.
void write_mask_png(const Mask& mask, const std::filesystem::path& path);

/// Portable float map ("PF" for 3 channels, "Pf" for 1), little-endian, rows bottom to top.
Image read_pfm(const std::filesystem::path& path);
void write_pfm(const Image& image, const std::filesystem::path& path);

/// Dispatch on extension: ".pfm" or ".png".
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);

/**
 * A UV map on disk is a set of files sharing a stem:
 *   <stem>.png        8-bit texels
 *   <stem>.pfm        float32 texels (lossless)
 *   <stem>_valid.png  validity, 255 = valid
 */
void save_uv_map(const UVMap& uv, const std::filesystem::path& stem);
/// Loads `<stem>.pfm` when present, else `<stem>.png`, plus `<stem>_valid.png`.
UVMap load_uv_map(const std::filesystem::path& stem);

} // namespace uvtex
