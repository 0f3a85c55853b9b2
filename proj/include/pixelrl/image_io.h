// Copyright 2026 The PixelRL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIXELRL_IMAGE_IO_H_
#define PIXELRL_IMAGE_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pixelrl/image.h"

namespace pixelrl {

// Reads an 8-bit PNG, PGM or PPM. Alpha channels are dropped; gray+alpha
// becomes gray. Throws DataError on unreadable or unsupported files.
PixelGrid read_image(const std::filesystem::path& path);

// Writes intensities quantized to 8 bits. The extension picks the format:
// .png, .pgm/.ppm (binary).
void write_image(const std::filesystem::path& path, const PixelGrid& grid);

using Rgb8 = std::array<std::uint8_t, 3>;

// Palette PNG with one byte index per pixel.
void write_indexed_png(const std::filesystem::path& path, int height, int width,
                       std::span<const std::uint8_t> indices,
                       std::span<const Rgb8> palette);

// Image files (png/pgm/ppm) directly inside `dir`, sorted by filename.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

std::uint8_t to_byte(float v);

}  // namespace pixelrl

#endif  // PIXELRL_IMAGE_IO_H_
