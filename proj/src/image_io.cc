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

#include "pixelrl/image_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "pixelrl/error.h"

namespace pixelrl {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

PixelGrid read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  PixelGrid grid(static_cast<int>(image.height), static_cast<int>(image.width),
                 color ? 3 : 1);
  auto values = grid.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = bytes[i] / 255.0f;
  return grid;
}

void write_png(const std::filesystem::path& path, int height, int width,
               png_uint_32 format, std::span<const std::uint8_t> bytes,
               std::span<const Rgb8> palette) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  image.colormap_entries = static_cast<png_uint_32>(palette.size());
  const void* colormap = palette.empty() ? nullptr : palette.data();
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0,
                               colormap)) {
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

int read_pnm_int(std::istream& in) {
  int value = 0;
  in >> std::ws;
  while (in.peek() == '#') {
    std::string comment;
    std::getline(in, comment);
    in >> std::ws;
  }
  if (!(in >> value)) throw DataError("malformed PNM header");
  return value;
}

PixelGrid read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  const bool ascii = magic == "P2" || magic == "P3";
  const bool gray = magic == "P2" || magic == "P5";
  if (!ascii && magic != "P5" && magic != "P6") {
    throw DataError("unsupported PNM type '" + magic + "' in " + path.string());
  }
  const int width = read_pnm_int(in);
  const int height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw DataError("unsupported PNM geometry or depth in " + path.string());
  }
  const int channels = gray ? 1 : 3;
  PixelGrid grid(height, width, channels);
  if (ascii) {
    for (float& v : grid.values()) v = read_pnm_int(in) / float(maxval);
  } else {
    in.get();  // single whitespace after maxval
    std::vector<std::uint8_t> bytes(grid.size());
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
      throw DataError("truncated PNM payload in " + path.string());
    }
    auto values = grid.values();
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      values[i] = bytes[i] / float(maxval);
    }
  }
  return grid;
}

}  // namespace

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

PixelGrid read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  throw DataError("unsupported image extension: " + path.string());
}

void write_image(const std::filesystem::path& path, const PixelGrid& grid) {
  std::vector<std::uint8_t> bytes(grid.size());
  auto values = grid.values();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(values[i]);

  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_png(path, grid.height(), grid.width(),
              grid.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB, bytes, {});
    return;
  }
  if (ext == ".pgm" || ext == ".ppm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << (grid.channels() == 1 ? "P5" : "P6") << "\n"
        << grid.width() << " " << grid.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    return;
  }
  throw DataError("unsupported image extension: " + path.string());
}

void write_indexed_png(const std::filesystem::path& path, int height, int width,
                       std::span<const std::uint8_t> indices,
                       std::span<const Rgb8> palette) {
  if (indices.size() != static_cast<std::size_t>(height) * width) {
    throw ShapeError("write_indexed_png: index count does not match dimensions");
  }
  if (palette.empty() || palette.size() > 256) {
    throw InvalidArgument("write_indexed_png: palette must hold 1..256 colors");
  }
  write_png(path, height, width, PNG_FORMAT_RGB_COLORMAP, indices, palette);
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_extension(entry.path());
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace pixelrl
