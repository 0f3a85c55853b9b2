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

#ifndef PIXELRL_IMAGE_H_
#define PIXELRL_IMAGE_H_

#include <cstddef>
#include <span>
#include <vector>

namespace pixelrl {

enum class ColorSpace {
  kIntensity,  // gray or RGB intensities in [0,1]
  kLab,        // CIELab, L in [0,100], a/b unbounded
};

// H x W x C float image stored row-major with interleaved channels.
class PixelGrid {
 public:
  PixelGrid() = default;
  PixelGrid(int height, int width, int channels, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  ColorSpace space() const { return space_; }
  void set_space(ColorSpace space) { space_ = space; }

  float& at(int y, int x, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int y, int x, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  // Replicate (edge-clamped) access.
  float clamped(int y, int x, int c = 0) const;

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  bool same_shape(const PixelGrid& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const PixelGrid& a, const PixelGrid& b) {
    return a.same_shape(b) && a.space_ == b.space_ && a.data_ == b.data_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  ColorSpace space_ = ColorSpace::kIntensity;
  std::vector<float> data_;
};

void clip_unit(PixelGrid& grid);

// Throws ShapeError unless both grids have equal dimensions.
void require_same_shape(const PixelGrid& a, const PixelGrid& b,
                        const char* context);

PixelGrid crop(const PixelGrid& grid, int top, int left, int height, int width);
PixelGrid flip_horizontal(const PixelGrid& grid);
// Rotates counter-clockwise by quarter_turns * 90 degrees.
PixelGrid rotate90(const PixelGrid& grid, int quarter_turns);

// The eight symmetries of the square. Index bit 2 selects a horizontal flip
// applied before rotating by (index & 3) quarter turns.
PixelGrid dihedral(const PixelGrid& grid, int index);
PixelGrid inverse_dihedral(const PixelGrid& grid, int index);

// ITU-R BT.601 luma for RGB grids; gray grids are returned unchanged.
PixelGrid to_luminance(const PixelGrid& grid);

}  // namespace pixelrl

#endif  // PIXELRL_IMAGE_H_
