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

#include "pixelrl/image.h"

#include <algorithm>
#include <string>

#include "pixelrl/error.h"

namespace pixelrl {

PixelGrid::PixelGrid(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  if (height <= 0 || width <= 0) {
    throw ShapeError("PixelGrid: dimensions must be positive, got " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  if (channels != 1 && channels != 3) {
    throw ShapeError("PixelGrid: channels must be 1 or 3, got " +
                     std::to_string(channels));
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

float PixelGrid::clamped(int y, int x, int c) const {
  y = std::clamp(y, 0, height_ - 1);
  x = std::clamp(x, 0, width_ - 1);
  return at(y, x, c);
}

void clip_unit(PixelGrid& grid) {
  for (float& v : grid.values()) v = std::clamp(v, 0.0f, 1.0f);
}

void require_same_shape(const PixelGrid& a, const PixelGrid& b,
                        const char* context) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(context) + ": shape mismatch " +
                     std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                     "x" + std::to_string(a.channels()) + " vs " +
                     std::to_string(b.height()) + "x" + std::to_string(b.width()) +
                     "x" + std::to_string(b.channels()));
  }
}

PixelGrid crop(const PixelGrid& grid, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || height <= 0 || width <= 0 ||
      top + height > grid.height() || left + width > grid.width()) {
    throw ShapeError("crop: window exceeds image bounds");
  }
  PixelGrid out(height, width, grid.channels());
  out.set_space(grid.space());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < grid.channels(); ++c) {
        out.at(y, x, c) = grid.at(top + y, left + x, c);
      }
    }
  }
  return out;
}

PixelGrid flip_horizontal(const PixelGrid& grid) {
  PixelGrid out(grid.height(), grid.width(), grid.channels());
  out.set_space(grid.space());
  const int w = grid.width();
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < grid.channels(); ++c) {
        out.at(y, x, c) = grid.at(y, w - 1 - x, c);
      }
    }
  }
  return out;
}

PixelGrid rotate90(const PixelGrid& grid, int quarter_turns) {
  quarter_turns = ((quarter_turns % 4) + 4) % 4;
  if (quarter_turns == 0) return grid;
  const int h = grid.height();
  const int w = grid.width();
  const bool swap = quarter_turns % 2 == 1;
  PixelGrid out(swap ? w : h, swap ? h : w, grid.channels());
  out.set_space(grid.space());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      int sy = 0;
      int sx = 0;
      switch (quarter_turns) {
        case 1:  // counter-clockwise
          sy = x;
          sx = w - 1 - y;
          break;
        case 2:
          sy = h - 1 - y;
          sx = w - 1 - x;
          break;
        default:
          sy = h - 1 - x;
          sx = y;
          break;
      }
      for (int c = 0; c < grid.channels(); ++c) {
        out.at(y, x, c) = grid.at(sy, sx, c);
      }
    }
  }
  return out;
}

PixelGrid dihedral(const PixelGrid& grid, int index) {
  const PixelGrid base = (index & 4) ? flip_horizontal(grid) : grid;
  return rotate90(base, index & 3);
}

PixelGrid inverse_dihedral(const PixelGrid& grid, int index) {
  PixelGrid out = rotate90(grid, -(index & 3));
  return (index & 4) ? flip_horizontal(out) : out;
}

PixelGrid to_luminance(const PixelGrid& grid) {
  if (grid.channels() == 1) return grid;
  PixelGrid out(grid.height(), grid.width(), 1);
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      out.at(y, x) = 0.299f * grid.at(y, x, 0) + 0.587f * grid.at(y, x, 1) +
                     0.114f * grid.at(y, x, 2);
    }
  }
  return out;
}

}  // namespace pixelrl
