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

#ifndef PIXELRL_MAP2D_H_
#define PIXELRL_MAP2D_H_

#include <cstddef>
#include <vector>

namespace pixelrl {

// Scalar per-pixel map (rewards, values, returns, advantages).
struct Map2D {
  int height = 0;
  int width = 0;
  std::vector<double> v;

  Map2D() = default;
  Map2D(int h, int w, double fill = 0.0)
      : height(h), width(w), v(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int y, int x) { return v[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Map2D& o) const {
    return height == o.height && width == o.width;
  }
  double mean() const {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  }

  friend bool operator==(const Map2D&, const Map2D&) = default;
};

}  // namespace pixelrl

#endif  // PIXELRL_MAP2D_H_
