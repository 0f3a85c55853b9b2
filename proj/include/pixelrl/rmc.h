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

#ifndef PIXELRL_RMC_H_
#define PIXELRL_RMC_H_

#include <vector>

#include "pixelrl/map2d.h"

namespace pixelrl {

// Square kernel w over neighbor offsets d in [-radius, radius]^2.
struct RmcKernel {
  int size = 33;
  std::vector<double> weights;  // row-major, offset (dy, dx) at (dy+r)*size + dx+r
  // A disabled kernel skips the convolution entirely.
  bool enabled = true;

  static RmcKernel identity(int size, bool enabled = true);

  int radius() const { return size / 2; }
  double& at(int dy, int dx) {
    return weights[static_cast<std::size_t>(dy + radius()) * size + dx + radius()];
  }
  double at(int dy, int dx) const {
    return weights[static_cast<std::size_t>(dy + radius()) * size + dx + radius()];
  }
  bool is_identity() const;
  // Throws InvalidArgument for even or non-positive sizes.
  void validate() const;
};

enum class Bootstrap { kZero, kValue };

struct ReturnConfig {
  double gamma = 0.95;
  Bootstrap bootstrap = Bootstrap::kZero;

  void validate() const;
};

// out(i) = sum_d w(d) * map(i - d), zero outside the image.
Map2D convolve_map(const Map2D& map, const RmcKernel& w);
// Adjoint of convolve_map: out(j) = sum_d w(d) * map(j + d).
Map2D convolve_map_transpose(const Map2D& map, const RmcKernel& w);

// Backward recursion R <- r(k) + gamma * (w * R) from R = bootstrap. Entry k
// of the result is the return of step k. A disabled kernel gives the plain
// n-step return. Throws ShapeError when maps disagree in shape.
std::vector<Map2D> compute_returns(const std::vector<Map2D>& rewards,
                                   const Map2D& bootstrap, const RmcKernel& w,
                                   const ReturnConfig& config);

// Gradient with respect to w.weights of a loss whose gradient with respect
// to returns[k] is upstream[k], rewards and bootstrap held constant. Zero for
// a disabled kernel.
std::vector<double> kernel_gradient(const std::vector<Map2D>& returns,
                                    const Map2D& bootstrap,
                                    const std::vector<Map2D>& upstream,
                                    const RmcKernel& w, const ReturnConfig& config);

}  // namespace pixelrl

#endif  // PIXELRL_RMC_H_
