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

#include "pixelrl/rmc.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "pixelrl/error.h"

namespace pixelrl {

RmcKernel RmcKernel::identity(int size, bool enabled) {
  RmcKernel w;
  w.size = size;
  w.enabled = enabled;
  w.validate();
  w.weights.assign(static_cast<std::size_t>(size) * size, 0.0);
  w.at(0, 0) = 1.0;
  return w;
}

bool RmcKernel::is_identity() const {
  for (int dy = -radius(); dy <= radius(); ++dy) {
    for (int dx = -radius(); dx <= radius(); ++dx) {
      if (at(dy, dx) != (dy == 0 && dx == 0 ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

void RmcKernel::validate() const {
  if (size <= 0 || size % 2 == 0) {
    throw InvalidArgument("RMC kernel size must be odd and positive, got " +
                          std::to_string(size));
  }
  if (!weights.empty() && weights.size() != static_cast<std::size_t>(size) * size) {
    throw ShapeError("RMC kernel weights do not match its size");
  }
}

void ReturnConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("discount must lie in (0, 1]");
  }
}

namespace {

// Zero weights are skipped, so the identity kernel reproduces its input exactly.
template <int kSign>
Map2D correlate(const Map2D& map, const RmcKernel& w) {
  Map2D out(map.height, map.width);
  const int r = w.radius();
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double k = w.at(dy, dx);
      if (k == 0.0) continue;
      // out(y, x) += k * map(y - s*dy, x - s*dx)
      const int oy = -kSign * dy;
      const int ox = -kSign * dx;
      const int y0 = std::max(0, -oy), y1 = std::min(map.height, map.height - oy);
      const int x0 = std::max(0, -ox), x1 = std::min(map.width, map.width - ox);
      for (int y = y0; y < y1; ++y) {
        double* dst = &out.v[static_cast<std::size_t>(y) * map.width];
        const double* src = &map.v[static_cast<std::size_t>(y + oy) * map.width];
        for (int x = x0; x < x1; ++x) dst[x] += k * src[x + ox];
      }
    }
  }
  return out;
}

void check_kernel(const RmcKernel& w) {
  w.validate();
  if (w.weights.size() != static_cast<std::size_t>(w.size) * w.size) {
    throw ShapeError("RMC kernel has no weights");
  }
}

}  // namespace

Map2D convolve_map(const Map2D& map, const RmcKernel& w) {
  check_kernel(w);
  return correlate<1>(map, w);
}

Map2D convolve_map_transpose(const Map2D& map, const RmcKernel& w) {
  check_kernel(w);
  return correlate<-1>(map, w);
}

std::vector<Map2D> compute_returns(const std::vector<Map2D>& rewards,
                                   const Map2D& bootstrap, const RmcKernel& w,
                                   const ReturnConfig& config) {
  config.validate();
  if (rewards.empty()) throw InvalidArgument("compute_returns: empty rollout");
  for (const Map2D& r : rewards) {
    if (!r.same_shape(bootstrap)) {
      throw ShapeError("compute_returns: reward and bootstrap shapes differ");
    }
  }
  std::vector<Map2D> returns(rewards.size());
  Map2D acc = bootstrap;
  for (int k = static_cast<int>(rewards.size()) - 1; k >= 0; --k) {
    for (double& v : acc.v) v *= config.gamma;
    if (w.enabled) acc = convolve_map(acc, w);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.v[i] = rewards[k].v[i] + acc.v[i];
    returns[k] = acc;
  }
  return returns;
}

std::vector<double> kernel_gradient(const std::vector<Map2D>& returns,
                                    const Map2D& bootstrap,
                                    const std::vector<Map2D>& upstream,
                                    const RmcKernel& w, const ReturnConfig& config) {
  check_kernel(w);
  std::vector<double> grad(w.weights.size(), 0.0);
  if (!w.enabled) return grad;
  if (returns.size() != upstream.size()) {
    throw ShapeError("kernel_gradient: returns and upstream lengths differ");
  }
  const int n = static_cast<int>(returns.size());
  const int r = w.radius();
  Map2D total;  // dL/dR_k including contributions from earlier steps
  for (int k = 0; k < n; ++k) {
    if (!upstream[k].same_shape(returns[k])) {
      throw ShapeError("kernel_gradient: upstream shape differs from returns");
    }
    if (k == 0) {
      total = upstream[0];
    } else {
      Map2D back = convolve_map_transpose(total, w);
      for (std::size_t i = 0; i < back.size(); ++i) {
        back.v[i] = upstream[k].v[i] + config.gamma * back.v[i];
      }
      total = std::move(back);
    }
    // R_k = r_k + gamma * (w * R_{k+1}); R_n is the bootstrap.
    const Map2D& next = k + 1 < n ? returns[k + 1] : bootstrap;
    const int h = next.height, wd = next.width;
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const int y0 = std::max(0, dy), y1 = std::min(h, h + dy);
        const int x0 = std::max(0, dx), x1 = std::min(wd, wd + dx);
        double s = 0.0;
        for (int y = y0; y < y1; ++y) {
          const double* g = &total.v[static_cast<std::size_t>(y) * wd];
          const double* src = &next.v[static_cast<std::size_t>(y - dy) * wd];
          for (int x = x0; x < x1; ++x) s += g[x] * src[x - dx];
        }
        grad[static_cast<std::size_t>(dy + r) * w.size + dx + r] += config.gamma * s;
      }
    }
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("non-finite RMC kernel gradient");
  }
  return grad;
}

}  // namespace pixelrl
