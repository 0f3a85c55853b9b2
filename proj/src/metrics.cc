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

#include "pixelrl/metrics.h"

#include <array>
#include <cmath>

#include "pixelrl/error.h"

namespace pixelrl {

double psnr(const PixelGrid& a, const PixelGrid& b) {
  require_same_shape(a, b, "psnr");
  double sum = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = static_cast<double>(va[i]) - vb[i];
    sum += d * d;
  }
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(va.size()) / sum);
}

double ssim(const PixelGrid& a, const PixelGrid& b) {
  require_same_shape(a, b, "ssim");
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
    throw InvalidArgument("ssim: image is smaller than the 11x11 window");
  }
  const PixelGrid x = a.channels() == 3 ? to_luminance(a) : a;
  const PixelGrid y = b.channels() == 3 ? to_luminance(b) : b;

  constexpr int kR = kSsimWindow / 2;
  constexpr double kSigma = 1.5;
  std::array<double, kSsimWindow> g{};
  double gsum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    g[i] = std::exp(-(i - kR) * (i - kR) / (2.0 * kSigma * kSigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  double total = 0.0;
  int count = 0;
  for (int cy = kR; cy < x.height() - kR; ++cy) {
    for (int cx = kR; cx < x.width() - kR; ++cx) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < kSsimWindow; ++i) {
        for (int j = 0; j < kSsimWindow; ++j) {
          const double w = g[i] * g[j];
          const double px = x.at(cy + i - kR, cx + j - kR, 0);
          const double py = y.at(cy + i - kR, cx + j - kR, 0);
          mx += w * px;
          my += w * py;
          sxx += w * px * px;
          syy += w * py * py;
          sxy += w * px * py;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
      total += ((2 * mx * my + kC1) * (2 * cov + kC2)) /
               ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++count;
    }
  }
  return total / count;
}

}  // namespace pixelrl
