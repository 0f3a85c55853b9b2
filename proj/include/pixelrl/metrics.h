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

#ifndef PIXELRL_METRICS_H_
#define PIXELRL_METRICS_H_

#include <limits>

#include "pixelrl/image.h"

namespace pixelrl {

// 10 log10(1 / MSE) on [0,1] intensities over all channels. Identical images
// give +infinity, printed as "inf". Throws ShapeError on mismatched shapes.
double psnr(const PixelGrid& a, const PixelGrid& b);

// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5), K1 = 0.01,
// K2 = 0.03, dynamic range 1. RGB inputs are compared on luminance. Throws
// InvalidArgument when either side is below the window size.
double ssim(const PixelGrid& a, const PixelGrid& b);

inline constexpr int kSsimWindow = 11;

}  // namespace pixelrl

#endif  // PIXELRL_METRICS_H_
