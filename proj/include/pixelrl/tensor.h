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

#ifndef PIXELRL_TENSOR_H_
#define PIXELRL_TENSOR_H_

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace pixelrl {

// Buffers handed to Eigen start on the same alignment boundary every run, so
// vectorized reductions add in a reproducible order.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

// Dense N x C x H x W tensor.
template <typename T>
struct Tensor {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  AlignedVector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  std::size_t image_size() const { return plane_size() * c; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  T* image(int b) { return data.data() + b * image_size(); }
  const T* image(int b) const { return data.data() + b * image_size(); }
  T* plane(int b, int ch) { return image(b) + ch * plane_size(); }
  const T* plane(int b, int ch) const { return image(b) + ch * plane_size(); }

  T& at(int b, int ch, int y, int x) {
    return data[((static_cast<std::size_t>(b) * c + ch) * h + y) * w + x];
  }
  T at(int b, int ch, int y, int x) const {
    return data[((static_cast<std::size_t>(b) * c + ch) * h + y) * w + x];
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

}  // namespace pixelrl

#endif  // PIXELRL_TENSOR_H_
