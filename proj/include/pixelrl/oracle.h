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

#ifndef PIXELRL_ORACLE_H_
#define PIXELRL_ORACLE_H_

// Brute-force reference implementations. Nothing here reuses the kernels of
// the modules being checked.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pixelrl/actions.h"
#include "pixelrl/image.h"
#include "pixelrl/map2d.h"

namespace pixelrl::oracle {

// Direct evaluation of any action with replicate padding, in double.
PixelGrid naive_filter(const PixelGrid& state, const ActionSpec& spec);

// R(k) = sum_j gamma^j w^j * r(k+j) + gamma^(n-k) w^(n-k) * V with explicit
// repeated zero-padded convolution. `kernel` is size x size, row-major.
// Throws InvalidArgument for n > 4.
std::vector<Map2D> closed_form_returns(const std::vector<Map2D>& rewards,
                                       const Map2D& bootstrap,
                                       const std::vector<double>& kernel, int size,
                                       double gamma);

// Central differences (f(x + eps e_i) - f(x - eps e_i)) / 2 eps. Throws
// NumericError when f is not finite at a probe point.
std::vector<double> numeric_grad(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x, double eps);

// Gray image of at most 3x3 on the 8-bit grid, restricted to the point-wise
// actions {+1, -1, nothing}; t_max <= 3.
struct TinyInstance {
  PixelGrid target;
  PixelGrid state;
  int t_max = 1;
};

struct TinyOptimum {
  double total_reward = 0.0;  // summed over pixels, undiscounted
  // Per pixel (row-major), one best sequence of deltas in {+1, -1, 0}.
  std::vector<std::vector<int>> best_sequences;
};

// Enumerates all 3^t_max sequences per pixel on the integer 8-bit grid. Ties
// keep the sequence with the most no-ops. Throws InvalidArgument outside the
// TinyInstance bounds.
TinyOptimum exhaustive_best(const TinyInstance& instance);

// Random instance with integer 8-bit errors in [-max_error, max_error].
TinyInstance random_tiny_instance(std::uint64_t seed, int max_error);

// Suites shared by `pixelrl verify` and the acceptance checks.
struct SuiteResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // largest observed error
  std::uint64_t failing_seed = 0;
  std::string detail;
};

// Every denoise9 and color13 action against naive_filter on random grids.
SuiteResult verify_filters(int instances, int size, double tolerance, std::uint64_t seed);
// Recursive returns against closed_form_returns for n in {1,2,3}, k in {1,3}.
SuiteResult verify_returns(int instances, int size, double tolerance, std::uint64_t seed);
// Identity kernel against the RMC-disabled path, compared bit for bit.
SuiteResult verify_identity_returns(int instances, std::uint64_t seed);
// Analytic gradients of a toy network against numeric_grad, one result per
// parameter group (shared, policy, value, gru, rmc).
std::vector<SuiteResult> verify_gradients(double tolerance, std::uint64_t seed);
// exhaustive_best against the step-budget formula.
SuiteResult verify_optimality(int instances, std::uint64_t seed);

}  // namespace pixelrl::oracle

#endif  // PIXELRL_ORACLE_H_
