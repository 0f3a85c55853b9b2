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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pixelrl/error.h"
#include "pixelrl/oracle.h"
#include "test_util.h"

namespace pixelrl {
namespace {

using testing::random_map;

RmcKernel random_kernel(std::mt19937_64& rng, int size) {
  RmcKernel w = RmcKernel::identity(size);
  std::normal_distribution<double> n(0.0, 0.3);
  for (double& v : w.weights) v = n(rng);
  return w;
}

TEST(RmcKernelTest, IdentityAndValidation) {
  const RmcKernel w = RmcKernel::identity(33);
  EXPECT_EQ(w.radius(), 16);
  EXPECT_EQ(w.at(0, 0), 1.0);
  EXPECT_TRUE(w.is_identity());
  RmcKernel even = RmcKernel::identity(3);
  even.size = 4;
  EXPECT_THROW(even.validate(), InvalidArgument);
  RmcKernel wrong = RmcKernel::identity(3);
  wrong.weights.pop_back();
  EXPECT_THROW(wrong.validate(), ShapeError);
  EXPECT_THROW(RmcKernel::identity(0), InvalidArgument);
}

TEST(ConvolveMapTest, IdentityIsExact) {
  std::mt19937_64 rng(1);
  const Map2D m = random_map(rng, 9, 7);
  EXPECT_EQ(convolve_map(m, RmcKernel::identity(33)), m);
  EXPECT_EQ(convolve_map_transpose(m, RmcKernel::identity(5)), m);
}

TEST(ConvolveMapTest, UniformKernelAveragesInterior) {
  RmcKernel w = RmcKernel::identity(3);
  for (double& v : w.weights) v = 1.0 / 9.0;
  Map2D m(6, 6, 2.0);
  const Map2D out = convolve_map(m, w);
  for (int y = 1; y < 5; ++y) {
    for (int x = 1; x < 5; ++x) EXPECT_NEAR(out.at(y, x), 2.0, 1e-12);
  }
  EXPECT_NEAR(out.at(0, 0), 2.0 * 4.0 / 9.0, 1e-12);  // zero padding
}

TEST(ConvolveMapTest, ShiftKernelMovesMass) {
  RmcKernel w = RmcKernel::identity(3);
  w.at(0, 0) = 0.0;
  w.at(1, 0) = 1.0;  // out(y, x) = map(y - 1, x)
  Map2D m(3, 3);
  m.at(0, 1) = 5.0;
  const Map2D out = convolve_map(m, w);
  EXPECT_EQ(out.at(1, 1), 5.0);
  EXPECT_EQ(out.at(0, 1), 0.0);
}

TEST(ConvolveMapTest, TransposeIsAdjoint) {
  std::mt19937_64 rng(2);
  const RmcKernel w = random_kernel(rng, 5);
  const Map2D a = random_map(rng, 7, 8), b = random_map(rng, 7, 8);
  const Map2D wa = convolve_map(a, w), wtb = convolve_map_transpose(b, w);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lhs += wa.v[i] * b.v[i];
    rhs += a.v[i] * wtb.v[i];
  }
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
}

TEST(ComputeReturnsTest, MatchesClosedForm) {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n) {
    for (int k : {1, 3, 5}) {
      std::vector<Map2D> rewards;
      for (int t = 0; t < n; ++t) rewards.push_back(random_map(rng, 8, 8));
      const Map2D boot = random_map(rng, 8, 8);
      const RmcKernel w = random_kernel(rng, k);
      const ReturnConfig cfg{0.9, Bootstrap::kValue};
      const auto got = compute_returns(rewards, boot, w, cfg);
      const auto want = oracle::closed_form_returns(rewards, boot, w.weights, k, 0.9);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t t = 0; t < got.size(); ++t) {
        for (std::size_t i = 0; i < got[t].size(); ++i) {
          EXPECT_NEAR(got[t].v[i], want[t].v[i], 1e-5 * std::max(1.0, std::abs(want[t].v[i])));
        }
      }
    }
  }
}

TEST(ComputeReturnsTest, IdentityMatchesPlainReturnsBitForBit) {
  std::mt19937_64 rng(4);
  std::vector<Map2D> rewards;
  for (int t = 0; t < 5; ++t) rewards.push_back(random_map(rng, 10, 10, 100.0));
  const Map2D boot = random_map(rng, 10, 10);
  const ReturnConfig cfg{0.95, Bootstrap::kValue};
  EXPECT_EQ(compute_returns(rewards, boot, RmcKernel::identity(33, true), cfg),
            compute_returns(rewards, boot, RmcKernel::identity(33, false), cfg));
}

TEST(ComputeReturnsTest, PlainReturnsByHand) {
  // One pixel, gamma 0.5: R1 = 2 + 0.5*4, R0 = 1 + 0.5*R1.
  const std::vector<Map2D> r{Map2D(1, 1, 1.0), Map2D(1, 1, 2.0)};
  const auto R = compute_returns(r, Map2D(1, 1, 4.0), RmcKernel::identity(1),
                                 {0.5, Bootstrap::kValue});
  EXPECT_DOUBLE_EQ(R[1].at(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(R[0].at(0, 0), 3.0);
}

TEST(ComputeReturnsTest, ZeroInputsGiveZero) {
  std::mt19937_64 rng(5);
  const std::vector<Map2D> r(3, Map2D(6, 6));
  for (const Map2D& m : compute_returns(r, Map2D(6, 6), random_kernel(rng, 5), {})) {
    for (double v : m.v) EXPECT_EQ(v, 0.0);
  }
}

TEST(ComputeReturnsTest, LinearInRewards) {
  std::mt19937_64 rng(6);
  const RmcKernel w = random_kernel(rng, 3);
  std::vector<Map2D> a, b, sum;
  for (int t = 0; t < 3; ++t) {
    a.push_back(random_map(rng, 5, 5));
    b.push_back(random_map(rng, 5, 5));
    Map2D s(5, 5);
    for (std::size_t i = 0; i < s.size(); ++i) s.v[i] = 2.0 * a[t].v[i] - b[t].v[i];
    sum.push_back(s);
  }
  const Map2D zero(5, 5);
  const auto ra = compute_returns(a, zero, w, {});
  const auto rb = compute_returns(b, zero, w, {});
  const auto rs = compute_returns(sum, zero, w, {});
  for (int t = 0; t < 3; ++t) {
    for (std::size_t i = 0; i < rs[t].size(); ++i) {
      EXPECT_NEAR(rs[t].v[i], 2.0 * ra[t].v[i] - rb[t].v[i], 1e-12);
    }
  }
}

TEST(ComputeReturnsTest, ShapeErrors) {
  EXPECT_THROW(compute_returns({}, Map2D(2, 2), RmcKernel::identity(3), {}),
               InvalidArgument);
  EXPECT_THROW(compute_returns({Map2D(2, 2)}, Map2D(2, 3), RmcKernel::identity(3), {}),
               ShapeError);
  EXPECT_THROW(ReturnConfig({0.0, Bootstrap::kZero}).validate(), InvalidArgument);
}

TEST(KernelGradientTest, OnePixelByHand) {
  // R1 = r1 + g w V, R0 = r0 + g w R1; L = R0 gives dL/dw = g R1 + g^2 w V.
  const double g = 0.9, wv = 0.7, V = 3.0, r1 = 2.0;
  RmcKernel w = RmcKernel::identity(1);
  w.weights[0] = wv;
  const std::vector<Map2D> rewards{Map2D(1, 1, 1.0), Map2D(1, 1, r1)};
  const ReturnConfig cfg{g, Bootstrap::kValue};
  const auto R = compute_returns(rewards, Map2D(1, 1, V), w, cfg);
  const auto grad =
      kernel_gradient(R, Map2D(1, 1, V), {Map2D(1, 1, 1.0), Map2D(1, 1, 0.0)}, w, cfg);
  const double R1 = r1 + g * wv * V;
  EXPECT_NEAR(grad[0], g * R1 + g * g * wv * V, 1e-12);
}

TEST(KernelGradientTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::vector<Map2D> rewards, upstream;
  for (int t = 0; t < 3; ++t) {
    rewards.push_back(random_map(rng, 6, 6));
    upstream.push_back(random_map(rng, 6, 6));
  }
  const Map2D boot = random_map(rng, 6, 6);
  const RmcKernel w0 = random_kernel(rng, 3);
  const ReturnConfig cfg{0.95, Bootstrap::kValue};
  auto loss = [&](const std::vector<double>& weights) {
    RmcKernel w = w0;
    w.weights = weights;
    const auto R = compute_returns(rewards, boot, w, cfg);
    double s = 0.0;
    for (int t = 0; t < 3; ++t) {
      for (std::size_t i = 0; i < R[t].size(); ++i) s += upstream[t].v[i] * R[t].v[i];
    }
    return s;
  };
  const auto numeric = oracle::numeric_grad(loss, w0.weights, 1e-6);
  const auto analytic =
      kernel_gradient(compute_returns(rewards, boot, w0, cfg), boot, upstream, w0, cfg);
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    EXPECT_NEAR(analytic[i], numeric[i], 1e-6 * std::max(1.0, std::abs(numeric[i])));
  }
}

TEST(KernelGradientTest, DisabledKernelHasZeroGradient) {
  std::mt19937_64 rng(8);
  const RmcKernel w = RmcKernel::identity(3, false);
  const std::vector<Map2D> r{random_map(rng, 4, 4)};
  const auto R = compute_returns(r, Map2D(4, 4), w, {});
  for (double g : kernel_gradient(R, Map2D(4, 4), {random_map(rng, 4, 4)}, w, {})) {
    EXPECT_EQ(g, 0.0);
  }
}

}  // namespace
}  // namespace pixelrl
