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

#include "pixelrl/net.h"

#include <gtest/gtest.h>

#include <cmath>

#include "pixelrl/error.h"

namespace pixelrl {
namespace {

ArchConfig small_arch(bool gru) {
  ArchConfig a;
  a.width = 4;
  a.num_actions = 3;
  a.use_gru = gru;
  return a;
}

Tensor<double> random_input(std::uint64_t seed, int n, int c, int h, int w) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor<double> t(n, c, h, w);
  for (double& v : t.data) v = u(rng);
  return t;
}

TEST(ArchConfigTest, DefaultReceptiveFieldIs33) {
  const ArchConfig a;
  EXPECT_EQ(a.receptive_field(), 33);
  EXPECT_NO_THROW(a.validate());
}

TEST(ArchConfigTest, RejectsBadLayouts) {
  ArchConfig a;
  a.in_channels = 2;
  EXPECT_THROW(a.validate(), InvalidArgument);
  a = ArchConfig{};
  a.trunk_dilations = {1, 0};
  EXPECT_THROW(a.validate(), InvalidArgument);
  a = ArchConfig{};
  a.branch_dilations.clear();
  EXPECT_THROW(a.validate(), InvalidArgument);
  a = ArchConfig{};
  a.trunk_dilations = {1, 2};
  std::mt19937_64 rng(1);
  EXPECT_THROW(init_params<float>(rng, a), InvalidArgument);
  a.required_receptive_field.reset();
  EXPECT_NO_THROW(init_params<float>(rng, a));
}

TEST(InitParamsTest, SeededAndFinite) {
  std::mt19937_64 a(3), b(3), c(4);
  const auto pa = init_params<float>(a, small_arch(true));
  const auto pb = init_params<float>(b, small_arch(true));
  const auto pc = init_params<float>(c, small_arch(true));
  ASSERT_EQ(pa.tensors.size(), pb.tensors.size());
  bool differs = false;
  for (std::size_t i = 0; i < pa.tensors.size(); ++i) {
    EXPECT_EQ(pa.tensors[i].data, pb.tensors[i].data) << pa.tensors[i].name;
    differs |= pa.tensors[i].data != pc.tensors[i].data;
  }
  EXPECT_TRUE(differs);
  EXPECT_TRUE(pa.all_finite());
  EXPECT_NE(pa.find("policy.gru.wz.weight"), nullptr);
  EXPECT_EQ(init_params<float>(a, small_arch(false)).find("policy.gru.wz.weight"), nullptr);
}

TEST(ForwardTest, ProbabilitiesFormDistributions) {
  for (bool gru : {false, true}) {
    std::mt19937_64 rng(5);
    const ActorCritic<double> net(init_params<double>(rng, small_arch(gru)));
    const Tensor<double> x = random_input(6, 2, 1, 7, 9);
    const auto out = net.forward(x, net.initial_hidden(2, 7, 9));
    ASSERT_EQ(out.probs.c, 3);
    ASSERT_EQ(out.value.c, 1);
    EXPECT_EQ(out.hidden.empty(), !gru);
    for (int b = 0; b < 2; ++b) {
      const PolicyMap p = extract_policy(out.probs, b);
      for (int y = 0; y < 7; ++y) {
        for (int xx = 0; xx < 9; ++xx) {
          double sum = 0.0;
          for (int a = 0; a < 3; ++a) {
            EXPECT_GE(p.prob(y, xx, a), 0.0);
            sum += p.prob(y, xx, a);
          }
          EXPECT_NEAR(sum, 1.0, 1e-12);
        }
      }
    }
  }
}

TEST(ForwardTest, LocalityWithinChebyshevRadius16) {
  ArchConfig a = small_arch(false);
  std::mt19937_64 rng(7);
  const ActorCritic<double> net(init_params<double>(rng, a));
  const int size = 41, cy = 20, cx = 20;
  Tensor<double> x = random_input(8, 1, 1, size, size);
  const auto base = net.forward(x, {});
  x.at(0, 0, cy, cx) += 0.5;
  const auto moved = net.forward(x, {});
  bool changed_inside = false;
  for (int y = 0; y < size; ++y) {
    for (int xx = 0; xx < size; ++xx) {
      const bool inside = std::max(std::abs(y - cy), std::abs(xx - cx)) <= 16;
      for (int ch = 0; ch < 3; ++ch) {
        const bool diff = base.probs.at(0, ch, y, xx) != moved.probs.at(0, ch, y, xx);
        if (!inside) {
          EXPECT_FALSE(diff) << y << "," << xx;
        } else {
          changed_inside |= diff;
        }
      }
      if (!inside) EXPECT_EQ(base.value.at(0, 0, y, xx), moved.value.at(0, 0, y, xx));
    }
  }
  EXPECT_TRUE(changed_inside);
}

TEST(ForwardTest, TranslationEquivarianceAwayFromBorders) {
  std::mt19937_64 rng(9);
  const ActorCritic<double> net(init_params<double>(rng, small_arch(false)));
  // A 1-pixel shift of an input padded by >= 17 zero pixels on every side.
  const int size = 60;
  Tensor<double> a(1, 1, size, size), b(1, 1, size, size);
  const Tensor<double> patch = random_input(10, 1, 1, 10, 10);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      a.at(0, 0, 20 + y, 20 + x) = patch.at(0, 0, y, x);
      b.at(0, 0, 21 + y, 21 + x) = patch.at(0, 0, y, x);
    }
  }
  const auto oa = net.forward(a, {});
  const auto ob = net.forward(b, {});
  for (int y = 18; y < 40; ++y) {
    for (int x = 18; x < 40; ++x) {
      EXPECT_NEAR(oa.value.at(0, 0, y, x), ob.value.at(0, 0, y + 1, x + 1), 1e-12);
      for (int ch = 0; ch < 3; ++ch) {
        EXPECT_NEAR(oa.probs.at(0, ch, y, x), ob.probs.at(0, ch, y + 1, x + 1), 1e-12);
      }
    }
  }
}

TEST(ForwardTest, ShapeErrors) {
  std::mt19937_64 rng(11);
  const ActorCritic<double> net(init_params<double>(rng, small_arch(true)));
  EXPECT_THROW(net.forward(Tensor<double>(1, 3, 5, 5), net.initial_hidden(1, 5, 5)),
               ShapeError);
  EXPECT_THROW(net.forward(Tensor<double>(1, 1, 5, 5), net.initial_hidden(1, 6, 5)),
               ShapeError);
}

TEST(BackwardTest, PolicyGradientVanishesForValueOnlyLoss) {
  std::mt19937_64 rng(12);
  const ActorCritic<double> net(init_params<double>(rng, small_arch(true)));
  const Tensor<double> x = random_input(13, 1, 1, 6, 6);
  StepCache<double> cache;
  const auto out = net.forward(x, net.initial_hidden(1, 6, 6), &cache);
  Tensor<double> dlogits(1, 3, 6, 6);
  Tensor<double> dvalue(1, 1, 6, 6, 1.0);
  Tensor<double> dhidden(out.hidden.n, out.hidden.c, 6, 6);
  NetworkParams<double> grads = net.params().zeros_like();
  net.backward(cache, dlogits, dvalue, dhidden, grads);
  bool value_moves = false;
  for (const auto& t : grads.tensors) {
    if (t.group == ParamGroup::kPolicy || t.group == ParamGroup::kGru) {
      for (double g : t.data) EXPECT_EQ(g, 0.0) << t.name;
    }
    if (t.group == ParamGroup::kValue) {
      for (double g : t.data) value_moves |= g != 0.0;
    }
  }
  EXPECT_TRUE(value_moves);
}

TEST(SamplingTest, UniformFrequencies) {
  PolicyMap p{100, 100, 9, std::vector<double>(100 * 100 * 9, 1.0 / 9.0)};
  std::mt19937_64 rng(14);
  const ActionMap a = sample_actions(p, rng);
  std::vector<int> counts(9);
  for (int id : a.ids()) ++counts.at(id);
  for (int c : counts) EXPECT_NEAR(c / 10000.0, 1.0 / 9.0, 0.02);
}

TEST(SamplingTest, OneHotIsDeterministic) {
  PolicyMap p{5, 5, 4, std::vector<double>(5 * 5 * 4, 0.0)};
  for (std::size_t i = 0; i < 25; ++i) p.probs[i * 4 + 2] = 1.0;
  std::mt19937_64 rng(15);
  const ActionMap sampled = sample_actions(p, rng), greedy = greedy_actions(p);
  for (int id : sampled.ids()) EXPECT_EQ(id, 2);
  for (int id : greedy.ids()) EXPECT_EQ(id, 2);
}

TEST(SamplingTest, GreedyIgnoresScaleAndBreaksTiesLow) {
  PolicyMap p{1, 2, 3, {0.2, 0.5, 0.3, 0.4, 0.2, 0.4}};
  PolicyMap scaled = p;
  for (double& v : scaled.probs) v *= 7.0;
  EXPECT_EQ(greedy_actions(p), greedy_actions(scaled));
  EXPECT_EQ(greedy_actions(p).at(0, 0), 1);
  EXPECT_EQ(greedy_actions(p).at(0, 1), 0);
}

TEST(EncodeStatesTest, LabNeedsRgb) {
  const PixelGrid gray(4, 4, 1, 0.5f);
  EXPECT_THROW(encode_states<float>({&gray}, true), InvalidArgument);
  EXPECT_THROW(encode_states<float>({}, false), InvalidArgument);
  const Tensor<float> t = encode_states<float>({&gray, &gray}, false);
  EXPECT_EQ(t.n, 2);
  EXPECT_EQ(t.c, 1);
  EXPECT_EQ(t.at(1, 0, 3, 3), 0.5f);
}

}  // namespace
}  // namespace pixelrl
