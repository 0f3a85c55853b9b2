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

#include "pixelrl/evaluate.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pixelrl/error.h"
#include "pixelrl/metrics.h"
#include "test_util.h"

namespace pixelrl {
namespace {

namespace fs = std::filesystem;
using testing::random_grid;

Model tiny_model(std::uint64_t seed, int t_max) {
  ArchConfig a;
  a.width = 4;
  a.num_actions = 9;
  a.trunk_dilations = {1, 2};
  a.branch_dilations = {1};
  a.use_gru = true;
  a.required_receptive_field.reset();
  std::mt19937_64 rng(seed);
  return Model{ActorCritic<float>(init_params<float>(rng, a)), ActionSet::denoise9(),
               Task::kDenoiseGauss, t_max};
}

Dataset grids(int count, int size) {
  Dataset d;
  for (int i = 0; i < count; ++i) {
    d.images.push_back(random_grid(40 + i, size, size, 1));
    d.names.push_back("img" + std::to_string(count - i) + ".png");
  }
  return d;
}

double direct_psnr(const PixelGrid& a, const PixelGrid& b) {
  long double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a.values()[i]) - b.values()[i];
    sum += d * d;
  }
  return 10.0 * std::log10(static_cast<double>(a.size() / sum));
}

TEST(PsnrTest, IdenticalIsInfinite) {
  const PixelGrid g = random_grid(1, 8, 8, 3);
  EXPECT_TRUE(std::isinf(psnr(g, g)));
  EXPECT_GT(psnr(g, g), 0.0);
}

TEST(PsnrTest, OneLevelOffset) {
  const PixelGrid a(16, 16, 1, 0.5f);
  PixelGrid b = a;
  for (float& v : b.values()) v += 1.0f / 255.0f;
  EXPECT_NEAR(psnr(a, b), 20.0 * std::log10(255.0), 1e-3);  // 48.13 dB
}

TEST(PsnrTest, MatchesDirectFormula) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const PixelGrid a = random_grid(s, 9, 7, 3), b = random_grid(s + 100, 9, 7, 3);
    EXPECT_NEAR(psnr(a, b), direct_psnr(a, b), 1e-9);
  }
  EXPECT_THROW(psnr(PixelGrid(2, 2, 1), PixelGrid(2, 3, 1)), ShapeError);
}

TEST(SsimTest, IdenticalAndAnticorrelated) {
  const PixelGrid a = random_grid(2, 32, 32, 1);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
  PixelGrid neg = a;
  for (float& v : neg.values()) v = 1.0f - v;
  EXPECT_LT(ssim(a, neg), 0.2);
}

TEST(SsimTest, ConstantImagesClosedForm) {
  const double k1 = 0.01 * 0.01;
  // Zero variance on both sides leaves only the luminance term.
  const PixelGrid p(16, 16, 1, 0.2f), q(16, 16, 1, 0.6f);
  EXPECT_NEAR(ssim(p, q), (2 * 0.2 * 0.6 + k1) / (0.04 + 0.36 + k1), 1e-6);
}

TEST(SsimTest, MatchesReferenceValue) {
  // Reference from scikit-image structural_similarity with gaussian_weights,
  // sigma 1.5, population covariance and data_range 1 on the same grids.
  PixelGrid a(32, 40, 1), b(32, 40, 1);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 40; ++x) {
      a.at(y, x, 0) = static_cast<float>(0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y));
      b.at(y, x, 0) = static_cast<float>(0.5 + 0.3 * std::sin(0.3 * x + 0.25 * y) +
                                         0.1 * std::cos(0.7 * x));
    }
  }
  EXPECT_NEAR(ssim(a, b), 0.4764016036719215, 1e-4);
}

TEST(SsimTest, RejectsSmallImages) {
  const PixelGrid small(10, 20, 1, 0.5f);
  EXPECT_THROW(ssim(small, small), InvalidArgument);
}

TEST(EvaluateTest, ZeroStepsLeaveInputUnchanged) {
  const Model m = tiny_model(1, 0);
  EvalConfig cfg;
  cfg.t_max = 0;
  const Dataset clean = grids(2, 12);
  const EvalReport r = evaluate(m, clean, cfg);
  ASSERT_EQ(r.images.size(), 2u);
  EXPECT_EQ(r.images[0].name, "img1.png");  // sorted
  for (const ImageResult& img : r.images) {
    EXPECT_EQ(img.restored, img.corrupted);
    EXPECT_EQ(img.psnr_input, img.psnr_output);
  }
  EXPECT_TRUE(r.action_counts.empty());
}

TEST(EvaluateTest, HistogramRowsCountEveryPixel) {
  const Model m = tiny_model(2, 3);
  EvalConfig cfg;
  cfg.t_max = 3;
  const EvalReport r = evaluate(m, grids(3, 12), cfg);
  ASSERT_EQ(r.action_counts.size(), 3u);
  for (const auto& row : r.action_counts) {
    long sum = 0;
    for (long c : row) sum += c;
    EXPECT_EQ(sum, 3 * 12 * 12);
  }
  const double share = filter_share(r, m.actions, 0);
  EXPECT_GE(share, 0.0);
  EXPECT_LE(share, 1.0);
}

TEST(EvaluateTest, TaskMismatchAndPairingErrors) {
  const Model m = tiny_model(3, 2);
  EvalConfig cfg;
  cfg.task = Task::kDenoiseSaltPepper;
  EXPECT_THROW(evaluate(m, grids(1, 12), cfg), DataError);
  cfg.task = Task::kDenoiseGauss;
  EXPECT_THROW(evaluate_pairs(m, grids(2, 12), {PixelGrid(12, 12, 1)}, cfg),
               InvalidArgument);
}

TEST(EvaluateTest, TtaIsEquivariantUnderDihedralMaps) {
  const Model m = tiny_model(4, 2);
  EvalConfig cfg;
  cfg.t_max = 2;
  cfg.tta = true;
  const PixelGrid clean = random_grid(5, 12, 12, 1);
  Rng rng(6);
  const PixelGrid noisy = add_gaussian_noise(clean, 25.0, rng);
  const Dataset one{{clean}, {"a.png"}};
  const EvalReport base = evaluate_pairs(m, one, {noisy}, cfg);
  for (int k = 1; k < 8; ++k) {
    const Dataset turned{{dihedral(clean, k)}, {"a.png"}};
    const EvalReport r = evaluate_pairs(m, turned, {dihedral(noisy, k)}, cfg);
    EXPECT_LT(testing::max_abs_diff(r.images[0].restored,
                                    dihedral(base.images[0].restored, k)),
              1e-6)
        << k;
  }
}

TEST(EvaluateTest, UntrainedDefaultModelStaysNearInput) {
  std::mt19937_64 rng(5);
  const Model m{ActorCritic<float>(init_params<float>(rng, ArchConfig{})),
                ActionSet::denoise9(), Task::kDenoiseGauss, 5};
  // Smooth content: filters remove noise without erasing the image.
  Dataset clean;
  for (int i = 0; i < 2; ++i) {
    PixelGrid g(48, 48, 1);
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        g.at(y, x, 0) = static_cast<float>(0.5 + 0.3 * std::sin(0.15 * (i + 1) * x + 0.1 * y));
      }
    }
    clean.images.push_back(std::move(g));
    clean.names.push_back("smooth" + std::to_string(i) + ".png");
  }
  EvalConfig cfg;
  cfg.corruption.gaussian_sigma = 25.0;
  const EvalReport r = evaluate(m, clean, cfg);
  EXPECT_NEAR(r.mean_psnr_output, r.mean_psnr_input, 3.0);
}

TEST(EvaluateTest, GreedyEvaluationIsRepeatable) {
  const Model m = tiny_model(7, 3);
  EvalConfig cfg;
  cfg.t_max = 3;
  const Dataset d = grids(2, 12);
  EXPECT_EQ(evaluate(m, d, cfg).images[1].restored, evaluate(m, d, cfg).images[1].restored);
}

TEST(ReportTest, WritesCsvFiles) {
  const fs::path dir = fs::temp_directory_path() / "pixelrl_evaluate_test_report";
  fs::remove_all(dir);
  const Model m = tiny_model(8, 1);
  EvalConfig cfg;
  cfg.t_max = 1;
  write_report(dir, evaluate(m, grids(2, 12), cfg), m.actions);
  std::ifstream report(dir / "report.csv");
  std::string header;
  std::getline(report, header);
  EXPECT_EQ(header, "image,psnr_input,psnr_output,ssim_input,ssim_output");
  int rows = 0;
  std::string line, last;
  while (std::getline(report, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(last.rfind("mean,", 0), 0u);
  std::ifstream actions(dir / "actions.csv");
  int action_rows = 0;
  while (std::getline(actions, line)) ++action_rows;
  EXPECT_EQ(action_rows, 1 + 9);
}

TEST(RenderTest, PaletteIndexIsActionId) {
  const ActionSet set = ActionSet::denoise9();
  ActionMap map(2, 3);
  for (int i = 0; i < 6; ++i) map.ids()[i] = i;
  const IndexedImage a = render_action_map(map, set), b = render_action_map(map, set);
  EXPECT_EQ(a.indices, b.indices);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(a.indices[i], i);
  ASSERT_EQ(a.palette.size(), 9u);
  for (int i = 0; i < 9; ++i) EXPECT_EQ(a.palette[i], action_palette()[i]);
  std::vector<ActionSpec> many(16, ActionSpec::box5());
  many.push_back(ActionSpec::nothing());
  EXPECT_THROW(render_action_map(ActionMap(1, 1), ActionSet("big", many)), InvalidArgument);
}

TEST(RenderTest, UniformAndCheckerboardMaps) {
  const ActionSet set = ActionSet::denoise9();
  const int nothing = set.nothing_id();
  ActionMap map(4, 4);
  for (int& id : map.ids()) id = nothing;
  const IndexedImage flat = render_action_map(map, set);
  for (std::uint8_t idx : flat.indices) EXPECT_EQ(idx, nothing);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) map.ids()[y * 4 + x] = (x + y) % 2 ? 1 : 0;
  }
  const IndexedImage checker = render_action_map(map, set);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) EXPECT_EQ(checker.indices[y * 4 + x], (x + y) % 2);
  }
  EXPECT_NE(checker.palette[0], checker.palette[1]);
}

TEST(RenderTest, LegendHasOneLinePerAction) {
  const std::string legend = action_legend(ActionSet::denoise9());
  EXPECT_EQ(std::count(legend.begin(), legend.end(), '\n'), 9);
  EXPECT_EQ(legend.rfind("0 #", 0), 0u);
}

TEST(VisualizeTest, WritesOneFramePerStep) {
  const fs::path dir = fs::temp_directory_path() / "pixelrl_evaluate_test_vis";
  fs::remove_all(dir);
  const Model m = tiny_model(9, 3);
  EvalConfig cfg;
  cfg.t_max = 3;
  const PixelGrid clean = random_grid(10, 12, 12, 1);
  visualize(m, clean, clean, cfg, dir);
  int states = 0, actions = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    states += n.rfind("state_t", 0) == 0;
    actions += n.rfind("actions_t", 0) == 0;
  }
  EXPECT_EQ(states, 4);
  EXPECT_EQ(actions, 3);
  EXPECT_TRUE(fs::exists(dir / "legend.txt"));
}

}  // namespace
}  // namespace pixelrl
