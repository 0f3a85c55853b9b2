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

#ifndef PIXELRL_EVALUATE_H_
#define PIXELRL_EVALUATE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pixelrl/actions.h"
#include "pixelrl/env.h"
#include "pixelrl/image_io.h"
#include "pixelrl/net.h"
#include "pixelrl/trainer.h"

namespace pixelrl {

// A trained network together with the episode settings it was trained for.
struct Model {
  ActorCritic<float> net;
  ActionSet actions;
  Task task;
  int t_max;
};

// Throws DataError when the metadata names an unknown task or action set or
// disagrees with the network shape.
Model load_model(const std::filesystem::path& checkpoint);

struct EvalConfig {
  Task task = Task::kDenoiseGauss;
  int t_max = 5;
  ActionMode mode = ActionMode::kGreedy;
  bool tta = false;
  std::uint64_t seed = 1;  // corruption and sampling streams, one per image
  CorruptionConfig corruption;
};

struct ImageResult {
  std::string name;
  double psnr_input = 0.0;
  double psnr_output = 0.0;
  double ssim_input = 0.0;
  double ssim_output = 0.0;
  PixelGrid corrupted;
  PixelGrid restored;
};

struct EvalReport {
  std::vector<ImageResult> images;  // sorted by name
  double mean_psnr_input = 0.0;
  double mean_psnr_output = 0.0;
  double mean_ssim_input = 0.0;
  double mean_ssim_output = 0.0;
  // action_counts[t][a]: pixels choosing action a at step t, summed over
  // images (identity view only under TTA).
  std::vector<std::vector<long>> action_counts;
};

// Corrupts each clean image with its own RNG stream and restores it.
// Throws DataError when the task or action set disagrees with the model.
EvalReport evaluate(const Model& model, const Dataset& clean, const EvalConfig& config);
// Same with caller-provided corrupted inputs (one per clean image).
EvalReport evaluate_pairs(const Model& model, const Dataset& clean,
                          const std::vector<PixelGrid>& corrupted,
                          const EvalConfig& config);

// Share of filter actions among all pixels at step t.
double filter_share(const EvalReport& report, const ActionSet& set, int t);

// report.csv: per-image rows then a "mean" row. actions.csv: step,action,count.
void write_report(const std::filesystem::path& dir, const EvalReport& report,
                  const ActionSet& set);

inline constexpr int kMaxPaletteActions = 16;
const std::array<Rgb8, kMaxPaletteActions>& action_palette();

struct IndexedImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> indices;
  std::vector<Rgb8> palette;
};

// Palette index equals action id. Throws InvalidArgument for sets with more
// than 16 actions.
IndexedImage render_action_map(const ActionMap& actions, const ActionSet& set);
// One "id #rrggbb name" line per action.
std::string action_legend(const ActionSet& set);

// Writes state_t0..state_t<t_max>.png, actions_t0..actions_t<t_max-1>.png
// and legend.txt for one episode.
void visualize(const Model& model, const PixelGrid& clean, const PixelGrid& corrupted,
               const EvalConfig& config, const std::filesystem::path& out_dir);

}  // namespace pixelrl

#endif  // PIXELRL_EVALUATE_H_
