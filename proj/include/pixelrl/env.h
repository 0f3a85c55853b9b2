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

#ifndef PIXELRL_ENV_H_
#define PIXELRL_ENV_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pixelrl/actions.h"
#include "pixelrl/image.h"
#include "pixelrl/map2d.h"

namespace pixelrl {

using Rng = std::mt19937_64;

enum class Task {
  kDenoiseGauss,
  kDenoiseSaltPepper,
  kDenoisePoisson,
  kRestore,
  kColor,
};

Task parse_task(std::string_view name);
std::string_view task_name(Task task);
// Episode length used for each task unless overridden.
int default_t_max(Task task);
bool is_color_task(Task task);

// A few short built-in documents so text overlay works without data files.
const std::vector<std::string>& default_corpus();

struct TextOverlayConfig {
  // One document per entry.
  std::vector<std::string> corpus = default_corpus();
  int min_font_px = 10;
  int max_font_px = 30;
  double min_coverage = 0.05;
  double max_coverage = 0.25;
};

struct CorruptionConfig {
  double gaussian_sigma = 25.0;  // on the 8-bit scale
  double sp_density = 0.5;
  double poisson_peak = 30.0;
  TextOverlayConfig text;
  // Largest relative brightness/saturation deviation of the color task input.
  double color_strength = 0.2;

  void validate() const;
};

// out = clip(image + n), n ~ N(0, (sigma_8bit/255)^2) i.i.d.
PixelGrid add_gaussian_noise(const PixelGrid& image, double sigma_8bit, Rng& rng);
// Each pixel becomes 0 or 1 (equal odds) with probability `density`.
PixelGrid add_salt_pepper(const PixelGrid& image, double density, Rng& rng);
// out = clip(Poisson(peak * image) / peak).
PixelGrid add_poisson(const PixelGrid& image, double peak, Rng& rng);

struct TextOverlay {
  PixelGrid image;
  // 1 where glyph ink replaced the pixel, else 0.
  std::vector<std::uint8_t> mask;
  float intensity = 0.0f;
  double coverage() const;
};

// Renders random text snippets with the embedded bitmap font until a random
// coverage in [min_coverage, max_coverage] is reached. Throws InvalidArgument
// for an empty corpus.
TextOverlay overlay_text(const PixelGrid& image, Rng& rng,
                         const TextOverlayConfig& config);
// Reads every regular file in `dir` as one UTF-8 document.
std::vector<std::string> load_corpus(const std::filesystem::path& dir);

// Spatially smooth random brightness/saturation change for the color task.
PixelGrid distort_color(const PixelGrid& image, double strength, Rng& rng);

PixelGrid corrupt(const PixelGrid& clean, Task task,
                  const CorruptionConfig& config, Rng& rng);

using RewardMap = Map2D;

struct EpisodeState {
  Task task = Task::kDenoiseGauss;
  PixelGrid target;
  PixelGrid current;
  int t = 0;
  int t_max = 5;

  bool finished() const { return t >= t_max; }
};

EpisodeState make_episode(const PixelGrid& target, const PixelGrid& corrupted,
                          Task task, int t_max);

// Per-pixel distance to the target: squared error on the 0-255 scale summed
// over channels, or CIELab Euclidean distance for the color task.
Map2D pixel_distance(const PixelGrid& target, const PixelGrid& state, Task task);

struct StepResult {
  EpisodeState next;
  RewardMap reward;
};

// Applies the action map and returns the per-pixel decrease in distance.
StepResult step(const EpisodeState& env, const ActionMap& actions,
                const ActionSet& set);

struct Dataset {
  std::vector<PixelGrid> images;
  std::vector<std::string> names;

  bool empty() const { return images.empty(); }
  std::size_t size() const { return images.size(); }
};

// Loads all images in a directory, converting to `channels` (1 or 3).
Dataset load_dataset(const std::filesystem::path& dir, int channels);

// Piecewise-smooth procedural images: gradients, shapes, and texture.
Dataset synthetic_dataset(int count, int height, int width, int channels,
                          std::uint64_t seed);

struct BatchConfig {
  int batch = 64;
  int crop = 70;
  Task task = Task::kDenoiseGauss;
  int t_max = 5;
  CorruptionConfig corruption;
};

// Random crop, left-right flip and 90-degree rotation, then corruption.
EpisodeState sample_episode(const Dataset& dataset, const BatchConfig& config,
                            Rng& rng);
// `config.batch` episodes drawn from one RNG stream.
std::vector<EpisodeState> sample_training_batch(const Dataset& dataset,
                                                const BatchConfig& config, Rng& rng);

// Deterministic RNG stream for one episode of a batch.
Rng episode_rng(std::uint64_t global_seed, std::uint64_t episode_index);

}  // namespace pixelrl

#endif  // PIXELRL_ENV_H_
