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

#ifndef PIXELRL_TRAINER_H_
#define PIXELRL_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pixelrl/actions.h"
#include "pixelrl/env.h"
#include "pixelrl/net.h"
#include "pixelrl/rmc.h"

namespace pixelrl {

struct TrainConfig {
  int episodes = 30000;
  int batch = 64;
  int crop = 70;
  Task task = Task::kDenoiseGauss;
  int t_max = 0;        // 0 selects default_t_max(task)
  std::string actions;  // empty selects denoise9 or color13 by task
  double base_lr = 1e-3;
  double lr_power = 0.9;
  double gamma = 0.95;
  double entropy_beta = 0.01;
  double grad_clip = 0.0;  // global L2 norm; 0 disables
  bool rmc = true;
  int rmc_size = 33;
  Bootstrap bootstrap = Bootstrap::kZero;
  std::uint64_t seed = 1;
  ArchConfig arch;  // channels and action count are filled in by train()
  CorruptionConfig corruption;
  int checkpoint_every = 0;
  std::filesystem::path out_dir;  // empty disables all file output
  std::filesystem::path init_checkpoint;

  int resolved_t_max() const;
  ActionSet action_set() const;
  ReturnConfig return_config() const;
  void validate() const;
};

// base * (1 - episode / max_episode)^power.
double poly_lr(double base, int episode, int max_episode, double power);

// `key = value` lines; `#` starts a comment. Throws DataError on malformed
// lines, naming the line number.
std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::filesystem::path& path);
std::vector<std::pair<std::string, std::string>> parse_config_text(
    const std::string& text);
// Returns false for keys TrainConfig does not own. Throws InvalidArgument
// for unparsable values.
bool apply_train_option(TrainConfig& config, const std::string& key,
                        const std::string& value);

enum class ActionMode { kSample, kGreedy };

// A batched rollout. Index order is [step][batch element].
template <typename T>
struct Rollout {
  std::vector<StepCache<T>> caches;
  std::vector<std::vector<ActionMap>> actions;
  std::vector<std::vector<Map2D>> rewards;
  std::vector<Map2D> bootstrap;
  std::vector<EpisodeState> final_states;
  std::vector<double> mean_reward;  // per step, over batch and pixels

  int steps() const { return static_cast<int>(caches.size()); }
  int batch() const { return static_cast<int>(final_states.size()); }
  // Sum over steps of the per-step mean reward.
  double episode_reward() const;
};

// Runs every episode to t_max. `rngs` holds one stream per episode and is
// only used in sampling mode.
template <typename T>
Rollout<T> collect_rollout(const ActorCritic<T>& net, std::vector<EpisodeState> episodes,
                           const ActionSet& set, std::vector<Rng>& rngs,
                           ActionMode mode, Bootstrap bootstrap);

// Re-evaluates the network on the stored inputs with fixed actions.
template <typename T>
void refresh_forward(const ActorCritic<T>& net, Rollout<T>& rollout);

// A = R - V.
Map2D advantage(const Map2D& returns, const Map2D& values);

struct Targets {
  std::vector<std::vector<Map2D>> returns;     // [step][batch]
  std::vector<std::vector<Map2D>> advantages;  // [step][batch]
};

template <typename T>
Targets compute_targets(const Rollout<T>& rollout, const RmcKernel& w,
                        const ReturnConfig& config);

struct LossBreakdown {
  double policy = 0.0;  // includes the entropy bonus
  double value = 0.0;
  double entropy = 0.0;
  double total() const { return policy + value; }
};

// Losses averaged over steps, batch and pixels with targets held constant.
// Accumulates parameter gradients into `grads` when non-null. Throws
// NumericError for a non-finite loss.
template <typename T>
LossBreakdown surrogate_loss(const ActorCritic<T>& net, const Rollout<T>& rollout,
                             const Targets& targets, double entropy_beta,
                             NetworkParams<T>* grads);

// Gradient of the same losses with respect to the RMC kernel, with the
// policy and value maps held constant.
template <typename T>
std::vector<double> rmc_kernel_gradient(const Rollout<T>& rollout,
                                        const Targets& targets, const RmcKernel& w,
                                        const ReturnConfig& config);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment state is keyed by slot index; slots are created on first use.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Advances the shared step counter; call once before the per-slot updates.
  void begin_step() { ++t_; }
  void update(std::size_t slot, std::span<float> param, std::span<const float> grad,
              double lr);
  void update(std::size_t slot, std::span<double> param, std::span<const double> grad,
              double lr);
  long step_count() const { return t_; }

 private:
  template <typename T>
  void update_impl(std::size_t slot, std::span<T> param, std::span<const T> grad,
                   double lr);

  AdamConfig config_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct Checkpoint {
  NetworkParams<float> params;
  std::optional<RmcKernel> kernel;
  std::vector<std::pair<std::string, std::string>> meta;

  // Empty string when absent.
  std::string meta_value(const std::string& key) const;
};

// Container: "PXRL", version u32, array count u32, then per array name
// length u16, name, dtype u8, ndim u8, dims u32..., little-endian payload.
// dtype 0 = f32 (network tensors), 1 = u8 (metadata), 2 = f64 (rmc.w).
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Writes to a temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const NetworkParams<float>& params,
                     const RmcKernel* kernel,
                     const std::vector<std::pair<std::string, std::string>>& meta);
// Throws DataError naming the offending array for any malformed content.
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct EpisodeMetrics {
  int episode = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  NetworkParams<float> params;
  RmcKernel kernel;
  std::vector<EpisodeMetrics> history;
  std::vector<std::pair<std::string, std::string>> meta;
};

// Checkpoint metadata describing a training configuration.
std::vector<std::pair<std::string, std::string>> checkpoint_meta(
    const TrainConfig& config, int episode);

using ProgressFn = std::function<void(const EpisodeMetrics&)>;

// Single-threaded and deterministic for a fixed config. With a non-empty
// out_dir writes metrics.csv, checkpoint_<episode>.pxrl every
// checkpoint_every episodes and model.pxrl at the end. Throws NumericError
// when parameters become non-finite; checkpoints already written remain.
TrainResult train(const TrainConfig& config, const Dataset& dataset,
                  const ProgressFn& progress = nullptr);

}  // namespace pixelrl

#endif  // PIXELRL_TRAINER_H_
