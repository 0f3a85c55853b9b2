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

// pixelrl: train, evaluate, visualize and verify per-pixel RL agents.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pixelrl/env.h"
#include "pixelrl/error.h"
#include "pixelrl/evaluate.h"
#include "pixelrl/image_io.h"
#include "pixelrl/oracle.h"
#include "pixelrl/trainer.h"

namespace fs = std::filesystem;
using namespace pixelrl;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string task;
  std::string out;
  std::vector<std::string> sets;  // key=value overrides

  // Dataset selection.
  std::string data;
  int synthetic = 0;
  int synthetic_size = 128;

  // train
  std::optional<int> episodes, batch, crop, t_max, width, checkpoint_every;
  std::optional<bool> gru, rmc;
  std::string init_checkpoint;

  // eval / visualize
  std::string model;
  std::string image;
  bool tta = false;
  bool sample = false;

  // verify
  bool verify_filter = false, verify_returns = false, verify_grads = false,
       verify_optimality = false;
};

// Keys the CLI consumes itself; everything else goes to TrainConfig.
bool apply_cli_option(Options& o, const std::string& key, const std::string& value) {
  if (key == "data") o.data = value;
  else if (key == "synthetic") o.synthetic = std::stoi(value);
  else if (key == "synthetic_size") o.synthetic_size = std::stoi(value);
  else if (key == "model") o.model = value;
  else if (key == "tta") o.tta = value == "true" || value == "1";
  else return false;
  return true;
}

TrainConfig build_config(Options& o) {
  TrainConfig c;
  std::vector<std::pair<std::string, std::string>> entries;
  if (!o.config_file.empty()) entries = parse_config_file(o.config_file);
  for (const std::string& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got " + s);
    entries.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : entries) {
    if (!apply_train_option(c, k, v) && !apply_cli_option(o, k, v)) {
      throw InvalidArgument("unknown option '" + k + "'");
    }
  }
  // Dedicated flags override file and --set entries.
  if (o.seed) c.seed = *o.seed;
  if (!o.task.empty()) c.task = parse_task(o.task);
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.episodes) c.episodes = *o.episodes;
  if (o.batch) c.batch = *o.batch;
  if (o.crop) c.crop = *o.crop;
  if (o.t_max) c.t_max = *o.t_max;
  if (o.width) c.arch.width = *o.width;
  if (o.checkpoint_every) c.checkpoint_every = *o.checkpoint_every;
  if (o.gru) c.arch.use_gru = *o.gru;
  if (o.rmc) c.rmc = *o.rmc;
  if (!o.init_checkpoint.empty()) c.init_checkpoint = o.init_checkpoint;
  return c;
}

// `<root>/<split>` when it exists, else `root` itself.
Dataset load_split(const Options& o, const char* split, int channels, std::uint64_t seed) {
  if (!o.data.empty()) {
    fs::path dir = o.data;
    if (fs::is_directory(dir / split)) dir /= split;
    if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
    Dataset d = load_dataset(dir, channels);
    if (d.empty()) throw DataError("no images in " + dir.string());
    return d;
  }
  if (o.synthetic > 0) {
    return synthetic_dataset(o.synthetic, o.synthetic_size, o.synthetic_size, channels, seed);
  }
  throw InvalidArgument("no dataset: pass --data DIR or --synthetic N");
}

int run_train(Options& o) {
  const TrainConfig c = build_config(o);
  const Dataset data = load_split(o, "train", is_color_task(c.task) ? 3 : 1, c.seed);
  std::fprintf(stderr, "training %d episodes on %zu images (task %s)\n", c.episodes,
               data.size(), std::string(task_name(c.task)).c_str());
  const int every = std::max(1, c.episodes / 100);
  train(c, data, [&](const EpisodeMetrics& m) {
    if (m.episode % every == 0 || m.episode == c.episodes) {
      std::fprintf(stderr, "episode %d reward %.4f policy %.4f value %.4f lr %.3g\n",
                   m.episode, m.mean_reward, m.policy_loss, m.value_loss, m.lr);
    }
  });
  if (!c.out_dir.empty()) {
    std::printf("%s\n", (c.out_dir / "model.pxrl").string().c_str());
  }
  return 0;
}

EvalConfig eval_config(const Options& o, const Model& model, const TrainConfig& c) {
  EvalConfig e;
  e.task = o.task.empty() ? model.task : c.task;
  e.t_max = o.t_max ? *o.t_max : model.t_max;
  e.mode = o.sample ? ActionMode::kSample : ActionMode::kGreedy;
  e.tta = o.tta;
  e.seed = c.seed;
  e.corruption = c.corruption;
  return e;
}

int run_eval(Options& o) {
  const TrainConfig c = build_config(o);
  if (o.model.empty()) throw InvalidArgument("eval needs --model");
  const Model model = load_model(o.model);
  const EvalConfig e = eval_config(o, model, c);
  const Dataset data = load_split(o, "test", is_color_task(e.task) ? 3 : 1, c.seed + 1);
  const EvalReport report = evaluate(model, data, e);
  const fs::path out = o.out.empty() ? fs::path("eval") : fs::path(o.out);
  write_report(out, report, model.actions);
  fs::create_directories(out / "restored");
  for (const ImageResult& r : report.images) {
    fs::path name = fs::path(r.name).stem();
    name += ".png";
    write_image(out / "restored" / name, r.restored);
  }
  std::printf("images %zu  psnr %.3f -> %.3f dB  ssim %.4f -> %.4f\n",
              report.images.size(), report.mean_psnr_input, report.mean_psnr_output,
              report.mean_ssim_input, report.mean_ssim_output);
  return 0;
}

int run_visualize(Options& o) {
  const TrainConfig c = build_config(o);
  if (o.model.empty()) throw InvalidArgument("visualize needs --model");
  const Model model = load_model(o.model);
  const EvalConfig e = eval_config(o, model, c);
  const int channels = is_color_task(e.task) ? 3 : 1;
  PixelGrid clean;
  if (!o.image.empty()) {
    clean = read_image(o.image);
    if (channels == 1 && clean.channels() == 3) clean = to_luminance(clean);
    if (channels == 3 && clean.channels() != 3) throw DataError("task needs an RGB image");
  } else {
    clean = load_split(o, "test", channels, c.seed + 1).images.front();
  }
  Rng rng = episode_rng(e.seed, 0);
  const PixelGrid noisy = corrupt(clean, e.task, e.corruption, rng);
  const fs::path out = o.out.empty() ? fs::path("visualize") : fs::path(o.out);
  visualize(model, clean, noisy, e, out);
  std::printf("%s\n", out.string().c_str());
  return 0;
}

int run_verify(Options& o) {
  const std::uint64_t seed = o.seed.value_or(1);
  const bool all = !(o.verify_filter || o.verify_returns || o.verify_grads ||
                     o.verify_optimality);
  std::vector<oracle::SuiteResult> results;
  if (all || o.verify_filter) results.push_back(oracle::verify_filters(100, 16, 1e-6, seed));
  if (all || o.verify_returns) {
    results.push_back(oracle::verify_returns(100, 8, 1e-5, seed));
    results.push_back(oracle::verify_identity_returns(100, seed));
  }
  if (all || o.verify_grads) {
    for (auto& r : oracle::verify_gradients(1e-3, seed)) results.push_back(r);
  }
  if (all || o.verify_optimality) results.push_back(oracle::verify_optimality(50, seed));
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-18s %s  worst %.3g", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.worst);
    if (!r.passed) {
      std::printf("  seed %llu  %s", static_cast<unsigned long long>(r.failing_seed),
                  r.detail.c_str());
    }
    std::printf("\n");
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitNumeric;
}

void add_data_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data, "Image directory (uses <dir>/train or <dir>/test if present)");
  cmd->add_option("--synthetic", o.synthetic, "Use N procedural images instead of --data");
  cmd->add_option("--synthetic-size", o.synthetic_size, "Side of procedural images");
  cmd->add_option("--set", o.sets, "Config override key=value (repeatable)");
  cmd->add_option("--t-max", o.t_max, "Episode length");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-pixel reinforcement learning for image restoration"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_file, "Config file of key = value lines");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--task", o.task,
                 "denoise_gauss, denoise_sp, denoise_poisson, restore or color");
  app.add_option("--out", o.out, "Output directory");

  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  add_data_flags(train_cmd, o);
  train_cmd->add_option("--episodes", o.episodes, "Training episodes");
  train_cmd->add_option("--batch", o.batch, "Images per episode");
  train_cmd->add_option("--crop", o.crop, "Side of the random training crop");
  train_cmd->add_option("--width", o.width, "Channels per layer");
  train_cmd->add_option("--checkpoint-every", o.checkpoint_every,
                        "Write checkpoint_<n>.pxrl every n episodes");
  train_cmd->add_option("--gru", o.gru, "Enable the convolutional GRU (true/false)");
  train_cmd->add_option("--rmc", o.rmc, "Enable reward map convolution (true/false)");
  train_cmd->add_option("--init-checkpoint", o.init_checkpoint,
                        "Start from a checkpoint (stepwise training)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a model (PSNR/SSIM)");
  add_data_flags(eval_cmd, o);
  eval_cmd->add_option("--model", o.model, "Checkpoint file");
  eval_cmd->add_flag("--tta", o.tta, "Average over the 8 dihedral transforms");
  eval_cmd->add_flag("--sample", o.sample, "Sample actions instead of taking the argmax");

  CLI::App* vis_cmd = app.add_subcommand("visualize", "Write per-step states and action maps");
  add_data_flags(vis_cmd, o);
  vis_cmd->add_option("--model", o.model, "Checkpoint file");
  vis_cmd->add_option("--image", o.image, "Clean input image");
  vis_cmd->add_flag("--sample", o.sample, "Sample actions instead of taking the argmax");

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the oracle suite");
  verify_cmd->add_flag("--filter", o.verify_filter, "Actions against naive filters");
  verify_cmd->add_flag("--returns", o.verify_returns, "Returns against the closed form");
  verify_cmd->add_flag("--grads", o.verify_grads, "Gradients against finite differences");
  verify_cmd->add_flag("--optimality", o.verify_optimality,
                       "Tiny instances against exhaustive search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return run_train(o);
    if (eval_cmd->parsed()) return run_eval(o);
    if (vis_cmd->parsed()) return run_visualize(o);
    if (verify_cmd->parsed()) return run_verify(o);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
