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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   acceptance [--only 1,2,...] [--data DIR] [--log DIR]
//
// Criteria 7-9 train desk-scale models on DIR/train and evaluate on DIR/test.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pixelrl/env.h"
#include "pixelrl/error.h"
#include "pixelrl/evaluate.h"
#include "pixelrl/net.h"
#include "pixelrl/oracle.h"
#include "pixelrl/rmc.h"
#include "pixelrl/trainer.h"

namespace {

using namespace pixelrl;
namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

Outcome from_suite(const oracle::SuiteResult& r) {
  Outcome o{r.passed, fmt("%s worst %.3g", r.name.c_str(), r.worst)};
  if (!r.passed) o.detail += fmt(" seed %llu: %s", (unsigned long long)r.failing_seed,
                                 r.detail.c_str());
  return o;
}

Outcome combine(const std::vector<Outcome>& parts) {
  Outcome all{true, ""};
  for (const Outcome& p : parts) {
    all.passed = all.passed && p.passed;
    all.detail += (all.detail.empty() ? "" : "; ") + p.detail;
  }
  return all;
}

// 1: random-action rollouts on every task.
Outcome telescoping() {
  const Task tasks[] = {Task::kDenoiseGauss, Task::kDenoiseSaltPepper,
                        Task::kDenoisePoisson, Task::kRestore, Task::kColor};
  const Dataset gray = synthetic_dataset(4, 24, 24, 1, 101);
  const Dataset rgb = synthetic_dataset(4, 24, 24, 3, 102);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Task task = tasks[i % 5];
    const ActionSet set = is_color_task(task) ? ActionSet::color13() : ActionSet::denoise9();
    BatchConfig cfg;
    cfg.batch = 1;
    cfg.crop = 16;
    cfg.task = task;
    cfg.t_max = default_t_max(task);
    Rng rng = episode_rng(1, i);
    EpisodeState env = sample_episode(is_color_task(task) ? rgb : gray, cfg, rng);
    const Map2D d0 = pixel_distance(env.target, env.current, task);
    Map2D sum(d0.height, d0.width);
    while (!env.finished()) {
      ActionMap a(d0.height, d0.width);
      for (int& id : a.ids()) id = static_cast<int>(rng() % set.size());
      StepResult r = step(env, a, set);
      for (std::size_t k = 0; k < sum.size(); ++k) sum.v[k] += r.reward.v[k];
      env = std::move(r.next);
    }
    const Map2D d1 = pixel_distance(env.target, env.current, task);
    for (std::size_t k = 0; k < sum.size(); ++k) {
      const double expect = d0.v[k] - d1.v[k];
      worst = std::max(worst, std::abs(sum.v[k] - expect) / std::max(1.0, std::abs(expect)));
    }
  }
  return {worst <= 1e-6, fmt("100 rollouts, 5 tasks, worst relative error %.3g", worst)};
}

// 3 (part): losses and gradients with an enabled identity kernel against RMC off.
Outcome identity_training_path() {
  ArchConfig arch;
  arch.width = 4;
  arch.trunk_dilations = {1, 2};
  arch.branch_dilations = {1};
  arch.required_receptive_field.reset();
  Rng init(5);
  const ActorCritic<float> net(init_params<float>(init, arch));
  const Dataset data = synthetic_dataset(2, 32, 32, 1, 5);
  BatchConfig bc;
  bc.batch = 2;
  bc.crop = 16;
  Rng rng(6);
  std::vector<Rng> rngs{Rng(7), Rng(8)};
  const Rollout<float> r = collect_rollout(net, sample_training_batch(data, bc, rng),
                                           ActionSet::denoise9(), rngs, ActionMode::kSample,
                                           Bootstrap::kValue);
  const ReturnConfig cfg{0.95, Bootstrap::kValue};
  NetworkParams<float> ga = net.params().zeros_like(), gb = ga;
  const auto la = surrogate_loss(net, r, compute_targets(r, RmcKernel::identity(33, true), cfg),
                                 0.01, &ga);
  const auto lb = surrogate_loss(net, r, compute_targets(r, RmcKernel::identity(33, false), cfg),
                                 0.01, &gb);
  bool same = la.policy == lb.policy && la.value == lb.value;
  for (std::size_t i = 0; i < ga.tensors.size(); ++i) {
    same = same && std::memcmp(ga.tensors[i].data.data(), gb.tensors[i].data.data(),
                               ga.tensors[i].data.size() * sizeof(float)) == 0;
  }
  return {same, same ? "losses and gradients bit-identical" : "identity kernel changed training"};
}

// 5: default layout and single-pixel locality.
Outcome locality() {
  const ArchConfig def;
  if (def.receptive_field() != 33) {
    return {false, fmt("default receptive field %d", def.receptive_field())};
  }
  ArchConfig arch = def;
  arch.use_gru = false;
  Rng rng(3);
  const ActorCritic<double> net(init_params<double>(rng, arch));
  const int size = 45, cy = 22, cx = 22;
  Tensor<double> x(1, 1, size, size);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : x.data) v = u(rng);
  const auto before = net.forward(x, {});
  x.at(0, 0, cy, cx) += 0.5;
  const auto after = net.forward(x, {});
  int outside_changes = 0, radius = 0;
  for (int y = 0; y < size; ++y) {
    for (int xx = 0; xx < size; ++xx) {
      const int cheb = std::max(std::abs(y - cy), std::abs(xx - cx));
      bool changed = before.value.at(0, 0, y, xx) != after.value.at(0, 0, y, xx);
      for (int a = 0; a < before.probs.c; ++a) {
        changed = changed || before.probs.at(0, a, y, xx) != after.probs.at(0, a, y, xx);
      }
      if (changed) radius = std::max(radius, cheb);
      if (changed && cheb > 16) ++outside_changes;
    }
  }
  return {outside_changes == 0,
          fmt("RF 33; outputs changed up to Chebyshev radius %d, %d beyond 16", radius,
              outside_changes)};
}

// 10: repeated training runs and checkpoint round-trip.
Outcome determinism(const fs::path& scratch) {
  TrainConfig c;
  c.episodes = 10;
  c.batch = 2;
  c.crop = 32;
  c.seed = 17;
  c.arch.width = 8;
  c.checkpoint_every = 10;
  const Dataset data = synthetic_dataset(4, 48, 48, 1, 17);
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  c.out_dir = scratch / "a";
  train(c, data);
  c.out_dir = scratch / "b";
  train(c, data);
  const std::string a = bytes(scratch / "a" / "checkpoint_10.pxrl");
  const bool identical = !a.empty() && a == bytes(scratch / "b" / "checkpoint_10.pxrl");

  const Checkpoint ck = load_checkpoint(scratch / "a" / "checkpoint_10.pxrl");
  save_checkpoint(scratch / "resaved.pxrl", ck.params,
                  ck.kernel ? &*ck.kernel : nullptr, ck.meta);
  const bool lossless = bytes(scratch / "resaved.pxrl") == a;
  return {identical && lossless,
          fmt("episode-10 checkpoints %s; load/save round-trip %s",
              identical ? "bit-identical" : "DIFFER", lossless ? "lossless" : "LOSSY")};
}

// Desk-scale protocol shared by criteria 7-9.
constexpr int kDeskEpisodes = 1000;

TrainConfig desk_config(Task task, bool rmc, std::uint64_t seed) {
  TrainConfig c;
  c.task = task;
  c.episodes = kDeskEpisodes;
  c.batch = 8;
  c.crop = 64;
  c.t_max = 5;
  c.rmc = rmc;
  c.seed = seed;
  c.arch.width = 16;
  c.arch.use_gru = true;
  return c;
}

Model as_model(const NetworkParams<float>& params, const TrainConfig& c) {
  return Model{ActorCritic<float>(params), c.action_set(), c.task, c.resolved_t_max()};
}

EvalConfig desk_eval(Task task) {
  EvalConfig e;
  e.task = task;
  e.t_max = 5;
  e.seed = 2024;
  return e;
}

struct DeskRun {
  EvalReport trained;
  EvalReport trained_sampled;  // diagnostic only
  EvalReport untrained;
  double seconds = 0.0;
};

DeskRun desk_run(const TrainConfig& c, const Dataset& train_set, const Dataset& test_set,
                 const fs::path& log_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainConfig run = c;
  if (!log_dir.empty()) {
    run.out_dir = log_dir / fmt("%s_rmc%d_seed%llu", std::string(task_name(c.task)).c_str(),
                                c.rmc ? 1 : 0, (unsigned long long)c.seed);
  }
  const TrainResult trained = train(run, train_set);
  DeskRun out;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.trained = evaluate(as_model(trained.params, c), test_set, desk_eval(c.task));
  EvalConfig sampled = desk_eval(c.task);
  sampled.mode = ActionMode::kSample;
  out.trained_sampled = evaluate(as_model(trained.params, c), test_set, sampled);

  ArchConfig arch = c.arch;
  arch.in_channels = 1;
  arch.num_actions = c.action_set().size();
  Rng init(c.seed);  // the same initialization train() starts from
  out.untrained = evaluate(as_model(init_params<float>(init, arch), c), test_set,
                           desk_eval(c.task));
  return out;
}

class Runner {
 public:
  explicit Runner(std::set<int> only) : only_(std::move(only)) {}

  bool wants(int id) const { return only_.empty() || only_.count(id) > 0; }

  void run(int id, const char* name, const std::function<Outcome()>& check) {
    if (!wants(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(id, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  void report(int id, const char* name, const Outcome& o, double seconds) {
    std::printf("%s  %2d %-22s %s (%.1fs)\n", o.passed ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), seconds);
    std::fflush(stdout);
    failures_ += o.passed ? 0 : 1;
  }

  int failures() const { return failures_; }

 private:
  std::set<int> only_;
  int failures_ = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pixelrl acceptance checks"};
  std::vector<int> only;
  std::string data_dir = PIXELRL_DESK_DATA;
  std::string log_dir;
  app.add_option("--only", only, "Criterion numbers to run")->delimiter(',');
  app.add_option("--data", data_dir, "Desk dataset with train/ and test/");
  app.add_option("--log", log_dir, "Keep training logs and checkpoints here");
  CLI11_PARSE(app, argc, argv);

  Runner runner(std::set<int>(only.begin(), only.end()));
  const fs::path scratch = fs::temp_directory_path() / "pixelrl_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  runner.run(1, "telescoping", telescoping);
  runner.run(2, "filter-oracle", [] {
    return from_suite(oracle::verify_filters(100, 16, 1e-6, 1));
  });
  runner.run(3, "return-equivalence", [] {
    return combine({from_suite(oracle::verify_returns(100, 8, 1e-5, 1)),
                    from_suite(oracle::verify_identity_returns(100, 1)),
                    identity_training_path()});
  });
  runner.run(4, "gradient-exactness", [] {
    std::vector<Outcome> parts;
    for (const auto& r : oracle::verify_gradients(1e-3, 1)) parts.push_back(from_suite(r));
    return combine(parts);
  });
  runner.run(5, "receptive-field", locality);
  runner.run(6, "tiny-optimality", [] {
    return from_suite(oracle::verify_optimality(50, 1));
  });

  if (runner.wants(7) || runner.wants(8) || runner.wants(9)) {
    const Dataset train_set = load_dataset(fs::path(data_dir) / "train", 1);
    const Dataset test_set = load_dataset(fs::path(data_dir) / "test", 1);

    if (runner.wants(7) || runner.wants(9)) {
      const TrainConfig c = desk_config(Task::kDenoiseGauss, true, 1);
      DeskRun run;
      std::string error;
      try {
        run = desk_run(c, train_set, test_set, log_dir);
      } catch (const std::exception& e) {
        error = e.what();
      }
      if (runner.wants(7)) {
        const double over_noisy = run.trained.mean_psnr_output - run.trained.mean_psnr_input;
        const double over_untrained =
            run.trained.mean_psnr_output - run.untrained.mean_psnr_output;
        const bool ok = error.empty() && over_noisy >= 1.5 && over_untrained >= 1.0 &&
                        run.seconds <= 3600.0;
        runner.report(7, "desk-learning",
                      {ok, error.empty()
                               ? fmt("noisy %.2f dB, untrained %.2f dB, trained %.2f dB "
                                     "(+%.2f / +%.2f)",
                                     run.trained.mean_psnr_input,
                                     run.untrained.mean_psnr_output,
                                     run.trained.mean_psnr_output, over_noisy, over_untrained)
                               : "exception: " + error},
                      run.seconds);
      }
      if (runner.wants(9)) {
        const ActionSet set = c.action_set();
        // Judged on the greedy histogram; the sampled one is printed for context.
        const double first = error.empty() ? filter_share(run.trained, set, 0) : 0.0;
        const double last = error.empty() ? filter_share(run.trained, set, 4) : 0.0;
        std::string detail = "exception: " + error;
        if (error.empty()) {
          detail = fmt("filter share t=0 %.4f, t=4 %.4f (sampled actions: %.4f, %.4f)", first,
                       last, filter_share(run.trained_sampled, set, 0),
                       filter_share(run.trained_sampled, set, 4));
        }
        runner.report(9, "behavior-signature", {error.empty() && first > last, detail}, 0.0);
      }
    }

    runner.run(8, "rmc-ablation", [&] {
      double with = 0.0, without = 0.0;
      std::string per_seed;
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const double a = desk_run(desk_config(Task::kDenoiseSaltPepper, true, seed),
                                  train_set, test_set, log_dir)
                             .trained.mean_psnr_output;
        const double b = desk_run(desk_config(Task::kDenoiseSaltPepper, false, seed),
                                  train_set, test_set, log_dir)
                             .trained.mean_psnr_output;
        with += a / 3.0;
        without += b / 3.0;
        per_seed += fmt(" %.2f/%.2f", a, b);
      }
      return Outcome{with >= without - 0.05,
                     fmt("RMC %.2f dB vs plain %.2f dB (per seed%s)", with, without,
                         per_seed.c_str())};
    });
  }

  runner.run(10, "determinism", [&] { return determinism(scratch / "determinism"); });
  fs::remove_all(scratch);
  return runner.failures() == 0 ? 0 : 1;
}
