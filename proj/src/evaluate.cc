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

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "pixelrl/error.h"
#include "pixelrl/metrics.h"

namespace pixelrl {

Model load_model(const std::filesystem::path& checkpoint) {
  Checkpoint ck = load_checkpoint(checkpoint);
  const std::string task = ck.meta_value("task");
  const std::string actions = ck.meta_value("actions");
  const std::string t_max = ck.meta_value("t_max");
  if (task.empty() || actions.empty() || t_max.empty()) {
    throw DataError("checkpoint metadata lacks task, actions or t_max");
  }
  try {
    Model model{ActorCritic<float>(std::move(ck.params)), ActionSet::by_name(actions),
                parse_task(task), std::stoi(t_max)};
    if (model.actions.size() != model.net.arch().num_actions) {
      throw DataError("checkpoint action set '" + actions +
                      "' does not match the policy head");
    }
    return model;
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
}

namespace {

struct Episode {
  PixelGrid output;
  std::vector<ActionMap> actions;
};

Episode run_episode(const Model& model, const PixelGrid& clean, const PixelGrid& noisy,
                    const EvalConfig& config, Rng& rng) {
  std::vector<Rng> rngs{rng};
  Rollout<float> r =
      collect_rollout(model.net, {make_episode(clean, noisy, config.task, config.t_max)},
                      model.actions, rngs, config.mode, Bootstrap::kZero);
  rng = rngs.front();
  Episode e{r.final_states.front().current, {}};
  for (auto& step : r.actions) e.actions.push_back(std::move(step.front()));
  return e;
}

void check_model(const Model& model, const EvalConfig& config) {
  if (model.task != config.task) {
    throw DataError("checkpoint was trained for task '" +
                    std::string(task_name(model.task)) + "', not '" +
                    std::string(task_name(config.task)) + "'");
  }
  if (config.t_max < 0) throw InvalidArgument("t_max must be >= 0");
}

}  // namespace

EvalReport evaluate_pairs(const Model& model, const Dataset& clean,
                          const std::vector<PixelGrid>& corrupted,
                          const EvalConfig& config) {
  check_model(model, config);
  if (clean.empty()) throw InvalidArgument("evaluation dataset is empty");
  if (corrupted.size() != clean.size()) {
    throw InvalidArgument("need one corrupted input per clean image");
  }
  EvalReport report;
  report.action_counts.assign(config.t_max,
                              std::vector<long>(model.actions.size(), 0));
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const PixelGrid& target = clean.images[i];
    const PixelGrid& noisy = corrupted[i];
    require_same_shape(target, noisy, "evaluate");
    Rng rng = episode_rng(config.seed ^ 0x5eedULL, i);
    ImageResult res;
    res.name = clean.names[i];
    res.corrupted = noisy;
    const Episode base = run_episode(model, target, noisy, config, rng);
    for (int t = 0; t < config.t_max; ++t) {
      for (int id : base.actions[t].ids()) ++report.action_counts[t][id];
    }
    if (config.tta) {
      PixelGrid sum(target.height(), target.width(), target.channels());
      for (int k = 0; k < 8; ++k) {
        const PixelGrid out =
            k == 0 ? base.output
                   : inverse_dihedral(run_episode(model, dihedral(target, k),
                                                  dihedral(noisy, k), config, rng)
                                          .output,
                                      k);
        for (std::size_t j = 0; j < sum.values().size(); ++j) {
          sum.values()[j] += out.values()[j];
        }
      }
      for (float& v : sum.values()) v /= 8.0f;
      clip_unit(sum);
      res.restored = std::move(sum);
      res.restored.set_space(target.space());
    } else {
      res.restored = base.output;
    }
    res.psnr_input = psnr(target, noisy);
    res.psnr_output = psnr(target, res.restored);
    const bool ssim_ok =
        target.height() >= kSsimWindow && target.width() >= kSsimWindow;
    res.ssim_input = ssim_ok ? ssim(target, noisy) : 0.0;
    res.ssim_output = ssim_ok ? ssim(target, res.restored) : 0.0;
    report.images.push_back(std::move(res));
  }
  std::sort(report.images.begin(), report.images.end(),
            [](const ImageResult& a, const ImageResult& b) { return a.name < b.name; });
  const double n = static_cast<double>(report.images.size());
  for (const ImageResult& r : report.images) {
    report.mean_psnr_input += r.psnr_input / n;
    report.mean_psnr_output += r.psnr_output / n;
    report.mean_ssim_input += r.ssim_input / n;
    report.mean_ssim_output += r.ssim_output / n;
  }
  return report;
}

EvalReport evaluate(const Model& model, const Dataset& clean, const EvalConfig& config) {
  check_model(model, config);
  std::vector<PixelGrid> corrupted;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    Rng rng = episode_rng(config.seed, i);
    corrupted.push_back(corrupt(clean.images[i], config.task, config.corruption, rng));
  }
  return evaluate_pairs(model, clean, corrupted, config);
}

double filter_share(const EvalReport& report, const ActionSet& set, int t) {
  const std::vector<long>& row = report.action_counts.at(t);
  long filters = 0;
  const long total = std::accumulate(row.begin(), row.end(), 0L);
  for (int a = 0; a < set.size(); ++a) {
    if (is_filter(set[a].kind)) filters += row[a];
  }
  return total == 0 ? 0.0 : static_cast<double>(filters) / total;
}

namespace {

std::string format_metric(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

void write_report(const std::filesystem::path& dir, const EvalReport& report,
                  const ActionSet& set) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.csv", std::ios::trunc);
    if (!out) throw DataError("cannot write " + (dir / "report.csv").string());
    out << "image,psnr_input,psnr_output,ssim_input,ssim_output\n";
    for (const ImageResult& r : report.images) {
      out << r.name << ',' << format_metric(r.psnr_input) << ','
          << format_metric(r.psnr_output) << ',' << format_metric(r.ssim_input) << ','
          << format_metric(r.ssim_output) << '\n';
    }
    out << "mean," << format_metric(report.mean_psnr_input) << ','
        << format_metric(report.mean_psnr_output) << ','
        << format_metric(report.mean_ssim_input) << ','
        << format_metric(report.mean_ssim_output) << '\n';
  }
  std::ofstream out(dir / "actions.csv", std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "actions.csv").string());
  out << "step,action,count\n";
  for (std::size_t t = 0; t < report.action_counts.size(); ++t) {
    for (int a = 0; a < set.size(); ++a) {
      out << t << ',' << set[a].name << ',' << report.action_counts[t][a] << '\n';
    }
  }
}

const std::array<Rgb8, kMaxPaletteActions>& action_palette() {
  static const std::array<Rgb8, kMaxPaletteActions> kPalette{{
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
      {245, 130, 48},  {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
      {0, 0, 0},       {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
      {170, 110, 40},  {128, 0, 0},     {128, 128, 0},  {255, 255, 255},
  }};
  return kPalette;
}

IndexedImage render_action_map(const ActionMap& actions, const ActionSet& set) {
  if (set.size() > kMaxPaletteActions) {
    throw InvalidArgument("action maps support at most 16 actions");
  }
  IndexedImage img;
  img.height = actions.height();
  img.width = actions.width();
  img.palette.assign(action_palette().begin(), action_palette().begin() + set.size());
  img.indices.reserve(actions.ids().size());
  for (int id : actions.ids()) {
    if (id < 0 || id >= set.size()) throw InvalidActionError("action id out of range");
    img.indices.push_back(static_cast<std::uint8_t>(id));
  }
  return img;
}

std::string action_legend(const ActionSet& set) {
  std::ostringstream os;
  for (int a = 0; a < set.size() && a < kMaxPaletteActions; ++a) {
    const Rgb8& c = action_palette()[a];
    os << a << " #" << std::hex << std::setfill('0') << std::setw(2) << int(c[0])
       << std::setw(2) << int(c[1]) << std::setw(2) << int(c[2]) << std::dec << ' '
       << set[a].name << '\n';
  }
  return os.str();
}

void visualize(const Model& model, const PixelGrid& clean, const PixelGrid& corrupted,
               const EvalConfig& config, const std::filesystem::path& out_dir) {
  check_model(model, config);
  if (model.actions.size() > kMaxPaletteActions) {
    throw InvalidArgument("action maps support at most 16 actions");
  }
  std::filesystem::create_directories(out_dir);
  EpisodeState state = make_episode(clean, corrupted, config.task, config.t_max);
  write_image(out_dir / "state_t0.png", state.current);
  Rng rng = episode_rng(config.seed ^ 0x5eedULL, 0);
  std::vector<Rng> rngs{rng};
  Rollout<float> r = collect_rollout(model.net, {state}, model.actions, rngs, config.mode,
                                     Bootstrap::kZero);
  // Replay the recorded actions to recover intermediate states.
  for (int t = 0; t < r.steps(); ++t) {
    const ActionMap& a = r.actions[t].front();
    const IndexedImage img = render_action_map(a, model.actions);
    write_indexed_png(out_dir / ("actions_t" + std::to_string(t) + ".png"), img.height,
                      img.width, img.indices, img.palette);
    state = step(state, a, model.actions).next;
    write_image(out_dir / ("state_t" + std::to_string(t + 1) + ".png"), state.current);
  }
  std::ofstream legend(out_dir / "legend.txt", std::ios::trunc);
  if (!legend) throw DataError("cannot write legend.txt");
  legend << action_legend(model.actions);
}

}  // namespace pixelrl
