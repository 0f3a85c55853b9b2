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

#include "pixelrl/actions.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "pixelrl/error.h"

namespace pixelrl {
namespace {

constexpr int kRadius = kFilterSize / 2;
constexpr int kTaps = kFilterSize * kFilterSize;

std::string format_param(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

float clip01(double v) {
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

double luma(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

// Precomputed per-state data for evaluating actions pixel by pixel. Both the
// whole-image operations and the per-pixel gather go through `apply`, so a
// uniform action map reproduces the single-action result bit for bit.
class PixelEvaluator {
 public:
  PixelEvaluator(const PixelGrid& state, const std::vector<ActionSpec>& specs)
      : state_(state) {
    for (const ActionSpec& spec : specs) {
      if (is_color_op(spec.kind) && state.channels() != 3) {
        throw InvalidActionError("action '" + spec.name +
                                 "' requires a 3-channel RGB state");
      }
      if (spec.kind == ActionKind::kContrast && !mean_luma_) {
        double sum = 0.0;
        for (int y = 0; y < state.height(); ++y) {
          for (int x = 0; x < state.width(); ++x) {
            sum += luma(state.at(y, x, 0), state.at(y, x, 1), state.at(y, x, 2));
          }
        }
        mean_luma_ = sum / static_cast<double>(state.pixel_count());
      }
    }
    kernels_.resize(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const ActionSpec& spec = specs[i];
      auto& k = kernels_[i];
      switch (spec.kind) {
        case ActionKind::kBox5:
          k.fill(1.0 / kTaps);
          break;
        case ActionKind::kGaussian:
          k = gaussian_kernel5(spec.sigma);
          break;
        case ActionKind::kBilateral:
          for (int dy = -kRadius; dy <= kRadius; ++dy) {
            for (int dx = -kRadius; dx <= kRadius; ++dx) {
              k[(dy + kRadius) * kFilterSize + dx + kRadius] = std::exp(
                  -(dx * dx + dy * dy) / (2.0 * spec.sigma_space * spec.sigma_space));
            }
          }
          break;
        default:
          break;
      }
    }
  }

  // Writes all channels of pixel (y, x) for action `index` into `out`.
  void apply(const ActionSpec& spec, std::size_t index, int y, int x,
             PixelGrid& out) const {
    const int channels = state_.channels();
    switch (spec.kind) {
      case ActionKind::kBox5:
      case ActionKind::kGaussian:
        for (int c = 0; c < channels; ++c) {
          out.at(y, x, c) = clip01(linear(kernels_[index], y, x, c));
        }
        return;
      case ActionKind::kBilateral:
        for (int c = 0; c < channels; ++c) {
          out.at(y, x, c) = clip01(bilateral(spec, kernels_[index], y, x, c));
        }
        return;
      case ActionKind::kMedian5:
        for (int c = 0; c < channels; ++c) {
          out.at(y, x, c) = clip01(median(y, x, c));
        }
        return;
      case ActionKind::kIncrement:
        for (int c = 0; c < channels; ++c) {
          out.at(y, x, c) = clip01(double(state_.at(y, x, c)) + spec.delta);
        }
        return;
      case ActionKind::kNothing:
        for (int c = 0; c < channels; ++c) out.at(y, x, c) = state_.at(y, x, c);
        return;
      case ActionKind::kContrast:
        for (int c = 0; c < 3; ++c) {
          out.at(y, x, c) =
              clip01(*mean_luma_ + spec.factor * (state_.at(y, x, c) - *mean_luma_));
        }
        return;
      case ActionKind::kSaturation: {
        const double l =
            luma(state_.at(y, x, 0), state_.at(y, x, 1), state_.at(y, x, 2));
        for (int c = 0; c < 3; ++c) {
          out.at(y, x, c) = clip01(l + spec.factor * (state_.at(y, x, c) - l));
        }
        return;
      }
      case ActionKind::kBrightness:
        for (int c = 0; c < 3; ++c) {
          out.at(y, x, c) = clip01(spec.factor * state_.at(y, x, c));
        }
        return;
      case ActionKind::kChannelPair:
        for (int c = 0; c < 3; ++c) {
          const bool scaled = c == spec.pair[0] || c == spec.pair[1];
          out.at(y, x, c) = scaled ? clip01(spec.factor * state_.at(y, x, c))
                                   : state_.at(y, x, c);
        }
        return;
    }
    throw InvalidActionError("unknown action kind for '" + spec.name + "'");
  }

 private:
  double linear(const std::array<double, kTaps>& k, int y, int x, int c) const {
    double sum = 0.0;
    for (int dy = -kRadius; dy <= kRadius; ++dy) {
      for (int dx = -kRadius; dx <= kRadius; ++dx) {
        sum += k[(dy + kRadius) * kFilterSize + dx + kRadius] *
               state_.clamped(y + dy, x + dx, c);
      }
    }
    return sum;
  }

  double bilateral(const ActionSpec& spec, const std::array<double, kTaps>& spatial,
                   int y, int x, int c) const {
    const double center = state_.at(y, x, c);
    const double inv_two_var = 1.0 / (2.0 * spec.sigma_color * spec.sigma_color);
    double num = 0.0;
    double den = 0.0;
    for (int dy = -kRadius; dy <= kRadius; ++dy) {
      for (int dx = -kRadius; dx <= kRadius; ++dx) {
        const double v = state_.clamped(y + dy, x + dx, c);
        const double d = v - center;
        const double w =
            spatial[(dy + kRadius) * kFilterSize + dx + kRadius] *
            std::exp(-d * d * inv_two_var);
        num += w * v;
        den += w;
      }
    }
    return num / den;
  }

  double median(int y, int x, int c) const {
    std::array<float, kTaps> window;
    int n = 0;
    for (int dy = -kRadius; dy <= kRadius; ++dy) {
      for (int dx = -kRadius; dx <= kRadius; ++dx) {
        window[n++] = state_.clamped(y + dy, x + dx, c);
      }
    }
    std::nth_element(window.begin(), window.begin() + kTaps / 2, window.end());
    return window[kTaps / 2];
  }

  const PixelGrid& state_;
  std::optional<double> mean_luma_;
  std::vector<std::array<double, kTaps>> kernels_;
};

PixelGrid apply_uniform(const PixelGrid& state, const ActionSpec& spec) {
  if (state.space() != ColorSpace::kIntensity) {
    throw InvalidActionError("actions operate on intensity grids, not Lab");
  }
  const std::vector<ActionSpec> specs{spec};
  const PixelEvaluator eval(state, specs);
  PixelGrid out(state.height(), state.width(), state.channels());
  for (int y = 0; y < state.height(); ++y) {
    for (int x = 0; x < state.width(); ++x) eval.apply(spec, 0, y, x, out);
  }
  return out;
}

}  // namespace

bool is_filter(ActionKind kind) {
  return kind == ActionKind::kBox5 || kind == ActionKind::kGaussian ||
         kind == ActionKind::kBilateral || kind == ActionKind::kMedian5;
}

bool is_color_op(ActionKind kind) {
  return kind == ActionKind::kContrast || kind == ActionKind::kSaturation ||
         kind == ActionKind::kBrightness || kind == ActionKind::kChannelPair;
}

ActionSpec ActionSpec::box5() {
  ActionSpec s;
  s.kind = ActionKind::kBox5;
  s.name = "box5";
  return s;
}

ActionSpec ActionSpec::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw InvalidActionError("gaussian sigma must be positive");
  ActionSpec s;
  s.kind = ActionKind::kGaussian;
  s.sigma = sigma;
  s.name = "gaussian(" + format_param(sigma) + ")";
  return s;
}

ActionSpec ActionSpec::bilateral(double sigma_color, double sigma_space) {
  if (!(sigma_color > 0.0) || !(sigma_space > 0.0)) {
    throw InvalidActionError("bilateral sigmas must be positive");
  }
  ActionSpec s;
  s.kind = ActionKind::kBilateral;
  s.sigma_color = sigma_color;
  s.sigma_space = sigma_space;
  s.name = "bilateral(" + format_param(sigma_color) + "," +
           format_param(sigma_space) + ")";
  return s;
}

ActionSpec ActionSpec::median5() {
  ActionSpec s;
  s.kind = ActionKind::kMedian5;
  s.name = "median5";
  return s;
}

ActionSpec ActionSpec::increment(double delta) {
  ActionSpec s;
  s.kind = ActionKind::kIncrement;
  s.delta = delta;
  s.name = delta >= 0.0 ? "pixel+1" : "pixel-1";
  return s;
}

ActionSpec ActionSpec::contrast(double factor) {
  ActionSpec s;
  s.kind = ActionKind::kContrast;
  s.factor = factor;
  s.name = "contrast*" + format_param(factor);
  return s;
}

ActionSpec ActionSpec::saturation(double factor) {
  ActionSpec s;
  s.kind = ActionKind::kSaturation;
  s.factor = factor;
  s.name = "saturation*" + format_param(factor);
  return s;
}

ActionSpec ActionSpec::brightness(double factor) {
  ActionSpec s;
  s.kind = ActionKind::kBrightness;
  s.factor = factor;
  s.name = "brightness*" + format_param(factor);
  return s;
}

ActionSpec ActionSpec::channel_pair(int first, int second, double factor) {
  if (first < 0 || first > 2 || second < 0 || second > 2 || first == second) {
    throw InvalidActionError("channel pair must name two distinct RGB channels");
  }
  static constexpr const char* kNames[] = {"red", "green", "blue"};
  ActionSpec s;
  s.kind = ActionKind::kChannelPair;
  s.pair = {first, second};
  s.factor = factor;
  s.name = std::string(kNames[first]) + "&" + kNames[second] + "*" +
           format_param(factor);
  return s;
}

ActionSpec ActionSpec::nothing() { return ActionSpec{}; }

ActionSet::ActionSet(std::string name, std::vector<ActionSpec> specs)
    : name_(std::move(name)), specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    specs_[i].id = static_cast<int>(i);
    if (specs_[i].kind == ActionKind::kNothing) {
      if (nothing_id_ >= 0) {
        throw InvalidActionError("action set '" + name_ +
                                 "' has more than one nothing action");
      }
      nothing_id_ = static_cast<int>(i);
    }
  }
  if (nothing_id_ < 0) {
    throw InvalidActionError("action set '" + name_ + "' lacks a nothing action");
  }
}

ActionSet ActionSet::denoise9() {
  return ActionSet("denoise9", {ActionSpec::box5(), ActionSpec::bilateral(1.0, 5.0),
                                ActionSpec::bilateral(0.1, 5.0), ActionSpec::median5(),
                                ActionSpec::gaussian(1.5), ActionSpec::gaussian(0.5),
                                ActionSpec::increment(1.0 / 255.0),
                                ActionSpec::increment(-1.0 / 255.0),
                                ActionSpec::nothing()});
}

ActionSet ActionSet::basic4() {
  return ActionSet("basic4", {ActionSpec::box5(), ActionSpec::median5(),
                              ActionSpec::gaussian(1.5), ActionSpec::nothing()});
}

ActionSet ActionSet::basic5() {
  return ActionSet("basic5", {ActionSpec::box5(), ActionSpec::bilateral(1.0, 5.0),
                              ActionSpec::median5(), ActionSpec::gaussian(1.5),
                              ActionSpec::nothing()});
}

ActionSet ActionSet::basic7() {
  return ActionSet("basic7", {ActionSpec::box5(), ActionSpec::bilateral(1.0, 5.0),
                              ActionSpec::median5(), ActionSpec::gaussian(1.5),
                              ActionSpec::increment(1.0 / 255.0),
                              ActionSpec::increment(-1.0 / 255.0),
                              ActionSpec::nothing()});
}

ActionSet ActionSet::color13() {
  std::vector<ActionSpec> specs;
  for (double f : {0.95, 1.05}) specs.push_back(ActionSpec::contrast(f));
  for (double f : {0.95, 1.05}) specs.push_back(ActionSpec::saturation(f));
  for (double f : {0.95, 1.05}) specs.push_back(ActionSpec::brightness(f));
  for (double f : {0.95, 1.05}) specs.push_back(ActionSpec::channel_pair(0, 1, f));
  for (double f : {0.95, 1.05}) specs.push_back(ActionSpec::channel_pair(1, 2, f));
  for (double f : {0.95, 1.05}) specs.push_back(ActionSpec::channel_pair(0, 2, f));
  specs.push_back(ActionSpec::nothing());
  return ActionSet("color13", std::move(specs));
}

ActionSet ActionSet::pointwise3() {
  return ActionSet("pointwise3", {ActionSpec::increment(1.0 / 255.0),
                                  ActionSpec::increment(-1.0 / 255.0),
                                  ActionSpec::nothing()});
}

ActionSet ActionSet::by_name(std::string_view name) {
  if (name == "denoise9") return denoise9();
  if (name == "basic4") return basic4();
  if (name == "basic5") return basic5();
  if (name == "basic7") return basic7();
  if (name == "color13") return color13();
  if (name == "pointwise3") return pointwise3();
  throw InvalidArgument("unknown action set '" + std::string(name) + "'");
}

bool ActionSet::needs_color() const {
  return std::any_of(specs_.begin(), specs_.end(),
                     [](const ActionSpec& s) { return is_color_op(s.kind); });
}

std::array<double, kTaps> gaussian_kernel5(double sigma) {
  std::array<double, kTaps> k{};
  double sum = 0.0;
  for (int dy = -kRadius; dy <= kRadius; ++dy) {
    for (int dx = -kRadius; dx <= kRadius; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k[(dy + kRadius) * kFilterSize + dx + kRadius] = w;
      sum += w;
    }
  }
  for (double& w : k) w /= sum;
  return k;
}

PixelGrid apply_filter(const PixelGrid& state, const ActionSpec& spec) {
  if (!is_filter(spec.kind)) {
    throw InvalidActionError("apply_filter: '" + spec.name + "' is not a filter");
  }
  return apply_uniform(state, spec);
}

PixelGrid apply_increment(const PixelGrid& state, double delta) {
  return apply_uniform(state, ActionSpec::increment(delta));
}

PixelGrid apply_color_op(const PixelGrid& state, const ActionSpec& spec) {
  if (!is_color_op(spec.kind)) {
    throw InvalidActionError("apply_color_op: '" + spec.name +
                             "' is not a color operation");
  }
  return apply_uniform(state, spec);
}

PixelGrid apply_action(const PixelGrid& state, const ActionSpec& spec) {
  return apply_uniform(state, spec);
}

PixelGrid apply_action_map(const PixelGrid& state, const ActionMap& actions,
                           const ActionSet& set) {
  if (actions.height() != state.height() || actions.width() != state.width()) {
    throw ShapeError("apply_action_map: action map is " +
                     std::to_string(actions.height()) + "x" +
                     std::to_string(actions.width()) + " but state is " +
                     std::to_string(state.height()) + "x" +
                     std::to_string(state.width()));
  }
  if (state.space() != ColorSpace::kIntensity) {
    throw InvalidActionError("actions operate on intensity grids, not Lab");
  }
  std::vector<bool> used(set.size(), false);
  for (int id : actions.ids()) {
    if (id < 0 || id >= set.size()) {
      throw InvalidActionError("action id " + std::to_string(id) +
                               " out of range for set '" + set.name() + "'");
    }
    used[id] = true;
  }
  // Only actions that appear need their per-state precomputation.
  std::vector<ActionSpec> active;
  std::vector<int> slot(set.size(), -1);
  for (int id = 0; id < set.size(); ++id) {
    if (used[id]) {
      slot[id] = static_cast<int>(active.size());
      active.push_back(set[id]);
    }
  }
  const PixelEvaluator eval(state, active);
  PixelGrid out(state.height(), state.width(), state.channels());
  for (int y = 0; y < state.height(); ++y) {
    for (int x = 0; x < state.width(); ++x) {
      const int id = actions.at(y, x);
      eval.apply(set[id], static_cast<std::size_t>(slot[id]), y, x, out);
    }
  }
  return out;
}

std::array<double, 3> rgb_to_lab(double r, double g, double b) {
  auto linearize = [](double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
  };
  const double rl = linearize(r);
  const double gl = linearize(g);
  const double bl = linearize(b);
  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  constexpr double kXn = 0.95047;
  constexpr double kYn = 1.0;
  constexpr double kZn = 1.08883;
  constexpr double kDelta = 6.0 / 29.0;
  auto f = [&](double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t)
                                        : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
  };
  const double fx = f(x / kXn);
  const double fy = f(y / kYn);
  const double fz = f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

PixelGrid rgb_to_lab(const PixelGrid& state) {
  if (state.channels() != 3) {
    throw InvalidArgument("rgb_to_lab: expected a 3-channel RGB grid");
  }
  PixelGrid out(state.height(), state.width(), 3);
  out.set_space(ColorSpace::kLab);
  for (int y = 0; y < state.height(); ++y) {
    for (int x = 0; x < state.width(); ++x) {
      const auto lab =
          rgb_to_lab(state.at(y, x, 0), state.at(y, x, 1), state.at(y, x, 2));
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = static_cast<float>(lab[c]);
    }
  }
  return out;
}

}  // namespace pixelrl
