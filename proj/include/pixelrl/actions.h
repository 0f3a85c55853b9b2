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

#ifndef PIXELRL_ACTIONS_H_
#define PIXELRL_ACTIONS_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "pixelrl/image.h"

namespace pixelrl {

enum class ActionKind {
  kBox5,
  kGaussian,
  kBilateral,
  kMedian5,
  kIncrement,
  kContrast,
  kSaturation,
  kBrightness,
  kChannelPair,
  kNothing,
};

bool is_filter(ActionKind kind);
bool is_color_op(ActionKind kind);

// Window side of every neighborhood filter.
inline constexpr int kFilterSize = 5;

// A single per-pixel action. Only the fields relevant to `kind` are used.
struct ActionSpec {
  int id = 0;
  ActionKind kind = ActionKind::kNothing;
  std::string name = "nothing";
  double sigma = 0.0;        // gaussian
  double sigma_color = 0.0;  // bilateral range sigma, on [0,1] intensities
  double sigma_space = 0.0;  // bilateral spatial sigma, in pixels
  double delta = 0.0;        // increment, on [0,1] intensities
  double factor = 1.0;       // color ops
  std::array<int, 2> pair{0, 1};

  static ActionSpec box5();
  static ActionSpec gaussian(double sigma);
  static ActionSpec bilateral(double sigma_color, double sigma_space);
  static ActionSpec median5();
  static ActionSpec increment(double delta);
  static ActionSpec contrast(double factor);
  static ActionSpec saturation(double factor);
  static ActionSpec brightness(double factor);
  static ActionSpec channel_pair(int first, int second, double factor);
  static ActionSpec nothing();
};

// An ordered action set. Ids are positions; exactly one `nothing` action.
class ActionSet {
 public:
  ActionSet(std::string name, std::vector<ActionSpec> specs);

  // Table of filters and +-1 intensity steps used for denoising/restoration.
  static ActionSet denoise9();
  // Ablation subsets of denoise9.
  static ActionSet basic4();
  static ActionSet basic5();
  static ActionSet basic7();
  // Contrast, saturation, brightness and channel-pair scalings.
  static ActionSet color13();
  // One of the preset names above.
  static ActionSet by_name(std::string_view name);
  // Point-wise subset {+1/255, -1/255, nothing}.
  static ActionSet pointwise3();

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(specs_.size()); }
  const ActionSpec& operator[](int id) const { return specs_.at(id); }
  const std::vector<ActionSpec>& specs() const { return specs_; }
  int nothing_id() const { return nothing_id_; }
  bool needs_color() const;

 private:
  std::string name_;
  std::vector<ActionSpec> specs_;
  int nothing_id_ = -1;
};

// Per-pixel action ids.
class ActionMap {
 public:
  ActionMap() = default;
  ActionMap(int height, int width, int fill = 0)
      : height_(height), width_(width),
        ids_(static_cast<std::size_t>(height) * width, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int& at(int y, int x) { return ids_[static_cast<std::size_t>(y) * width_ + x]; }
  int at(int y, int x) const { return ids_[static_cast<std::size_t>(y) * width_ + x]; }
  std::vector<int>& ids() { return ids_; }
  const std::vector<int>& ids() const { return ids_; }

  friend bool operator==(const ActionMap&, const ActionMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<int> ids_;
};

// Normalized 5x5 Gaussian weights, row-major.
std::array<double, kFilterSize * kFilterSize> gaussian_kernel5(double sigma);

PixelGrid apply_filter(const PixelGrid& state, const ActionSpec& spec);
PixelGrid apply_increment(const PixelGrid& state, double delta);
PixelGrid apply_color_op(const PixelGrid& state, const ActionSpec& spec);
// Applies any single action to every pixel.
PixelGrid apply_action(const PixelGrid& state, const ActionSpec& spec);

// Evaluates each pixel's chosen action on the same input state.
PixelGrid apply_action_map(const PixelGrid& state, const ActionMap& actions,
                           const ActionSet& set);

// sRGB (D65) to CIELab. The result is tagged ColorSpace::kLab.
PixelGrid rgb_to_lab(const PixelGrid& state);
std::array<double, 3> rgb_to_lab(double r, double g, double b);

}  // namespace pixelrl

#endif  // PIXELRL_ACTIONS_H_
