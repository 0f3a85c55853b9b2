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

#include "pixelrl/env.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "pixelrl/error.h"
#include "pixelrl/image_io.h"

namespace pixelrl {
namespace {

#include "bitmap_font.inc"

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool glyph_ink(char ch, int gx, int gy) {
  const int code = static_cast<unsigned char>(ch);
  if (code < kFirstGlyph || code > kLastGlyph) return false;
  return (kGlyphRows[code - kFirstGlyph][gy] >> (kGlyphWidth - 1 - gx)) & 1;
}

// Picks a run of whole words from a random document, roughly `max_chars` long.
std::string random_snippet(const std::vector<std::string>& corpus, int max_chars,
                           Rng& rng) {
  const std::string& doc =
      corpus[std::uniform_int_distribution<std::size_t>(0, corpus.size() - 1)(rng)];
  if (doc.empty()) return {};
  std::size_t start =
      std::uniform_int_distribution<std::size_t>(0, doc.size() - 1)(rng);
  while (start > 0 && !std::isspace(static_cast<unsigned char>(doc[start - 1]))) {
    --start;
  }
  std::string out;
  for (std::size_t i = start; i < doc.size() && static_cast<int>(out.size()) < max_chars;
       ++i) {
    const unsigned char ch = static_cast<unsigned char>(doc[i]);
    if (ch == '\n' || ch == '\r' || ch == '\t') {
      out.push_back(' ');
    } else if (ch >= 32 && ch < 127) {
      out.push_back(static_cast<char>(ch));
    }
  }
  return out;
}

void smooth3(PixelGrid& grid) {
  const PixelGrid src = grid;
  static constexpr double k[3] = {0.25, 0.5, 0.25};
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      for (int c = 0; c < grid.channels(); ++c) {
        double s = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            s += k[dy + 1] * k[dx + 1] * src.clamped(y + dy, x + dx, c);
          }
        }
        grid.at(y, x, c) = static_cast<float>(s);
      }
    }
  }
}

PixelGrid synthetic_image(int height, int width, int channels, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto color = [&](double lo, double hi) {
    std::array<double, 3> c{};
    const double base = lo + (hi - lo) * unit(rng);
    for (int i = 0; i < 3; ++i) {
      c[i] = channels == 1 ? base : std::clamp(base + 0.3 * (unit(rng) - 0.5), 0.0, 1.0);
    }
    return c;
  };

  PixelGrid img(height, width, channels);
  const auto bg0 = color(0.2, 0.8);
  const double gx = 0.4 * (unit(rng) - 0.5);
  const double gy = 0.4 * (unit(rng) - 0.5);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(y, x, c) = static_cast<float>(std::clamp(
            bg0[c] + gx * (x / double(width) - 0.5) + gy * (y / double(height) - 0.5),
            0.0, 1.0));
      }
    }
  }

  const int shapes = 4 + static_cast<int>(unit(rng) * 5);
  for (int s = 0; s < shapes; ++s) {
    const int kind = static_cast<int>(unit(rng) * 3);
    const double cy = unit(rng) * height;
    const double cx = unit(rng) * width;
    const double ry = (0.08 + 0.25 * unit(rng)) * height;
    const double rx = (0.08 + 0.25 * unit(rng)) * width;
    const auto fill = color(0.0, 1.0);
    const double shade = 0.3 * (unit(rng) - 0.5);
    const double freq = 0.2 + 0.8 * unit(rng);
    const double angle = unit(rng) * std::numbers::pi;
    const double amp = unit(rng) < 0.4 ? 0.12 : 0.0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u = (x - cx) / rx;
        const double v = (y - cy) / ry;
        bool inside = false;
        switch (kind) {
          case 0:
            inside = u * u + v * v <= 1.0;
            break;
          case 1:
            inside = std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
            break;
          default:
            inside = std::abs(u) + std::abs(v) <= 1.0;
            break;
        }
        if (!inside) continue;
        const double texture =
            amp * std::sin(freq * (x * std::cos(angle) + y * std::sin(angle)));
        for (int c = 0; c < channels; ++c) {
          img.at(y, x, c) = static_cast<float>(
              std::clamp(fill[c] + shade * v + texture, 0.0, 1.0));
        }
      }
    }
  }
  smooth3(img);
  return img;
}

}  // namespace

Task parse_task(std::string_view name) {
  if (name == "denoise_gauss") return Task::kDenoiseGauss;
  if (name == "denoise_sp") return Task::kDenoiseSaltPepper;
  if (name == "denoise_poisson") return Task::kDenoisePoisson;
  if (name == "restore") return Task::kRestore;
  if (name == "color") return Task::kColor;
  throw InvalidArgument("unknown task '" + std::string(name) + "'");
}

std::string_view task_name(Task task) {
  switch (task) {
    case Task::kDenoiseGauss:
      return "denoise_gauss";
    case Task::kDenoiseSaltPepper:
      return "denoise_sp";
    case Task::kDenoisePoisson:
      return "denoise_poisson";
    case Task::kRestore:
      return "restore";
    case Task::kColor:
      return "color";
  }
  return "unknown";
}

int default_t_max(Task task) {
  switch (task) {
    case Task::kRestore:
      return 15;
    case Task::kColor:
      return 10;
    default:
      return 5;
  }
}

bool is_color_task(Task task) { return task == Task::kColor; }

void CorruptionConfig::validate() const {
  if (!(gaussian_sigma > 0.0)) throw InvalidArgument("gaussian_sigma must be > 0");
  if (!(sp_density > 0.0 && sp_density < 1.0)) {
    throw InvalidArgument("sp_density must lie in (0,1)");
  }
  if (!(poisson_peak > 0.0)) throw InvalidArgument("poisson_peak must be > 0");
  if (text.min_font_px <= 0 || text.max_font_px < text.min_font_px) {
    throw InvalidArgument("invalid font size range");
  }
  if (!(text.min_coverage > 0.0 && text.min_coverage <= text.max_coverage &&
        text.max_coverage < 1.0)) {
    throw InvalidArgument("invalid text coverage range");
  }
  if (!(color_strength > 0.0 && color_strength < 1.0)) {
    throw InvalidArgument("color_strength must lie in (0,1)");
  }
}

PixelGrid add_gaussian_noise(const PixelGrid& image, double sigma_8bit, Rng& rng) {
  if (!(sigma_8bit >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
  std::normal_distribution<double> noise(0.0, sigma_8bit / 255.0);
  PixelGrid out = image;
  if (sigma_8bit == 0.0) return out;
  for (float& v : out.values()) {
    v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
  }
  return out;
}

PixelGrid add_salt_pepper(const PixelGrid& image, double density, Rng& rng) {
  if (!(density >= 0.0 && density < 1.0)) {
    throw InvalidArgument("salt-and-pepper density must lie in [0,1)");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PixelGrid out = image;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (unit(rng) >= density) continue;
      const float value = unit(rng) < 0.5 ? 0.0f : 1.0f;
      for (int c = 0; c < out.channels(); ++c) out.at(y, x, c) = value;
    }
  }
  return out;
}

PixelGrid add_poisson(const PixelGrid& image, double peak, Rng& rng) {
  if (!(peak > 0.0)) throw InvalidArgument("poisson peak must be > 0");
  PixelGrid out = image;
  for (float& v : out.values()) {
    const double mean = peak * v;
    if (mean <= 0.0) {
      v = 0.0f;
      continue;
    }
    std::poisson_distribution<long> count(mean);
    v = static_cast<float>(std::clamp(count(rng) / peak, 0.0, 1.0));
  }
  return out;
}

double TextOverlay::coverage() const {
  if (mask.empty()) return 0.0;
  return std::count(mask.begin(), mask.end(), 1) / static_cast<double>(mask.size());
}

const std::vector<std::string>& default_corpus() {
  static const std::vector<std::string> corpus = {
      "The committee met on Tuesday to review the budget for the coming year. "
      "Several members raised concerns about maintenance costs and the schedule "
      "for replacing the old equipment in the north building.",
      "Re: printer drivers. I tried the new version last night and it still "
      "crashes when printing landscape pages. Has anyone found a workaround? "
      "Please reply by mail if you know a fix.",
      "Orbital mechanics is mostly about energy. To raise the far side of an "
      "orbit you burn prograde at the near side, and the spacecraft coasts "
      "for half a revolution before the change is visible.",
      "For sale: 1987 sedan, 140k miles, new tires, runs well. Asking 1200 or "
      "best offer. Call after 6pm weekdays, anytime on weekends.",
      "The hockey season opened with three upsets. Goaltending was the story "
      "of the night, with 41 saves in the second game alone.",
      "When compiling the kernel module, make sure the headers match the "
      "running version; otherwise the loader rejects the symbols at boot.",
  };
  return corpus;
}

std::vector<std::string> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("corpus directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> docs;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    docs.push_back(text.str());
  }
  if (docs.empty()) throw DataError("corpus directory is empty: " + dir.string());
  return docs;
}

TextOverlay overlay_text(const PixelGrid& image, Rng& rng,
                         const TextOverlayConfig& config) {
  if (config.corpus.empty()) throw InvalidArgument("overlay_text: empty corpus");
  TextOverlay result;
  result.image = image;
  result.mask.assign(image.pixel_count(), 0);

  const bool any_ink = std::any_of(
      config.corpus.begin(), config.corpus.end(), [](const std::string& doc) {
        return std::any_of(doc.begin(), doc.end(),
                           [](char ch) { return ch > 32 && ch < 127; });
      });
  if (!any_ink) return result;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  result.intensity = unit(rng) < 0.5 ? 0.0f : 1.0f;
  const double total = static_cast<double>(image.pixel_count());
  const double target =
      config.min_coverage + (config.max_coverage - config.min_coverage) * unit(rng);
  const std::size_t limit = static_cast<std::size_t>(config.max_coverage * total);
  std::size_t covered = 0;

  std::vector<std::size_t> fresh;
  for (int attempt = 0; attempt < 400 && covered < target * total; ++attempt) {
    const int size = std::uniform_int_distribution<int>(config.min_font_px,
                                                        config.max_font_px)(rng);
    const double scale = size / static_cast<double>(kGlyphHeight);
    const int advance = std::max(1, static_cast<int>(std::lround(kGlyphWidth * scale)));
    const bool bold = unit(rng) < 0.3;
    const bool italic = unit(rng) < 0.3;
    const int max_chars = image.width() / advance + 2;
    const std::string text = random_snippet(config.corpus, max_chars, rng);
    int pen_x = static_cast<int>(unit(rng) * image.width()) - image.width() / 4;
    const int top = static_cast<int>(unit(rng) * (image.height() + size / 2)) - size / 2;

    for (char ch : text) {
      fresh.clear();
      for (int py = 0; py < size; ++py) {
        const int y = top + py;
        if (y < 0 || y >= image.height()) continue;
        const int gy = std::min(kGlyphHeight - 1, static_cast<int>(py / scale));
        const int slant = italic ? (size - py) / 4 : 0;
        for (int px = 0; px < advance + (bold ? 1 : 0); ++px) {
          const int gx = static_cast<int>(px / scale);
          const bool ink = (gx < kGlyphWidth && glyph_ink(ch, gx, gy)) ||
                           (bold && px > 0 &&
                            static_cast<int>((px - 1) / scale) < kGlyphWidth &&
                            glyph_ink(ch, static_cast<int>((px - 1) / scale), gy));
          const int x = pen_x + px + slant;
          if (!ink || x < 0 || x >= image.width()) continue;
          const std::size_t idx = static_cast<std::size_t>(y) * image.width() + x;
          if (result.mask[idx] == 0) fresh.push_back(idx);
        }
      }
      pen_x += advance;
      std::sort(fresh.begin(), fresh.end());
      fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
      if (covered + fresh.size() > limit) continue;
      for (std::size_t idx : fresh) result.mask[idx] = 1;
      covered += fresh.size();
      if (covered >= target * total) break;
    }
  }

  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!result.mask[static_cast<std::size_t>(y) * image.width() + x]) continue;
      for (int c = 0; c < image.channels(); ++c) {
        result.image.at(y, x, c) = result.intensity;
      }
    }
  }
  return result;
}

PixelGrid distort_color(const PixelGrid& image, double strength, Rng& rng) {
  if (image.channels() != 3) throw InvalidArgument("distort_color needs RGB input");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  // Low-frequency fields: a random plane plus a single blob.
  struct Field {
    double base, gx, gy, blob, cy, cx, r;
  };
  auto make_field = [&]() {
    return Field{strength * unit(rng), 0.5 * strength * unit(rng),
                 0.5 * strength * unit(rng), strength * unit(rng),
                 0.5 + 0.5 * unit(rng), 0.5 + 0.5 * unit(rng),
                 0.2 + 0.15 * (unit(rng) + 1.0)};
  };
  const Field bright = make_field();
  const Field sat = make_field();
  std::array<double, 3> gain{};
  for (double& g : gain) g = 1.0 + 0.5 * strength * unit(rng);

  PixelGrid out(image.height(), image.width(), 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double v = y / double(image.height());
      const double u = x / double(image.width());
      auto eval = [&](const Field& f) {
        const double d2 = ((v - f.cy) * (v - f.cy) + (u - f.cx) * (u - f.cx)) / (f.r * f.r);
        return 1.0 + f.base + f.gx * (u - 0.5) + f.gy * (v - 0.5) + f.blob * std::exp(-d2);
      };
      const double b = eval(bright);
      const double s = eval(sat);
      const double l = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) +
                       0.114 * image.at(y, x, 2);
      for (int c = 0; c < 3; ++c) {
        const double value = gain[c] * b * (l + s * (image.at(y, x, c) - l));
        out.at(y, x, c) = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  return out;
}

PixelGrid corrupt(const PixelGrid& clean, Task task, const CorruptionConfig& config,
                  Rng& rng) {
  switch (task) {
    case Task::kDenoiseGauss:
      return add_gaussian_noise(clean, config.gaussian_sigma, rng);
    case Task::kDenoiseSaltPepper:
      return add_salt_pepper(clean, config.sp_density, rng);
    case Task::kDenoisePoisson:
      return add_poisson(clean, config.poisson_peak, rng);
    case Task::kRestore:
      return overlay_text(clean, rng, config.text).image;
    case Task::kColor:
      return distort_color(clean, config.color_strength, rng);
  }
  throw InvalidArgument("corrupt: unknown task");
}

EpisodeState make_episode(const PixelGrid& target, const PixelGrid& corrupted,
                          Task task, int t_max) {
  require_same_shape(target, corrupted, "make_episode");
  if (t_max < 0) throw InvalidArgument("t_max must be >= 0");
  if (is_color_task(task) && target.channels() != 3) {
    throw InvalidArgument("color task needs RGB images");
  }
  EpisodeState state;
  state.task = task;
  state.target = target;
  state.current = corrupted;
  state.t = 0;
  state.t_max = t_max;
  return state;
}

Map2D pixel_distance(const PixelGrid& target, const PixelGrid& state, Task task) {
  require_same_shape(target, state, "pixel_distance");
  Map2D d(state.height(), state.width());
  if (is_color_task(task)) {
    for (int y = 0; y < state.height(); ++y) {
      for (int x = 0; x < state.width(); ++x) {
        const auto a = rgb_to_lab(target.at(y, x, 0), target.at(y, x, 1),
                                  target.at(y, x, 2));
        const auto b =
            rgb_to_lab(state.at(y, x, 0), state.at(y, x, 1), state.at(y, x, 2));
        d.at(y, x) = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) +
                               (a[1] - b[1]) * (a[1] - b[1]) +
                               (a[2] - b[2]) * (a[2] - b[2]));
      }
    }
    return d;
  }
  for (int y = 0; y < state.height(); ++y) {
    for (int x = 0; x < state.width(); ++x) {
      double sum = 0.0;
      for (int c = 0; c < state.channels(); ++c) {
        const double e = 255.0 * (double(target.at(y, x, c)) - state.at(y, x, c));
        sum += e * e;
      }
      d.at(y, x) = sum;
    }
  }
  return d;
}

StepResult step(const EpisodeState& env, const ActionMap& actions,
                const ActionSet& set) {
  if (env.finished()) {
    throw InvalidArgument("step: episode already finished (t=" +
                          std::to_string(env.t) + ")");
  }
  StepResult result{env, {}};
  result.next.current = apply_action_map(env.current, actions, set);
  result.next.t = env.t + 1;
  const Map2D before = pixel_distance(env.target, env.current, env.task);
  const Map2D after = pixel_distance(env.target, result.next.current, env.task);
  result.reward = Map2D(before.height, before.width);
  for (std::size_t i = 0; i < before.size(); ++i) {
    result.reward.v[i] = before.v[i] - after.v[i];
  }
  return result;
}

Dataset load_dataset(const std::filesystem::path& dir, int channels) {
  if (channels != 1 && channels != 3) throw InvalidArgument("channels must be 1 or 3");
  Dataset data;
  for (const auto& path : list_images(dir)) {
    PixelGrid img = read_image(path);
    if (channels == 1 && img.channels() == 3) img = to_luminance(img);
    if (channels == 3 && img.channels() == 1) {
      PixelGrid rgb(img.height(), img.width(), 3);
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          for (int c = 0; c < 3; ++c) rgb.at(y, x, c) = img.at(y, x);
        }
      }
      img = std::move(rgb);
    }
    data.images.push_back(std::move(img));
    data.names.push_back(path.filename().string());
  }
  if (data.empty()) throw DataError("no images found in " + dir.string());
  return data;
}

Dataset synthetic_dataset(int count, int height, int width, int channels,
                          std::uint64_t seed) {
  Dataset data;
  for (int i = 0; i < count; ++i) {
    Rng rng(splitmix64(seed * 1000003ULL + static_cast<std::uint64_t>(i)));
    data.images.push_back(synthetic_image(height, width, channels, rng));
    std::ostringstream name;
    name << "synth_" << std::setw(4) << std::setfill('0') << i << ".png";
    data.names.push_back(name.str());
  }
  return data;
}

namespace {

void check_crop(const Dataset& dataset, const BatchConfig& config) {
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  if (config.batch <= 0 || config.crop <= 0) {
    throw InvalidArgument("batch and crop must be positive");
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const PixelGrid& img = dataset.images[i];
    if (img.height() < config.crop || img.width() < config.crop) {
      throw InvalidArgument("image '" + dataset.names[i] + "' is smaller than the " +
                            std::to_string(config.crop) + "px crop");
    }
  }
}

EpisodeState draw_episode(const Dataset& dataset, const BatchConfig& config,
                          Rng& rng) {
  const PixelGrid& img = dataset.images[std::uniform_int_distribution<std::size_t>(
      0, dataset.size() - 1)(rng)];
  const int top = std::uniform_int_distribution<int>(0, img.height() - config.crop)(rng);
  const int left = std::uniform_int_distribution<int>(0, img.width() - config.crop)(rng);
  PixelGrid clean = crop(img, top, left, config.crop, config.crop);
  if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
    clean = flip_horizontal(clean);
  }
  clean = rotate90(clean, std::uniform_int_distribution<int>(0, 3)(rng));
  PixelGrid noisy = corrupt(clean, config.task, config.corruption, rng);
  return make_episode(clean, noisy, config.task, config.t_max);
}

}  // namespace

EpisodeState sample_episode(const Dataset& dataset, const BatchConfig& config,
                            Rng& rng) {
  check_crop(dataset, config);
  return draw_episode(dataset, config, rng);
}

std::vector<EpisodeState> sample_training_batch(const Dataset& dataset,
                                                const BatchConfig& config, Rng& rng) {
  check_crop(dataset, config);
  std::vector<EpisodeState> batch;
  batch.reserve(config.batch);
  for (int b = 0; b < config.batch; ++b) {
    batch.push_back(draw_episode(dataset, config, rng));
  }
  return batch;
}

Rng episode_rng(std::uint64_t global_seed, std::uint64_t episode_index) {
  // The seed is hashed first so that nearby seeds do not share streams.
  return Rng(splitmix64(splitmix64(global_seed) ^ episode_index));
}

}  // namespace pixelrl
