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

#include "pixelrl/oracle.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "pixelrl/env.h"
#include "pixelrl/error.h"
#include "pixelrl/net.h"
#include "pixelrl/rmc.h"
#include "pixelrl/trainer.h"

namespace pixelrl::oracle {
namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double sample(const PixelGrid& s, int y, int x, int c) {
  if (y < 0) y = 0;
  if (y > s.height() - 1) y = s.height() - 1;
  if (x < 0) x = 0;
  if (x > s.width() - 1) x = s.width() - 1;
  return s.at(y, x, c);
}

double naive_neighborhood(const PixelGrid& s, const ActionSpec& spec, int y, int x,
                          int c) {
  std::vector<double> values;
  std::vector<double> weights;
  const double center = s.at(y, x, c);
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) {
      const double v = sample(s, y + i, x + j, c);
      double w = 1.0;
      if (spec.kind == ActionKind::kGaussian) {
        w = std::exp(-(i * i + j * j) / (2.0 * spec.sigma * spec.sigma));
      } else if (spec.kind == ActionKind::kBilateral) {
        w = std::exp(-(i * i + j * j) / (2.0 * spec.sigma_space * spec.sigma_space)) *
            std::exp(-(v - center) * (v - center) /
                     (2.0 * spec.sigma_color * spec.sigma_color));
      }
      values.push_back(v);
      weights.push_back(w);
    }
  }
  if (spec.kind == ActionKind::kMedian5) {
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    num += weights[k] * values[k];
    den += weights[k];
  }
  return num / den;
}

double luminance(const PixelGrid& s, int y, int x) {
  return 0.299 * s.at(y, x, 0) + 0.587 * s.at(y, x, 1) + 0.114 * s.at(y, x, 2);
}

// out(i) = sum_d w(d) map(i - d), zero outside.
Map2D naive_convolve(const Map2D& map, const std::vector<double>& w, int size) {
  const int r = size / 2;
  Map2D out(map.height, map.width);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int sy = y - dy, sx = x - dx;
          if (sy < 0 || sx < 0 || sy >= map.height || sx >= map.width) continue;
          s += w[(dy + r) * size + dx + r] * map.at(sy, sx);
        }
      }
      out.at(y, x) = s;
    }
  }
  return out;
}

Map2D random_map(std::mt19937_64& rng, int h, int w) {
  std::normal_distribution<double> n(0.0, 1.0);
  Map2D m(h, w);
  for (double& v : m.v) v = n(rng);
  return m;
}

PixelGrid random_grid(std::mt19937_64& rng, int h, int w, int c) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  PixelGrid g(h, w, c);
  for (float& v : g.values()) v = u(rng);
  return g;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

PixelGrid naive_filter(const PixelGrid& state, const ActionSpec& spec) {
  const int h = state.height(), w = state.width(), ch = state.channels();
  PixelGrid out(h, w, ch);
  out.set_space(state.space());
  double mean_luma = 0.0;
  if (is_color_op(spec.kind)) {
    if (ch != 3) throw InvalidActionError("color operations need RGB");
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) mean_luma += luminance(state, y, x);
    }
    mean_luma /= static_cast<double>(h) * w;
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        const double v = state.at(y, x, c);
        double o = v;
        switch (spec.kind) {
          case ActionKind::kBox5:
          case ActionKind::kGaussian:
          case ActionKind::kBilateral:
          case ActionKind::kMedian5:
            o = naive_neighborhood(state, spec, y, x, c);
            break;
          case ActionKind::kIncrement:
            o = v + spec.delta;
            break;
          case ActionKind::kNothing:
            o = v;
            break;
          case ActionKind::kContrast:
            o = mean_luma + spec.factor * (v - mean_luma);
            break;
          case ActionKind::kSaturation: {
            const double l = luminance(state, y, x);
            o = l + spec.factor * (v - l);
            break;
          }
          case ActionKind::kBrightness:
            o = spec.factor * v;
            break;
          case ActionKind::kChannelPair:
            o = (c == spec.pair[0] || c == spec.pair[1]) ? spec.factor * v : v;
            break;
        }
        out.at(y, x, c) = static_cast<float>(clamp01(o));
      }
    }
  }
  return out;
}

std::vector<Map2D> closed_form_returns(const std::vector<Map2D>& rewards,
                                       const Map2D& bootstrap,
                                       const std::vector<double>& kernel, int size,
                                       double gamma) {
  const int n = static_cast<int>(rewards.size());
  if (n < 1 || n > 4) throw InvalidArgument("closed_form_returns needs 1 <= n <= 4");
  if (kernel.size() != static_cast<std::size_t>(size) * size) {
    throw InvalidArgument("closed_form_returns: kernel size mismatch");
  }
  std::vector<Map2D> out;
  for (int k = 0; k < n; ++k) {
    Map2D total(bootstrap.height, bootstrap.width);
    // Terms gamma^j w^j * r(k+j), then gamma^(n-k) w^(n-k) * V.
    for (int j = 0; j <= n - k; ++j) {
      Map2D term = j < n - k ? rewards[k + j] : bootstrap;
      for (int p = 0; p < j; ++p) term = naive_convolve(term, kernel, size);
      const double scale = std::pow(gamma, j);
      for (std::size_t i = 0; i < term.size(); ++i) total.v[i] += scale * term.v[i];
    }
    out.push_back(std::move(total));
  }
  return out;
}

std::vector<double> numeric_grad(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x, double eps) {
  std::vector<double> grad(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = f(probe);
    probe[i] = x[i] - eps;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("numeric_grad: f is not finite near coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

TinyOptimum exhaustive_best(const TinyInstance& inst) {
  const PixelGrid& target = inst.target;
  const PixelGrid& state = inst.state;
  if (target.channels() != 1 || target.height() > 3 || target.width() > 3 ||
      inst.t_max < 0 || inst.t_max > 3) {
    throw InvalidArgument("tiny instance must be gray, at most 3x3, t_max <= 3");
  }
  require_same_shape(target, state, "exhaustive_best");
  int sequences = 1;
  for (int t = 0; t < inst.t_max; ++t) sequences *= 3;
  static constexpr int kDelta[3] = {1, -1, 0};

  TinyOptimum best;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      const long goal = std::lround(target.at(y, x, 0) * 255.0);
      const long start = std::lround(state.at(y, x, 0) * 255.0);
      long best_reward = 0;
      int best_noops = -1;
      std::vector<int> best_seq;
      for (int code = 0; code < sequences; ++code) {
        long level = start;
        long reward = 0;
        int noops = 0;
        std::vector<int> seq;
        int rest = code;
        for (int t = 0; t < inst.t_max; ++t) {
          const int d = kDelta[rest % 3];
          rest /= 3;
          const long next = std::clamp(level + d, 0L, 255L);
          reward += (goal - level) * (goal - level) - (goal - next) * (goal - next);
          level = next;
          noops += d == 0;
          seq.push_back(d);
        }
        if (best_noops < 0 || reward > best_reward ||
            (reward == best_reward && noops > best_noops)) {
          best_reward = reward;
          best_noops = noops;
          best_seq = seq;
        }
      }
      best.total_reward += static_cast<double>(best_reward);
      best.best_sequences.push_back(std::move(best_seq));
    }
  }
  return best;
}

TinyInstance random_tiny_instance(std::uint64_t seed, int max_error) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> side(1, 3), steps(1, 3), level(0, 255),
      error(-max_error, max_error);
  TinyInstance inst;
  const int h = side(rng), w = side(rng);
  inst.t_max = steps(rng);
  inst.target = PixelGrid(h, w, 1);
  inst.state = PixelGrid(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int goal = level(rng);
      const int start = std::clamp(goal + error(rng), 0, 255);
      inst.target.at(y, x, 0) = static_cast<float>(goal / 255.0);
      inst.state.at(y, x, 0) = static_cast<float>(start / 255.0);
    }
  }
  return inst;
}

SuiteResult verify_filters(int instances, int size, double tolerance, std::uint64_t seed) {
  SuiteResult res{"filter", true, 0.0, 0, ""};
  std::vector<ActionSpec> specs = ActionSet::denoise9().specs();
  const ActionSet color = ActionSet::color13();
  specs.insert(specs.end(), color.specs().begin(), color.specs().end());
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    std::mt19937_64 rng(s);
    for (int channels : {1, 3}) {
      const PixelGrid grid = random_grid(rng, size, size, channels);
      for (const ActionSpec& spec : specs) {
        if (is_color_op(spec.kind) && channels != 3) continue;
        const PixelGrid got = apply_action(grid, spec);
        const PixelGrid want = naive_filter(grid, spec);
        for (std::size_t k = 0; k < got.values().size(); ++k) {
          const double err = std::abs(double(got.values()[k]) - want.values()[k]);
          if (err > res.worst) res.worst = err;
          if (err > tolerance && res.passed) {
            res.passed = false;
            res.failing_seed = s;
            res.detail = "action '" + spec.name + "' differs by " + std::to_string(err);
          }
        }
      }
    }
  }
  return res;
}

SuiteResult verify_returns(int instances, int size, double tolerance, std::uint64_t seed) {
  SuiteResult res{"returns", true, 0.0, 0, ""};
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> g(0.5, 1.0);
    for (int n = 1; n <= 3; ++n) {
      for (int k : {1, 3}) {
        std::vector<Map2D> rewards;
        for (int t = 0; t < n; ++t) rewards.push_back(random_map(rng, size, size));
        const Map2D bootstrap = random_map(rng, size, size);
        RmcKernel w = RmcKernel::identity(k);
        std::normal_distribution<double> wd(0.0, 0.5);
        for (double& v : w.weights) v = wd(rng);
        ReturnConfig cfg;
        cfg.gamma = g(rng);
        const auto got = compute_returns(rewards, bootstrap, w, cfg);
        const auto want = closed_form_returns(rewards, bootstrap, w.weights, k, cfg.gamma);
        for (int t = 0; t < n; ++t) {
          for (std::size_t p = 0; p < got[t].size(); ++p) {
            const double err = std::abs(got[t].v[p] - want[t].v[p]) /
                               std::max(1.0, std::abs(want[t].v[p]));
            res.worst = std::max(res.worst, err);
            if (err > tolerance && res.passed) {
              res.passed = false;
              res.failing_seed = s;
              res.detail = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                           " relative error " + std::to_string(err);
            }
          }
        }
      }
    }
  }
  return res;
}

SuiteResult verify_identity_returns(int instances, std::uint64_t seed) {
  SuiteResult res{"identity_returns", true, 0.0, 0, ""};
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    std::mt19937_64 rng(s);
    const int n = 1 + static_cast<int>(rng() % 5);
    std::vector<Map2D> rewards;
    for (int t = 0; t < n; ++t) rewards.push_back(random_map(rng, 8, 8));
    const Map2D bootstrap = random_map(rng, 8, 8);
    ReturnConfig cfg;
    const auto with = compute_returns(rewards, bootstrap, RmcKernel::identity(33, true), cfg);
    const auto without =
        compute_returns(rewards, bootstrap, RmcKernel::identity(33, false), cfg);
    for (int t = 0; t < n; ++t) {
      if (std::memcmp(with[t].v.data(), without[t].v.data(),
                      with[t].size() * sizeof(double)) != 0 && res.passed) {
        res.passed = false;
        res.failing_seed = s;
        res.detail = "identity kernel changed returns at step " + std::to_string(t);
      }
    }
  }
  return res;
}

std::vector<SuiteResult> verify_gradients(double tolerance, std::uint64_t seed) {
  ArchConfig arch;
  arch.in_channels = 1;
  arch.width = 3;
  arch.num_actions = 3;
  arch.trunk_dilations = {1, 1};
  arch.branch_dilations = {1, 1};
  arch.use_gru = true;
  arch.required_receptive_field.reset();

  std::mt19937_64 rng(seed);
  NetworkParams<double> params = init_params<double>(rng, arch);
  // Nonzero biases exercise every term of the backward pass.
  std::normal_distribution<double> small(0.0, 0.1);
  for (auto& t : params.tensors) {
    if (t.name.find("bias") != std::string::npos) {
      for (double& v : t.data) v = small(rng);
    }
  }
  const ActorCritic<double> net(params);
  const ActionSet set = ActionSet::pointwise3();
  std::vector<EpisodeState> episodes;
  std::vector<Rng> rngs;
  for (int b = 0; b < 2; ++b) {
    const PixelGrid target = random_grid(rng, 4, 4, 1);
    const PixelGrid noisy = random_grid(rng, 4, 4, 1);
    episodes.push_back(make_episode(target, noisy, Task::kDenoiseGauss, 2));
    rngs.emplace_back(rng());
  }
  const Rollout<double> rollout =
      collect_rollout(net, episodes, set, rngs, ActionMode::kSample, Bootstrap::kValue);
  RmcKernel w = RmcKernel::identity(3);
  for (double& v : w.weights) v += small(rng) * 3.0;
  ReturnConfig cfg;
  cfg.gamma = 0.9;
  cfg.bootstrap = Bootstrap::kValue;
  const double beta = 0.05;
  const Targets targets = compute_targets(rollout, w, cfg);
  NetworkParams<double> grads = params.zeros_like();
  surrogate_loss(net, rollout, targets, beta, &grads);
  const std::vector<double> kernel_grad = rmc_kernel_gradient(rollout, targets, w, cfg);

  // Network parameters: targets held constant.
  std::vector<double> flat;
  for (const auto& t : params.tensors) flat.insert(flat.end(), t.data.begin(), t.data.end());
  auto loss_of_params = [&](const std::vector<double>& x) {
    NetworkParams<double> p = params;
    std::size_t o = 0;
    for (auto& t : p.tensors) {
      std::copy(x.begin() + o, x.begin() + o + t.data.size(), t.data.begin());
      o += t.data.size();
    }
    const ActorCritic<double> probe(std::move(p));
    Rollout<double> r = rollout;
    refresh_forward(probe, r);
    return surrogate_loss<double>(probe, r, targets, beta, nullptr).total();
  };
  const std::vector<double> numeric = numeric_grad(loss_of_params, flat, 1e-6);

  std::vector<SuiteResult> out;
  const std::pair<ParamGroup, const char*> groups[] = {{ParamGroup::kShared, "grad_shared"},
                                                       {ParamGroup::kPolicy, "grad_policy"},
                                                       {ParamGroup::kValue, "grad_value"},
                                                       {ParamGroup::kGru, "grad_gru"}};
  for (const auto& [group, name] : groups) {
    std::vector<double> a, n;
    std::size_t o = 0;
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
      const auto& t = params.tensors[i];
      if (t.group == group) {
        a.insert(a.end(), grads.tensors[i].data.begin(), grads.tensors[i].data.end());
        n.insert(n.end(), numeric.begin() + o, numeric.begin() + o + t.data.size());
      }
      o += t.data.size();
    }
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - n[i];
    SuiteResult r{name, true, 0.0, 0, ""};
    r.worst = norm(diff) / std::max({norm(a), norm(n), 1e-300});
    r.passed = r.worst < tolerance && norm(a) > 0.0;
    if (!r.passed) {
      r.failing_seed = seed;
      r.detail = "relative error " + std::to_string(r.worst) + " over " +
                 std::to_string(a.size()) + " parameters";
    }
    out.push_back(r);
  }

  // RMC kernel: policy and value maps held constant.
  auto loss_of_kernel = [&](const std::vector<double>& x) {
    RmcKernel k = w;
    k.weights = x;
    return surrogate_loss<double>(net, rollout, compute_targets(rollout, k, cfg), beta, nullptr)
        .total();
  };
  const std::vector<double> numeric_w = numeric_grad(loss_of_kernel, w.weights, 1e-6);
  std::vector<double> diff(numeric_w.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = kernel_grad[i] - numeric_w[i];
  SuiteResult r{"grad_rmc", true, 0.0, 0, ""};
  r.worst = norm(diff) / std::max({norm(kernel_grad), norm(numeric_w), 1e-300});
  r.passed = r.worst < tolerance && norm(kernel_grad) > 0.0;
  if (!r.passed) {
    r.failing_seed = seed;
    r.detail = "relative error " + std::to_string(r.worst);
  }
  out.push_back(r);
  return out;
}

SuiteResult verify_optimality(int instances, std::uint64_t seed) {
  SuiteResult res{"optimality", true, 0.0, 0, ""};
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    const TinyInstance inst = random_tiny_instance(s, 6);
    const TinyOptimum best = exhaustive_best(inst);
    double expected = 0.0;
    for (int y = 0; y < inst.target.height(); ++y) {
      for (int x = 0; x < inst.target.width(); ++x) {
        const long e = std::labs(std::lround(inst.target.at(y, x, 0) * 255.0) -
                                 std::lround(inst.state.at(y, x, 0) * 255.0));
        const long rest = std::max(e - inst.t_max, 0L);
        expected += static_cast<double>(e * e - rest * rest);
      }
    }
    const double err = std::abs(best.total_reward - expected);
    res.worst = std::max(res.worst, err);
    if (err != 0.0 && res.passed) {
      res.passed = false;
      res.failing_seed = s;
      std::ostringstream os;
      os << "exhaustive " << best.total_reward << " vs budget " << expected;
      res.detail = os.str();
    }
  }
  return res;
}

}  // namespace pixelrl::oracle
