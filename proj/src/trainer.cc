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

#include "pixelrl/trainer.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pixelrl/error.h"

namespace pixelrl {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw InvalidArgument("option '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw InvalidArgument("option '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  if (out.empty()) throw InvalidArgument("option '" + key + "': empty list");
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

int TrainConfig::resolved_t_max() const {
  return t_max > 0 ? t_max : default_t_max(task);
}

ActionSet TrainConfig::action_set() const {
  if (!actions.empty()) return ActionSet::by_name(actions);
  return is_color_task(task) ? ActionSet::color13() : ActionSet::denoise9();
}

ReturnConfig TrainConfig::return_config() const {
  ReturnConfig rc;
  rc.gamma = gamma;
  rc.bootstrap = bootstrap;
  return rc;
}

void TrainConfig::validate() const {
  if (episodes <= 0) throw InvalidArgument("episodes must be positive");
  if (batch <= 0) throw InvalidArgument("batch must be positive");
  if (crop <= 0) throw InvalidArgument("crop must be positive");
  if (t_max < 0) throw InvalidArgument("t_max must be >= 0");
  if (!(base_lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(lr_power > 0.0)) throw InvalidArgument("lr_power must be positive");
  if (!(entropy_beta >= 0.0)) throw InvalidArgument("entropy_beta must be >= 0");
  if (!(grad_clip >= 0.0)) throw InvalidArgument("grad_clip must be >= 0");
  if (checkpoint_every < 0) throw InvalidArgument("checkpoint_every must be >= 0");
  return_config().validate();
  RmcKernel::identity(rmc_size).validate();
  corruption.validate();
  const ActionSet set = action_set();
  if (set.needs_color() != is_color_task(task)) {
    throw InvalidArgument("action set '" + set.name() + "' does not fit task '" +
                          std::string(task_name(task)) + "'");
  }
}

double poly_lr(double base, int episode, int max_episode, double power) {
  if (max_episode <= 0) throw InvalidArgument("max_episode must be positive");
  const double frac = std::clamp(1.0 - static_cast<double>(episode) / max_episode, 0.0, 1.0);
  return base * std::pow(frac, power);
}

std::vector<std::pair<std::string, std::string>> parse_config_text(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw DataError("config line " + std::to_string(number) + ": empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

bool apply_train_option(TrainConfig& c, const std::string& key, const std::string& value) {
  if (key == "episodes") c.episodes = parse_number<int>(key, value);
  else if (key == "batch") c.batch = parse_number<int>(key, value);
  else if (key == "crop") c.crop = parse_number<int>(key, value);
  else if (key == "task") c.task = parse_task(value);
  else if (key == "t_max") c.t_max = parse_number<int>(key, value);
  else if (key == "actions") c.actions = value;
  else if (key == "lr") c.base_lr = parse_number<double>(key, value);
  else if (key == "lr_power") c.lr_power = parse_number<double>(key, value);
  else if (key == "gamma") c.gamma = parse_number<double>(key, value);
  else if (key == "entropy_beta") c.entropy_beta = parse_number<double>(key, value);
  else if (key == "grad_clip") c.grad_clip = parse_number<double>(key, value);
  else if (key == "rmc") c.rmc = parse_bool(key, value);
  else if (key == "rmc_size") c.rmc_size = parse_number<int>(key, value);
  else if (key == "bootstrap") {
    if (value == "zero") c.bootstrap = Bootstrap::kZero;
    else if (value == "value") c.bootstrap = Bootstrap::kValue;
    else throw InvalidArgument("option 'bootstrap': expected zero or value");
  } else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "width") c.arch.width = parse_number<int>(key, value);
  else if (key == "gru") c.arch.use_gru = parse_bool(key, value);
  else if (key == "trunk_dilations") c.arch.trunk_dilations = parse_int_list(key, value);
  else if (key == "branch_dilations") c.arch.branch_dilations = parse_int_list(key, value);
  else if (key == "gaussian_sigma") c.corruption.gaussian_sigma = parse_number<double>(key, value);
  else if (key == "sp_density") c.corruption.sp_density = parse_number<double>(key, value);
  else if (key == "poisson_peak") c.corruption.poisson_peak = parse_number<double>(key, value);
  else if (key == "color_strength") c.corruption.color_strength = parse_number<double>(key, value);
  else if (key == "text_min_font") c.corruption.text.min_font_px = parse_number<int>(key, value);
  else if (key == "text_max_font") c.corruption.text.max_font_px = parse_number<int>(key, value);
  else if (key == "text_corpus") c.corruption.text.corpus = load_corpus(value);
  else if (key == "checkpoint_every") c.checkpoint_every = parse_number<int>(key, value);
  else if (key == "out") c.out_dir = value;
  else if (key == "init_checkpoint") c.init_checkpoint = value;
  else return false;
  return true;
}

template <typename T>
double Rollout<T>::episode_reward() const {
  double s = 0.0;
  for (double r : mean_reward) s += r;
  return s;
}

template <typename T>
Rollout<T> collect_rollout(const ActorCritic<T>& net, std::vector<EpisodeState> episodes,
                           const ActionSet& set, std::vector<Rng>& rngs,
                           ActionMode mode, Bootstrap bootstrap) {
  if (episodes.empty()) throw InvalidArgument("collect_rollout: no episodes");
  if (mode == ActionMode::kSample && rngs.size() != episodes.size()) {
    throw InvalidArgument("collect_rollout: need one RNG stream per episode");
  }
  if (set.size() != net.arch().num_actions) {
    throw InvalidArgument("action set size does not match the network");
  }
  const EpisodeState& first = episodes.front();
  for (const EpisodeState& e : episodes) {
    require_same_shape(first.current, e.current, "collect_rollout");
    if (e.t != first.t || e.t_max != first.t_max || e.task != first.task) {
      throw InvalidArgument("collect_rollout: episodes are not aligned");
    }
  }
  const int batch = static_cast<int>(episodes.size());
  const int h = first.current.height(), w = first.current.width();
  const bool lab = is_color_task(first.task);
  const int steps = first.t_max - first.t;

  Rollout<T> out;
  Tensor<T> hidden = net.initial_hidden(batch, h, w);
  auto encode = [&]() {
    std::vector<const PixelGrid*> states;
    for (const EpisodeState& e : episodes) states.push_back(&e.current);
    return encode_states<T>(states, lab);
  };
  for (int s = 0; s < steps; ++s) {
    StepCache<T> cache;
    ForwardOutput<T> fwd = net.forward(encode(), hidden, &cache);
    std::vector<ActionMap> actions;
    std::vector<Map2D> rewards;
    double reward_sum = 0.0;
    for (int b = 0; b < batch; ++b) {
      const PolicyMap policy = extract_policy(fwd.probs, b);
      actions.push_back(mode == ActionMode::kSample ? sample_actions(policy, rngs[b])
                                                    : greedy_actions(policy));
      StepResult result = step(episodes[b], actions.back(), set);
      reward_sum += result.reward.mean();
      rewards.push_back(std::move(result.reward));
      episodes[b] = std::move(result.next);
    }
    hidden = std::move(fwd.hidden);
    out.caches.push_back(std::move(cache));
    out.actions.push_back(std::move(actions));
    out.rewards.push_back(std::move(rewards));
    out.mean_reward.push_back(reward_sum / batch);
  }
  for (int b = 0; b < batch; ++b) out.bootstrap.emplace_back(h, w);
  if (bootstrap == Bootstrap::kValue && steps > 0) {
    const ForwardOutput<T> fwd = net.forward(encode(), hidden);
    for (int b = 0; b < batch; ++b) out.bootstrap[b] = extract_value(fwd.value, b);
  }
  out.final_states = std::move(episodes);
  return out;
}

template <typename T>
void refresh_forward(const ActorCritic<T>& net, Rollout<T>& rollout) {
  if (rollout.caches.empty()) return;
  const Tensor<T>& in0 = rollout.caches.front().input;
  Tensor<T> hidden = net.initial_hidden(in0.n, in0.h, in0.w);
  for (StepCache<T>& cache : rollout.caches) {
    Tensor<T> input = std::move(cache.input);
    ForwardOutput<T> fwd = net.forward(input, hidden, &cache);
    hidden = std::move(fwd.hidden);
  }
}

Map2D advantage(const Map2D& returns, const Map2D& values) {
  if (!returns.same_shape(values)) throw ShapeError("advantage: shape mismatch");
  Map2D a(returns.height, returns.width);
  for (std::size_t i = 0; i < a.size(); ++i) a.v[i] = returns.v[i] - values.v[i];
  return a;
}

template <typename T>
Targets compute_targets(const Rollout<T>& rollout, const RmcKernel& w,
                        const ReturnConfig& config) {
  const int steps = rollout.steps(), batch = rollout.batch();
  Targets out;
  out.returns.assign(steps, std::vector<Map2D>(batch));
  out.advantages.assign(steps, std::vector<Map2D>(batch));
  if (steps == 0) return out;
  for (int b = 0; b < batch; ++b) {
    std::vector<Map2D> rewards;
    for (int t = 0; t < steps; ++t) rewards.push_back(rollout.rewards[t][b]);
    std::vector<Map2D> returns = compute_returns(rewards, rollout.bootstrap[b], w, config);
    for (int t = 0; t < steps; ++t) {
      out.advantages[t][b] =
          advantage(returns[t], extract_value(rollout.caches[t].state_value, b));
      out.returns[t][b] = std::move(returns[t]);
    }
  }
  return out;
}

template <typename T>
LossBreakdown surrogate_loss(const ActorCritic<T>& net, const Rollout<T>& rollout,
                             const Targets& targets, double entropy_beta,
                             NetworkParams<T>* grads) {
  LossBreakdown loss;
  const int steps = rollout.steps();
  if (steps == 0) return loss;
  const Tensor<T>& probe = rollout.caches.front().probs;
  const int batch = probe.n, actions = probe.c;
  const std::size_t plane = probe.plane_size();
  const double c = 1.0 / (static_cast<double>(steps) * batch * plane);
  double policy_sum = 0.0, entropy_sum = 0.0, value_sum = 0.0;
  Tensor<T> dhidden;
  std::vector<double> logp(actions);
  for (int t = steps - 1; t >= 0; --t) {
    const StepCache<T>& cache = rollout.caches[t];
    Tensor<T> dlogits, dvalue;
    if (grads != nullptr) {
      dlogits = Tensor<T>(batch, actions, probe.h, probe.w);
      dvalue = Tensor<T>(batch, 1, probe.h, probe.w);
    }
    for (int b = 0; b < batch; ++b) {
      const std::vector<int>& ids = rollout.actions[t][b].ids();
      const Map2D& ret = targets.returns[t][b];
      const Map2D& adv = targets.advantages[t][b];
      const T* v = cache.state_value.plane(b, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        const int a = ids[i];
        double entropy = 0.0;
        for (int j = 0; j < actions; ++j) {
          const double p = cache.probs.plane(b, j)[i];
          logp[j] = std::log(std::max(p, kProbFloor));
          entropy -= p * logp[j];
        }
        const double adv_i = adv.v[i];
        const double err = ret.v[i] - static_cast<double>(v[i]);
        policy_sum -= logp[a] * adv_i;
        entropy_sum += entropy;
        value_sum += err * err;
        if (grads == nullptr) continue;
        const bool floored = cache.probs.plane(b, a)[i] < kProbFloor;
        for (int j = 0; j < actions; ++j) {
          const double p = cache.probs.plane(b, j)[i];
          double g = entropy_beta * c * p * (logp[j] + entropy);
          if (!floored) g -= c * adv_i * ((j == a ? 1.0 : 0.0) - p);
          dlogits.plane(b, j)[i] = static_cast<T>(g);
        }
        dvalue.plane(b, 0)[i] = static_cast<T>(-2.0 * c * err);
      }
    }
    if (grads != nullptr) net.backward(cache, dlogits, dvalue, dhidden, *grads);
  }
  loss.entropy = c * entropy_sum;
  loss.policy = c * policy_sum - entropy_beta * loss.entropy;
  loss.value = c * value_sum;
  if (!std::isfinite(loss.policy) || !std::isfinite(loss.value)) {
    throw NumericError("non-finite loss (policy " + format_double(loss.policy) +
                       ", value " + format_double(loss.value) + ")");
  }
  return loss;
}

template <typename T>
std::vector<double> rmc_kernel_gradient(const Rollout<T>& rollout,
                                        const Targets& targets, const RmcKernel& w,
                                        const ReturnConfig& config) {
  std::vector<double> grad(w.weights.size(), 0.0);
  const int steps = rollout.steps();
  if (steps == 0 || !w.enabled) return grad;
  const int batch = rollout.batch();
  const Tensor<T>& probe = rollout.caches.front().probs;
  const std::size_t plane = probe.plane_size();
  const double c = 1.0 / (static_cast<double>(steps) * batch * plane);
  for (int b = 0; b < batch; ++b) {
    std::vector<Map2D> returns, upstream;
    for (int t = 0; t < steps; ++t) {
      const StepCache<T>& cache = rollout.caches[t];
      const std::vector<int>& ids = rollout.actions[t][b].ids();
      const Map2D& ret = targets.returns[t][b];
      Map2D g(ret.height, ret.width);
      const T* v = cache.state_value.plane(b, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        const double p = cache.probs.plane(b, ids[i])[i];
        const double logp = std::log(std::max(p, kProbFloor));
        g.v[i] = c * (-logp + 2.0 * (ret.v[i] - static_cast<double>(v[i])));
      }
      returns.push_back(ret);
      upstream.push_back(std::move(g));
    }
    const std::vector<double> gb =
        kernel_gradient(returns, rollout.bootstrap[b], upstream, w, config);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += gb[k];
  }
  return grad;
}

template <typename T>
void Adam::update_impl(std::size_t slot, std::span<T> param, std::span<const T> grad,
                       double lr) {
  if (param.size() != grad.size()) throw ShapeError("Adam: gradient size mismatch");
  if (t_ <= 0) throw InvalidArgument("Adam: begin_step() was not called");
  if (m_.size() <= slot) {
    m_.resize(slot + 1);
    v_.resize(slot + 1);
  }
  std::vector<double>& m = m_[slot];
  std::vector<double>& v = v_[slot];
  if (m.empty()) {
    m.assign(param.size(), 0.0);
    v.assign(param.size(), 0.0);
  }
  if (m.size() != param.size()) throw ShapeError("Adam: slot size changed");
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = b1 * m[i] + (1.0 - b1) * g;
    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
    const double step = lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    param[i] = static_cast<T>(param[i] - step);
  }
}

void Adam::update(std::size_t slot, std::span<float> param, std::span<const float> grad,
                  double lr) {
  update_impl(slot, param, grad, lr);
}

void Adam::update(std::size_t slot, std::span<double> param,
                  std::span<const double> grad, double lr) {
  update_impl(slot, param, grad, lr);
}

// ---------------------------------------------------------------------------
// Checkpoints

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'X', 'R', 'L'};
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::uint8_t kDtypeU8 = 1;
constexpr std::uint8_t kDtypeF64 = 2;
constexpr const char* kMetaArray = "meta";
constexpr const char* kKernelArray = "rmc.w";

class Writer {
 public:
  template <typename V>
  void put(V v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(V));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  void array_header(const std::string& name, std::uint8_t dtype,
                    const std::vector<std::uint32_t>& dims) {
    if (name.size() > 0xFFFF) throw InvalidArgument("array name too long");
    put(static_cast<std::uint16_t>(name.size()));
    put_bytes(name.data(), name.size());
    put(dtype);
    put(static_cast<std::uint8_t>(dims.size()));
    for (std::uint32_t d : dims) put(d);
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}
  template <typename V>
  V get(const std::string& what) {
    V v;
    get_bytes(&v, sizeof(V), what);
    return v;
  }
  void get_bytes(void* out, std::size_t n, const std::string& what) {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint truncated in " + what);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

std::string arch_meta_value(const ArchConfig& a, const std::string& key) {
  if (key == "arch.in_channels") return std::to_string(a.in_channels);
  if (key == "arch.width") return std::to_string(a.width);
  if (key == "arch.num_actions") return std::to_string(a.num_actions);
  if (key == "arch.trunk_dilations") return join_ints(a.trunk_dilations);
  if (key == "arch.branch_dilations") return join_ints(a.branch_dilations);
  if (key == "arch.gru") return a.use_gru ? "true" : "false";
  return "";
}

constexpr const char* kArchKeys[] = {"arch.in_channels",      "arch.width",
                                     "arch.num_actions",      "arch.trunk_dilations",
                                     "arch.branch_dilations", "arch.gru"};

}  // namespace

std::string Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return "";
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams<float>& params,
                     const RmcKernel* kernel,
                     const std::vector<std::pair<std::string, std::string>>& meta) {
  std::string meta_text;
  for (const char* key : kArchKeys) {
    meta_text += std::string(key) + "=" + arch_meta_value(params.arch, key) + "\n";
  }
  for (const auto& [k, v] : meta) {
    if (k.rfind("arch.", 0) == 0) continue;
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw InvalidArgument("checkpoint metadata entry '" + k + "' is not a single line");
    }
    meta_text += k + "=" + v + "\n";
  }
  const bool with_kernel = kernel != nullptr && kernel->enabled;
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint32_t>(params.tensors.size() + (with_kernel ? 1 : 0) + 1));
  for (const auto& t : params.tensors) {
    std::vector<std::uint32_t> dims(t.shape.begin(), t.shape.end());
    w.array_header(t.name, kDtypeF32, dims);
    w.put_bytes(t.data.data(), t.data.size() * sizeof(float));
  }
  if (with_kernel) {
    const auto k = static_cast<std::uint32_t>(kernel->size);
    w.array_header(kKernelArray, kDtypeF64, {k, k});
    w.put_bytes(kernel->weights.data(), kernel->weights.size() * sizeof(double));
  }
  w.array_header(kMetaArray, kDtypeU8, {static_cast<std::uint32_t>(meta_text.size())});
  w.put_bytes(meta_text.data(), meta_text.size());

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));
  char magic[4];
  r.get_bytes(magic, 4, "header");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("not a PXRL checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>("header");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>("header");

  struct RawArray {
    std::uint8_t dtype;
    std::vector<std::uint32_t> dims;
    std::vector<char> payload;
  };
  std::vector<std::pair<std::string, RawArray>> arrays;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = "array #" + std::to_string(i);
    const auto len = r.get<std::uint16_t>(where + " name");
    std::string name(len, '\0');
    r.get_bytes(name.data(), len, where + " name");
    const std::string label = "array '" + name + "'";
    RawArray a;
    a.dtype = r.get<std::uint8_t>(label);
    const auto ndim = r.get<std::uint8_t>(label);
    std::size_t elems = 1;
    for (int d = 0; d < ndim; ++d) {
      a.dims.push_back(r.get<std::uint32_t>(label));
      elems *= a.dims.back();
      if (elems > (std::size_t{1} << 32)) throw DataError(label + " is implausibly large");
    }
    std::size_t width = 0;
    switch (a.dtype) {
      case kDtypeF32: width = 4; break;
      case kDtypeU8: width = 1; break;
      case kDtypeF64: width = 8; break;
      default:
        throw DataError(label + " has unknown dtype " + std::to_string(a.dtype));
    }
    a.payload.resize(elems * width);
    r.get_bytes(a.payload.data(), a.payload.size(), label);
    for (const auto& [other, unused] : arrays) {
      if (other == name) throw DataError("duplicate " + label);
    }
    arrays.emplace_back(std::move(name), std::move(a));
  }
  if (!r.at_end()) throw DataError("trailing bytes after the last array");

  Checkpoint ck;
  const RawArray* meta = nullptr;
  for (const auto& [name, a] : arrays) {
    if (name == kMetaArray) meta = &a;
  }
  if (meta == nullptr || meta->dtype != kDtypeU8) {
    throw DataError("array 'meta' is missing or not u8");
  }
  {
    std::istringstream lines(std::string(meta->payload.begin(), meta->payload.end()));
    std::string line;
    while (std::getline(lines, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw DataError("array 'meta' has a malformed line");
      ck.meta.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
  }
  ArchConfig arch;
  arch.required_receptive_field.reset();
  try {
    TrainConfig probe;
    auto need = [&](const char* key) {
      const std::string v = ck.meta_value(key);
      if (v.empty()) throw DataError("array 'meta' lacks " + std::string(key));
      return v;
    };
    arch.in_channels = std::stoi(need("arch.in_channels"));
    arch.width = std::stoi(need("arch.width"));
    arch.num_actions = std::stoi(need("arch.num_actions"));
    apply_train_option(probe, "trunk_dilations", need("arch.trunk_dilations"));
    apply_train_option(probe, "branch_dilations", need("arch.branch_dilations"));
    apply_train_option(probe, "gru", need("arch.gru"));
    arch.trunk_dilations = probe.arch.trunk_dilations;
    arch.branch_dilations = probe.arch.branch_dilations;
    arch.use_gru = probe.arch.use_gru;
    arch.validate();
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(std::string("array 'meta' has an invalid architecture: ") + e.what());
  }

  std::mt19937_64 unused_rng(0);
  NetworkParams<float> params = init_params<float>(unused_rng, arch);
  std::size_t matched = 0;
  for (auto& t : params.tensors) {
    const RawArray* a = nullptr;
    for (const auto& [name, raw] : arrays) {
      if (name == t.name) a = &raw;
    }
    if (a == nullptr) throw DataError("array '" + t.name + "' is missing");
    const std::vector<std::uint32_t> expected(t.shape.begin(), t.shape.end());
    if (a->dtype != kDtypeF32 || a->dims != expected) {
      throw DataError("array '" + t.name + "' has the wrong dtype or shape");
    }
    std::memcpy(t.data.data(), a->payload.data(), a->payload.size());
    ++matched;
  }
  for (const auto& [name, a] : arrays) {
    if (name == kKernelArray) {
      if (a.dtype != kDtypeF64 || a.dims.size() != 2 || a.dims[0] != a.dims[1] ||
          a.dims[0] % 2 == 0) {
        throw DataError("array 'rmc.w' must be an odd square f64 kernel");
      }
      RmcKernel k = RmcKernel::identity(static_cast<int>(a.dims[0]));
      std::memcpy(k.weights.data(), a.payload.data(), a.payload.size());
      ck.kernel = std::move(k);
      ++matched;
    }
  }
  if (matched + 1 != arrays.size()) {
    for (const auto& [name, a] : arrays) {
      if (name != kMetaArray && name != kKernelArray && params.find(name) == nullptr) {
        throw DataError("array '" + name + "' is not part of the network");
      }
    }
  }
  if (!params.all_finite()) throw DataError("checkpoint contains non-finite parameters");
  ck.params = std::move(params);
  return ck;
}

std::vector<std::pair<std::string, std::string>> checkpoint_meta(const TrainConfig& c,
                                                                 int episode) {
  return {
      {"task", std::string(task_name(c.task))},
      {"actions", c.action_set().name()},
      {"t_max", std::to_string(c.resolved_t_max())},
      {"episode", std::to_string(episode)},
      {"episodes", std::to_string(c.episodes)},
      {"rmc", c.rmc ? "true" : "false"},
      {"gamma", format_double(c.gamma)},
      {"seed", std::to_string(c.seed)},
  };
}

// ---------------------------------------------------------------------------
// Training loop

TrainResult train(const TrainConfig& config, const Dataset& dataset,
                  const ProgressFn& progress) {
  config.validate();
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  const ActionSet set = config.action_set();
  const int t_max = config.resolved_t_max();
  const ReturnConfig return_cfg = config.return_config();

  ArchConfig arch = config.arch;
  arch.in_channels = is_color_task(config.task) ? 3 : dataset.images.front().channels();
  arch.num_actions = set.size();
  if (is_color_task(config.task) && dataset.images.front().channels() != 3) {
    throw InvalidArgument("color task needs an RGB dataset");
  }

  Rng init_rng(config.seed);
  NetworkParams<float> params = init_params<float>(init_rng, arch);
  RmcKernel kernel = RmcKernel::identity(config.rmc_size, config.rmc);
  if (!config.init_checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(config.init_checkpoint);
    const ArchConfig& a = ck.params.arch;
    if (a.in_channels != arch.in_channels || a.width != arch.width ||
        a.num_actions != arch.num_actions || a.use_gru != arch.use_gru ||
        a.trunk_dilations != arch.trunk_dilations ||
        a.branch_dilations != arch.branch_dilations) {
      throw DataError("initial checkpoint architecture does not match the config");
    }
    ck.params.arch = arch;
    params = std::move(ck.params);
    // A checkpoint without a kernel (non-RMC run) starts RMC from identity.
    if (ck.kernel && ck.kernel->size == config.rmc_size) {
      kernel.weights = ck.kernel->weights;
    }
  }
  ActorCritic<float> net(std::move(params));
  Adam adam;

  std::ofstream csv;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    csv.open(config.out_dir / "metrics.csv", std::ios::trunc);
    if (!csv) throw DataError("cannot write " + (config.out_dir / "metrics.csv").string());
    csv << "episode,mean_reward,policy_loss,value_loss,lr\n";
    csv.precision(10);
  }

  BatchConfig batch_cfg;
  batch_cfg.batch = 1;
  batch_cfg.crop = config.crop;
  batch_cfg.task = config.task;
  batch_cfg.t_max = t_max;
  batch_cfg.corruption = config.corruption;

  TrainResult result;
  for (int ep = 0; ep < config.episodes; ++ep) {
    std::vector<Rng> rngs;
    std::vector<EpisodeState> episodes;
    for (int b = 0; b < config.batch; ++b) {
      rngs.push_back(episode_rng(config.seed,
                                 static_cast<std::uint64_t>(ep) * config.batch + b));
      episodes.push_back(sample_episode(dataset, batch_cfg, rngs.back()));
    }
    Rollout<float> rollout = collect_rollout(net, std::move(episodes), set, rngs,
                                             ActionMode::kSample, config.bootstrap);
    const Targets targets = compute_targets(rollout, kernel, return_cfg);
    NetworkParams<float> grads = net.params().zeros_like();
    const LossBreakdown loss =
        surrogate_loss(net, rollout, targets, config.entropy_beta, &grads);
    std::vector<double> kernel_grad;
    if (kernel.enabled) kernel_grad = rmc_kernel_gradient(rollout, targets, kernel, return_cfg);

    if (config.grad_clip > 0.0) {
      double sq = 0.0;
      for (const auto& t : grads.tensors) {
        for (float g : t.data) sq += static_cast<double>(g) * g;
      }
      for (double g : kernel_grad) sq += g * g;
      const double norm = std::sqrt(sq);
      if (norm > config.grad_clip) {
        const double s = config.grad_clip / norm;
        for (auto& t : grads.tensors) {
          for (float& g : t.data) g = static_cast<float>(g * s);
        }
        for (double& g : kernel_grad) g *= s;
      }
    }

    const double lr = poly_lr(config.base_lr, ep, config.episodes, config.lr_power);
    adam.begin_step();
    NetworkParams<float>& p = net.mutable_params();
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
      adam.update(i, std::span<float>(p.tensors[i].data),
                  std::span<const float>(grads.tensors[i].data), lr);
    }
    if (kernel.enabled) {
      adam.update(p.tensors.size(), std::span<double>(kernel.weights),
                  std::span<const double>(kernel_grad), lr);
    }
    bool finite = p.all_finite();
    for (double w : kernel.weights) finite = finite && std::isfinite(w);
    if (!finite) {
      throw NumericError("non-finite parameters after episode " + std::to_string(ep + 1));
    }

    EpisodeMetrics m{ep + 1, rollout.episode_reward(), loss.policy, loss.value, lr};
    result.history.push_back(m);
    if (csv.is_open()) {
      csv << m.episode << ',' << m.mean_reward << ',' << m.policy_loss << ','
          << m.value_loss << ',' << m.lr << '\n';
    }
    if (progress) progress(m);
    const int done = ep + 1;
    if (!config.out_dir.empty() && config.checkpoint_every > 0 &&
        done % config.checkpoint_every == 0) {
      save_checkpoint(config.out_dir / ("checkpoint_" + std::to_string(done) + ".pxrl"),
                      net.params(), &kernel, checkpoint_meta(config, done));
    }
  }
  result.params = net.params();
  result.kernel = kernel;
  result.meta = checkpoint_meta(config, config.episodes);
  if (!config.out_dir.empty()) {
    save_checkpoint(config.out_dir / "model.pxrl", result.params, &result.kernel,
                    result.meta);
  }
  return result;
}

#define PIXELRL_INSTANTIATE(T)                                                         \
  template struct Rollout<T>;                                                          \
  template Rollout<T> collect_rollout<T>(const ActorCritic<T>&, std::vector<EpisodeState>, \
                                         const ActionSet&, std::vector<Rng>&,          \
                                         ActionMode, Bootstrap);                       \
  template void refresh_forward<T>(const ActorCritic<T>&, Rollout<T>&);                \
  template Targets compute_targets<T>(const Rollout<T>&, const RmcKernel&,             \
                                      const ReturnConfig&);                            \
  template LossBreakdown surrogate_loss<T>(const ActorCritic<T>&, const Rollout<T>&,   \
                                           const Targets&, double, NetworkParams<T>*); \
  template std::vector<double> rmc_kernel_gradient<T>(                                 \
      const Rollout<T>&, const Targets&, const RmcKernel&, const ReturnConfig&);

PIXELRL_INSTANTIATE(float)
PIXELRL_INSTANTIATE(double)

#undef PIXELRL_INSTANTIATE

}  // namespace pixelrl
