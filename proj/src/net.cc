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

#include "pixelrl/net.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "pixelrl/error.h"

namespace pixelrl {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// Column buffer for a "same" padded k x k convolution with dilation.
template <typename T>
void im2col(const T* img, int cin, int h, int w, int k, int dil, T* col) {
  const int r = k / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int ci = 0; ci < cin; ++ci) {
    const T* src = img + ci * plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * plane;
        const int oy = (ky - r) * dil;
        const int ox = (kx - r) * dil;
        const int x0 = std::clamp(-ox, 0, w);
        const int x1 = std::clamp(w - ox, 0, w);
        for (int y = 0; y < h; ++y) {
          T* row = dst + static_cast<std::size_t>(y) * w;
          const int sy = y + oy;
          if (sy < 0 || sy >= h || x0 >= x1) {
            std::fill(row, row + w, T(0));
            continue;
          }
          std::fill(row, row + x0, T(0));
          std::memcpy(row + x0, src + static_cast<std::size_t>(sy) * w + x0 + ox,
                      sizeof(T) * (x1 - x0));
          std::fill(row + x1, row + w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, int cin, int h, int w, int k, int dil, T* img) {
  const int r = k / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int ci = 0; ci < cin; ++ci) {
    T* dst = img + ci * plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * plane;
        const int oy = (ky - r) * dil;
        const int ox = (kx - r) * dil;
        const int x0 = std::clamp(-ox, 0, w);
        const int x1 = std::clamp(w - ox, 0, w);
        for (int y = 0; y < h; ++y) {
          const int sy = y + oy;
          if (sy < 0 || sy >= h) continue;
          const T* row = src + static_cast<std::size_t>(y) * w;
          T* out = dst + static_cast<std::size_t>(sy) * w + ox;
          for (int x = x0; x < x1; ++x) out[x] += row[x];
        }
      }
    }
  }
}

template <typename T>
AlignedVector<T>& scratch() {
  thread_local AlignedVector<T> buffer;
  return buffer;
}

// y (+)= conv(x) + bias. `bias` may be null.
template <typename T>
void conv_forward(const Tensor<T>& x, const T* weight, const T* bias, int cout,
                  int k, int dil, Tensor<T>& y, bool accumulate) {
  if (!accumulate) y = Tensor<T>(x.n, cout, x.h, x.w);
  const int rows = x.c * k * k;
  const int plane = static_cast<int>(x.plane_size());
  ConstMatMap<T> wmat(weight, cout, rows);
  AlignedVector<T>& col = scratch<T>();
  for (int b = 0; b < x.n; ++b) {
    MatMap<T> out(y.image(b), cout, plane);
    if (k == 1) {
      out.noalias() += wmat * ConstMatMap<T>(x.image(b), rows, plane);
    } else {
      col.resize(static_cast<std::size_t>(rows) * plane);
      im2col(x.image(b), x.c, x.h, x.w, k, dil, col.data());
      out.noalias() += wmat * ConstMatMap<T>(col.data(), rows, plane);
    }
    if (bias != nullptr) {
      out.colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(bias, cout);
    }
  }
}

// Accumulates dW, db (if non-null) and dx (if non-null).
template <typename T>
void conv_backward(const Tensor<T>& x, const T* weight, int cout, int k, int dil,
                   const Tensor<T>& dy, T* dweight, T* dbias, Tensor<T>* dx) {
  const int rows = x.c * k * k;
  const int plane = static_cast<int>(x.plane_size());
  ConstMatMap<T> wmat(weight, cout, rows);
  MatMap<T> dw(dweight, cout, rows);
  AlignedVector<T>& col = scratch<T>();
  RowMat<T> dcol;
  for (int b = 0; b < x.n; ++b) {
    ConstMatMap<T> g(dy.image(b), cout, plane);
    if (k == 1) {
      dw.noalias() += g * ConstMatMap<T>(x.image(b), rows, plane).transpose();
    } else {
      col.resize(static_cast<std::size_t>(rows) * plane);
      im2col(x.image(b), x.c, x.h, x.w, k, dil, col.data());
      dw.noalias() += g * ConstMatMap<T>(col.data(), rows, plane).transpose();
    }
    if (dbias != nullptr) {
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(dbias, cout) += g.rowwise().sum();
    }
    if (dx != nullptr) {
      if (k == 1) {
        MatMap<T>(dx->image(b), rows, plane).noalias() += wmat.transpose() * g;
      } else {
        dcol.noalias() = wmat.transpose() * g;
        col2im_add(dcol.data(), x.c, x.h, x.w, k, dil, dx->image(b));
      }
    }
  }
}

template <typename T>
void relu_inplace(Tensor<T>& t) {
  for (T& v : t.data) v = v > T(0) ? v : T(0);
}

// grad *= (out > 0)
template <typename T>
void relu_mask(const Tensor<T>& out, Tensor<T>& grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(out.data[i] > T(0))) grad.data[i] = T(0);
  }
}

template <typename T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

template <typename T>
void add_to(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

int ArchConfig::receptive_field() const {
  const int sum = std::accumulate(trunk_dilations.begin(), trunk_dilations.end(), 0) +
                  std::accumulate(branch_dilations.begin(), branch_dilations.end(), 0);
  return 1 + 2 * sum;
}

void ArchConfig::validate() const {
  if (in_channels != 1 && in_channels != 3) {
    throw InvalidArgument("network input must have 1 or 3 channels");
  }
  if (width <= 0) throw InvalidArgument("network width must be positive");
  if (num_actions <= 0) throw InvalidArgument("network needs at least one action");
  if (trunk_dilations.empty() || branch_dilations.empty()) {
    throw InvalidArgument("trunk and branches need at least one layer each");
  }
  for (int d : trunk_dilations) {
    if (d <= 0) throw InvalidArgument("dilations must be positive");
  }
  for (int d : branch_dilations) {
    if (d <= 0) throw InvalidArgument("dilations must be positive");
  }
}

template <typename T>
const ParamTensor<T>* NetworkParams<T>::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

template <typename T>
std::size_t NetworkParams<T>::total_size() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.data.size();
  return n;
}

template <typename T>
NetworkParams<T> NetworkParams<T>::zeros_like() const {
  NetworkParams out = *this;
  for (auto& t : out.tensors) std::fill(t.data.begin(), t.data.end(), T(0));
  return out;
}

template <typename T>
bool NetworkParams<T>::all_finite() const {
  for (const auto& t : tensors) {
    for (T v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

template <typename T>
NetworkParams<T> init_params(std::mt19937_64& rng, const ArchConfig& arch) {
  arch.validate();
  if (arch.required_receptive_field &&
      *arch.required_receptive_field != arch.receptive_field()) {
    throw InvalidArgument("receptive field is " + std::to_string(arch.receptive_field()) +
                          ", expected " + std::to_string(*arch.required_receptive_field));
  }
  NetworkParams<T> params;
  params.arch = arch;
  auto add_conv = [&](const std::string& name, ParamGroup group, int cout, int cin,
                      int k, double gain, bool with_bias) {
    const double stddev = gain / std::sqrt(static_cast<double>(cin * k * k));
    std::normal_distribution<double> dist(0.0, stddev);
    ParamTensor<T> weight{name + ".weight", group, {cout, cin, k, k}, {}};
    weight.data.resize(static_cast<std::size_t>(cout) * cin * k * k);
    for (T& v : weight.data) v = static_cast<T>(dist(rng));
    params.tensors.push_back(std::move(weight));
    if (with_bias) {
      params.tensors.push_back({name + ".bias", group, {cout},
                                AlignedVector<T>(static_cast<std::size_t>(cout), T(0))});
    }
  };
  const double relu_gain = std::sqrt(2.0);
  const int c = arch.width;
  int cin = arch.in_channels;
  for (std::size_t i = 0; i < arch.trunk_dilations.size(); ++i) {
    add_conv("trunk." + std::to_string(i), ParamGroup::kShared, c, cin, 3, relu_gain, true);
    cin = c;
  }
  const std::size_t hidden_layers = arch.branch_dilations.size() - 1;
  for (std::size_t i = 0; i < hidden_layers; ++i) {
    add_conv("policy." + std::to_string(i), ParamGroup::kPolicy, c, c, 3, relu_gain, true);
  }
  if (arch.use_gru) {
    for (const char* gate : {"z", "r", "h"}) {
      add_conv(std::string("policy.gru.w") + gate, ParamGroup::kGru, c, c, 3, 1.0, true);
      add_conv(std::string("policy.gru.u") + gate, ParamGroup::kGru, c, c, 3, 1.0, false);
    }
    add_conv("policy.out", ParamGroup::kPolicy, arch.num_actions, c, 1, 1.0, true);
  } else {
    add_conv("policy.out", ParamGroup::kPolicy, arch.num_actions, c, 3, 1.0, true);
  }
  for (std::size_t i = 0; i < hidden_layers; ++i) {
    add_conv("value." + std::to_string(i), ParamGroup::kValue, c, c, 3, relu_gain, true);
  }
  add_conv("value.out", ParamGroup::kValue, 1, c, 3, 1.0, true);
  return params;
}

template <typename T>
ActorCritic<T>::ActorCritic(NetworkParams<T> params) : params_(std::move(params)) {
  const ArchConfig& arch = params_.arch;
  arch.validate();
  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < params_.tensors.size(); ++i) {
      if (params_.tensors[i].name == name) return static_cast<int>(i);
    }
    throw InvalidArgument("network parameters lack tensor '" + name + "'");
  };
  auto layer = [&](const std::string& name, int k, int dil, int cout, int cin,
                   bool with_bias) {
    Layer l;
    l.weight = index_of(name + ".weight");
    l.bias = with_bias ? index_of(name + ".bias") : -1;
    l.kernel = k;
    l.dilation = dil;
    l.out_channels = cout;
    const std::vector<int> expected{cout, cin, k, k};
    if (params_.tensors[l.weight].shape != expected) {
      throw ShapeError("parameter '" + name + ".weight' has unexpected shape");
    }
    return l;
  };
  const int c = arch.width;
  int cin = arch.in_channels;
  for (std::size_t i = 0; i < arch.trunk_dilations.size(); ++i) {
    trunk_.push_back(
        layer("trunk." + std::to_string(i), 3, arch.trunk_dilations[i], c, cin, true));
    cin = c;
  }
  const std::size_t hidden_layers = arch.branch_dilations.size() - 1;
  const int head_dil = arch.branch_dilations.back();
  for (std::size_t i = 0; i < hidden_layers; ++i) {
    policy_.push_back(
        layer("policy." + std::to_string(i), 3, arch.branch_dilations[i], c, c, true));
    value_.push_back(
        layer("value." + std::to_string(i), 3, arch.branch_dilations[i], c, c, true));
  }
  if (arch.use_gru) {
    gru_.wz = layer("policy.gru.wz", 3, head_dil, c, c, true);
    gru_.wr = layer("policy.gru.wr", 3, head_dil, c, c, true);
    gru_.wh = layer("policy.gru.wh", 3, head_dil, c, c, true);
    gru_.uz = layer("policy.gru.uz", 3, 1, c, c, false);
    gru_.ur = layer("policy.gru.ur", 3, 1, c, c, false);
    gru_.uh = layer("policy.gru.uh", 3, 1, c, c, false);
    policy_out_ = layer("policy.out", 1, 1, arch.num_actions, c, true);
  } else {
    policy_out_ = layer("policy.out", 3, head_dil, arch.num_actions, c, true);
  }
  value_out_ = layer("value.out", 3, head_dil, 1, c, true);
}

template <typename T>
Tensor<T> ActorCritic<T>::initial_hidden(int batch, int height, int width) const {
  if (!arch().use_gru) return {};
  return Tensor<T>(batch, arch().width, height, width);
}

template <typename T>
ForwardOutput<T> ActorCritic<T>::forward(const Tensor<T>& input, const Tensor<T>& hidden,
                                         StepCache<T>* cache) const {
  const ArchConfig& a = arch();
  if (input.c != a.in_channels) {
    throw ShapeError("network expects " + std::to_string(a.in_channels) +
                     " input channels, got " + std::to_string(input.c));
  }
  if (a.use_gru && !(hidden.n == input.n && hidden.c == a.width &&
                     hidden.h == input.h && hidden.w == input.w)) {
    throw ShapeError("hidden state shape does not match input");
  }
  auto w = [&](const Layer& l) { return params_.tensors[l.weight].data.data(); };
  auto b = [&](const Layer& l) {
    return l.bias >= 0 ? params_.tensors[l.bias].data.data() : nullptr;
  };
  auto run = [&](const Tensor<T>& x, const Layer& l, Tensor<T>& y, bool accumulate) {
    conv_forward(x, w(l), b(l), l.out_channels, l.kernel, l.dilation, y, accumulate);
  };

  StepCache<T> local;
  StepCache<T>& c = cache != nullptr ? *cache : local;
  c = StepCache<T>{};
  c.input = input;

  const Tensor<T>* cur = &c.input;
  for (const Layer& l : trunk_) {
    Tensor<T> y;
    run(*cur, l, y, false);
    relu_inplace(y);
    c.trunk.push_back(std::move(y));
    cur = &c.trunk.back();
  }
  const Tensor<T>& feat = *cur;

  const Tensor<T>* p = &feat;
  for (const Layer& l : policy_) {
    Tensor<T> y;
    run(*p, l, y, false);
    relu_inplace(y);
    c.policy.push_back(std::move(y));
    p = &c.policy.back();
  }
  ForwardOutput<T> out;
  if (a.use_gru) {
    c.h_prev = hidden;
    Tensor<T> az, ar, ah;
    run(*p, gru_.wz, az, false);
    run(hidden, gru_.uz, az, true);
    run(*p, gru_.wr, ar, false);
    run(hidden, gru_.ur, ar, true);
    c.z = std::move(az);
    c.r = std::move(ar);
    for (T& v : c.z.data) v = sigmoid(v);
    for (T& v : c.r.data) v = sigmoid(v);
    c.rh = c.r;
    for (std::size_t i = 0; i < c.rh.size(); ++i) c.rh.data[i] *= hidden.data[i];
    run(*p, gru_.wh, ah, false);
    run(c.rh, gru_.uh, ah, true);
    c.candidate = std::move(ah);
    for (T& v : c.candidate.data) v = std::tanh(v);
    c.h_new = c.candidate;
    for (std::size_t i = 0; i < c.h_new.size(); ++i) {
      const T z = c.z.data[i];
      c.h_new.data[i] = (T(1) - z) * hidden.data[i] + z * c.candidate.data[i];
    }
    run(c.h_new, policy_out_, c.logits, false);
    out.hidden = c.h_new;
  } else {
    run(*p, policy_out_, c.logits, false);
  }

  // Per-pixel softmax over the action channel.
  c.probs = c.logits;
  const int actions = a.num_actions;
  const std::size_t plane = input.plane_size();
  for (int n = 0; n < input.n; ++n) {
    T* base = c.probs.image(n);
    for (std::size_t i = 0; i < plane; ++i) {
      T mx = base[i];
      for (int k = 1; k < actions; ++k) mx = std::max(mx, base[k * plane + i]);
      T sum = T(0);
      for (int k = 0; k < actions; ++k) {
        T& v = base[k * plane + i];
        v = std::exp(v - mx);
        sum += v;
      }
      for (int k = 0; k < actions; ++k) base[k * plane + i] /= sum;
    }
  }

  const Tensor<T>* v = &feat;
  for (const Layer& l : value_) {
    Tensor<T> y;
    run(*v, l, y, false);
    relu_inplace(y);
    c.value.push_back(std::move(y));
    v = &c.value.back();
  }
  run(*v, value_out_, c.state_value, false);

  out.probs = c.probs;
  out.value = c.state_value;
  return out;
}

template <typename T>
void ActorCritic<T>::backward(const StepCache<T>& c, const Tensor<T>& dlogits,
                              const Tensor<T>& dvalue, Tensor<T>& dhidden,
                              NetworkParams<T>& grads) const {
  const ArchConfig& a = arch();
  auto w = [&](const Layer& l) { return params_.tensors[l.weight].data.data(); };
  auto gw = [&](const Layer& l) { return grads.tensors[l.weight].data.data(); };
  auto gb = [&](const Layer& l) {
    return l.bias >= 0 ? grads.tensors[l.bias].data.data() : nullptr;
  };
  auto back = [&](const Tensor<T>& x, const Layer& l, const Tensor<T>& dy,
                  Tensor<T>* dx) {
    conv_backward(x, w(l), l.out_channels, l.kernel, l.dilation, dy, gw(l), gb(l), dx);
  };
  const Tensor<T>& feat = c.trunk.back();
  Tensor<T> dfeat(feat.n, feat.c, feat.h, feat.w);

  // Value branch.
  {
    const Tensor<T>& top = value_.empty() ? feat : c.value.back();
    Tensor<T> dx(top.n, top.c, top.h, top.w);
    back(top, value_out_, dvalue, &dx);
    for (int i = static_cast<int>(value_.size()) - 1; i >= 0; --i) {
      relu_mask(c.value[i], dx);
      const Tensor<T>& in = i == 0 ? feat : c.value[i - 1];
      Tensor<T> din(in.n, in.c, in.h, in.w);
      back(in, value_[i], dx, &din);
      dx = std::move(din);
    }
    add_to(dfeat, dx);
  }

  // Policy branch.
  {
    const Tensor<T>& top = policy_.empty() ? feat : c.policy.back();
    Tensor<T> dx(top.n, top.c, top.h, top.w);
    if (a.use_gru) {
      Tensor<T> dh(c.h_new.n, c.h_new.c, c.h_new.h, c.h_new.w);
      back(c.h_new, policy_out_, dlogits, &dh);
      if (!dhidden.empty()) add_to(dh, dhidden);

      const std::size_t n = dh.size();
      Tensor<T> dh_prev = dh;  // shape holder
      Tensor<T> da_h = dh, da_z = dh;
      for (std::size_t i = 0; i < n; ++i) {
        const T z = c.z.data[i];
        const T cand = c.candidate.data[i];
        const T h = c.h_prev.data[i];
        dh_prev.data[i] = dh.data[i] * (T(1) - z);
        da_z.data[i] = dh.data[i] * (cand - h) * z * (T(1) - z);
        da_h.data[i] = dh.data[i] * z * (T(1) - cand * cand);
      }
      Tensor<T> drh(dh.n, dh.c, dh.h, dh.w);
      back(top, gru_.wh, da_h, &dx);
      back(c.rh, gru_.uh, da_h, &drh);
      Tensor<T> da_r = drh;
      for (std::size_t i = 0; i < n; ++i) {
        const T r = c.r.data[i];
        dh_prev.data[i] += drh.data[i] * r;
        da_r.data[i] = drh.data[i] * c.h_prev.data[i] * r * (T(1) - r);
      }
      back(top, gru_.wz, da_z, &dx);
      back(c.h_prev, gru_.uz, da_z, &dh_prev);
      back(top, gru_.wr, da_r, &dx);
      back(c.h_prev, gru_.ur, da_r, &dh_prev);
      dhidden = std::move(dh_prev);
    } else {
      back(top, policy_out_, dlogits, &dx);
    }
    for (int i = static_cast<int>(policy_.size()) - 1; i >= 0; --i) {
      relu_mask(c.policy[i], dx);
      const Tensor<T>& in = i == 0 ? feat : c.policy[i - 1];
      Tensor<T> din(in.n, in.c, in.h, in.w);
      back(in, policy_[i], dx, &din);
      dx = std::move(din);
    }
    add_to(dfeat, dx);
  }

  // Shared trunk.
  Tensor<T> dx = std::move(dfeat);
  for (int i = static_cast<int>(trunk_.size()) - 1; i >= 0; --i) {
    relu_mask(c.trunk[i], dx);
    const Tensor<T>& in = i == 0 ? c.input : c.trunk[i - 1];
    if (i == 0) {
      back(in, trunk_[i], dx, nullptr);
    } else {
      Tensor<T> din(in.n, in.c, in.h, in.w);
      back(in, trunk_[i], dx, &din);
      dx = std::move(din);
    }
  }
}

template <typename T>
Tensor<T> encode_states(const std::vector<const PixelGrid*>& states, bool lab_input) {
  if (states.empty()) throw InvalidArgument("encode_states: empty batch");
  const PixelGrid& first = *states.front();
  Tensor<T> out(static_cast<int>(states.size()), first.channels(), first.height(),
                first.width());
  for (int b = 0; b < out.n; ++b) {
    const PixelGrid& s = *states[b];
    require_same_shape(first, s, "encode_states");
    if (lab_input) {
      if (s.channels() != 3) throw InvalidArgument("Lab input needs RGB states");
      const PixelGrid lab = rgb_to_lab(s);
      static constexpr double kScale[3] = {1.0 / 100.0, 1.0 / 128.0, 1.0 / 128.0};
      for (int y = 0; y < s.height(); ++y) {
        for (int x = 0; x < s.width(); ++x) {
          for (int ch = 0; ch < 3; ++ch) {
            out.at(b, ch, y, x) = static_cast<T>(lab.at(y, x, ch) * kScale[ch]);
          }
        }
      }
    } else {
      for (int y = 0; y < s.height(); ++y) {
        for (int x = 0; x < s.width(); ++x) {
          for (int ch = 0; ch < s.channels(); ++ch) {
            out.at(b, ch, y, x) = static_cast<T>(s.at(y, x, ch));
          }
        }
      }
    }
  }
  return out;
}

namespace {

template <typename T>
PolicyMap extract_policy_impl(const Tensor<T>& probs, int index) {
  PolicyMap p;
  p.height = probs.h;
  p.width = probs.w;
  p.num_actions = probs.c;
  p.probs.resize(probs.plane_size() * probs.c);
  const std::size_t plane = probs.plane_size();
  for (int a = 0; a < probs.c; ++a) {
    const T* src = probs.plane(index, a);
    for (std::size_t i = 0; i < plane; ++i) p.probs[i * probs.c + a] = src[i];
  }
  return p;
}

template <typename T>
ValueMap extract_value_impl(const Tensor<T>& value, int index) {
  ValueMap v(value.h, value.w);
  const T* src = value.plane(index, 0);
  for (std::size_t i = 0; i < v.size(); ++i) v.v[i] = src[i];
  return v;
}

}  // namespace

PolicyMap extract_policy(const Tensor<float>& probs, int index) {
  return extract_policy_impl(probs, index);
}
PolicyMap extract_policy(const Tensor<double>& probs, int index) {
  return extract_policy_impl(probs, index);
}
ValueMap extract_value(const Tensor<float>& value, int index) {
  return extract_value_impl(value, index);
}
ValueMap extract_value(const Tensor<double>& value, int index) {
  return extract_value_impl(value, index);
}

ActionMap sample_actions(const PolicyMap& policy, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ActionMap map(policy.height, policy.width);
  const int actions = policy.num_actions;
  for (std::size_t i = 0; i < map.ids().size(); ++i) {
    const double u = unit(rng);
    const double* p = policy.probs.data() + i * actions;
    double cum = 0.0;
    int chosen = -1;
    int last_positive = 0;
    for (int a = 0; a < actions; ++a) {
      if (p[a] > 0.0) last_positive = a;
      cum += p[a];
      if (cum > u) {
        chosen = a;
        break;
      }
    }
    map.ids()[i] = chosen >= 0 ? chosen : last_positive;
  }
  return map;
}

ActionMap greedy_actions(const PolicyMap& policy) {
  ActionMap map(policy.height, policy.width);
  const int actions = policy.num_actions;
  for (std::size_t i = 0; i < map.ids().size(); ++i) {
    const double* p = policy.probs.data() + i * actions;
    int best = 0;
    for (int a = 1; a < actions; ++a) {
      if (p[a] > p[best]) best = a;
    }
    map.ids()[i] = best;
  }
  return map;
}

template struct NetworkParams<float>;
template struct NetworkParams<double>;
template class ActorCritic<float>;
template class ActorCritic<double>;
template NetworkParams<float> init_params<float>(std::mt19937_64&, const ArchConfig&);
template NetworkParams<double> init_params<double>(std::mt19937_64&, const ArchConfig&);
template Tensor<float> encode_states<float>(const std::vector<const PixelGrid*>&, bool);
template Tensor<double> encode_states<double>(const std::vector<const PixelGrid*>&, bool);

}  // namespace pixelrl
