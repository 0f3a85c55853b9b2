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

#ifndef PIXELRL_NET_H_
#define PIXELRL_NET_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pixelrl/actions.h"
#include "pixelrl/image.h"
#include "pixelrl/map2d.h"
#include "pixelrl/tensor.h"

namespace pixelrl {

// Layer layout of the shared actor-critic. Every spatial layer is a 3x3
// convolution; the shared trunk feeds a policy branch and a value branch with
// identical dilation schedules. The last branch layer is the head: a 3x3
// convolution to |A| logits or to the scalar value. With `use_gru` the
// policy head becomes a convolutional GRU followed by a 1x1 projection.
struct ArchConfig {
  int in_channels = 1;
  int width = 64;
  int num_actions = 9;
  std::vector<int> trunk_dilations{1, 2, 3, 4};
  std::vector<int> branch_dilations{3, 2, 1};
  bool use_gru = true;
  // Checked by init_params when set.
  std::optional<int> required_receptive_field = 33;

  // Single-step receptive field side (same for both heads).
  int receptive_field() const;
  void validate() const;
};

enum class ParamGroup { kShared, kPolicy, kValue, kGru };

template <typename T>
struct ParamTensor {
  std::string name;
  ParamGroup group = ParamGroup::kShared;
  std::vector<int> shape;
  AlignedVector<T> data;
};

template <typename T>
struct NetworkParams {
  ArchConfig arch;
  std::vector<ParamTensor<T>> tensors;

  const ParamTensor<T>* find(const std::string& name) const;
  std::size_t total_size() const;
  NetworkParams zeros_like() const;
  template <typename U>
  NetworkParams<U> cast() const {
    NetworkParams<U> out;
    out.arch = arch;
    for (const auto& t : tensors) {
      out.tensors.push_back(
          {t.name, t.group, t.shape, AlignedVector<U>(t.data.begin(), t.data.end())});
    }
    return out;
  }
  bool all_finite() const;
};

// Fan-in scaled normal weights, zero biases. Throws InvalidArgument when
// `arch.required_receptive_field` disagrees with the layer layout.
template <typename T>
NetworkParams<T> init_params(std::mt19937_64& rng, const ArchConfig& arch);

// Per-pixel action distribution for one image; probs is (y*W+x)*A + a.
struct PolicyMap {
  int height = 0;
  int width = 0;
  int num_actions = 0;
  std::vector<double> probs;

  double prob(int y, int x, int a) const {
    return probs[(static_cast<std::size_t>(y) * width + x) * num_actions + a];
  }
};

using ValueMap = Map2D;

// Activations retained for the backward pass of one time step.
template <typename T>
struct StepCache {
  Tensor<T> input;
  std::vector<Tensor<T>> trunk;   // post-ReLU outputs
  std::vector<Tensor<T>> policy;  // post-ReLU hidden branch layers
  std::vector<Tensor<T>> value;
  Tensor<T> h_prev, z, r, rh, candidate, h_new;  // GRU
  Tensor<T> logits;
  Tensor<T> probs;
  Tensor<T> state_value;
};

template <typename T>
struct ForwardOutput {
  Tensor<T> probs;   // N x |A| x H x W
  Tensor<T> value;   // N x 1 x H x W
  Tensor<T> hidden;  // N x width x H x W (empty without GRU)
};

// Floor applied to probabilities before taking logs.
inline constexpr double kProbFloor = 1e-8;

template <typename T>
class ActorCritic {
 public:
  explicit ActorCritic(NetworkParams<T> params);

  const ArchConfig& arch() const { return params_.arch; }
  const NetworkParams<T>& params() const { return params_; }
  NetworkParams<T>& mutable_params() { return params_; }

  // Zero hidden state for a batch of the given spatial size.
  Tensor<T> initial_hidden(int batch, int height, int width) const;

  // Zero-padded, size-preserving evaluation. `hidden` is ignored (may be
  // empty) when the GRU is disabled. Fills `cache` when non-null.
  ForwardOutput<T> forward(const Tensor<T>& input, const Tensor<T>& hidden,
                           StepCache<T>* cache = nullptr) const;

  // Accumulates parameter gradients of a scalar loss given its gradients
  // with respect to this step's logits and values. `dhidden` holds the
  // gradient flowing into this step's output hidden state; on return it
  // holds the gradient with respect to the step's input hidden state.
  void backward(const StepCache<T>& cache, const Tensor<T>& dlogits,
                const Tensor<T>& dvalue, Tensor<T>& dhidden,
                NetworkParams<T>& grads) const;

 private:
  struct Layer {
    int weight = -1;
    int bias = -1;
    int kernel = 3;
    int dilation = 1;
    int out_channels = 0;
  };
  struct Gru {
    Layer wz, wr, wh;  // input path
    Layer uz, ur, uh;  // recurrent path (bias-free, biases live on the w*)
  };

  NetworkParams<T> params_;
  std::vector<Layer> trunk_;
  std::vector<Layer> policy_;
  std::vector<Layer> value_;
  Layer policy_out_;
  Layer value_out_;
  Gru gru_;
};

// Packs episode states into network input. Gray/RGB intensities pass through;
// `lab_input` converts RGB to CIELab scaled to roughly [-1,1].
template <typename T>
Tensor<T> encode_states(const std::vector<const PixelGrid*>& states, bool lab_input);

PolicyMap extract_policy(const Tensor<float>& probs, int index);
PolicyMap extract_policy(const Tensor<double>& probs, int index);
ValueMap extract_value(const Tensor<float>& value, int index);
ValueMap extract_value(const Tensor<double>& value, int index);

// Independent per-pixel draws.
ActionMap sample_actions(const PolicyMap& policy, std::mt19937_64& rng);
// Per-pixel argmax, ties to the lowest id.
ActionMap greedy_actions(const PolicyMap& policy);

}  // namespace pixelrl

#endif  // PIXELRL_NET_H_
