// Copyright 2026 The VOICE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "voice/netcore/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "voice/common/error.hpp"

namespace voice::net {

template <typename T>
Network<T>::Network(Shape input_shape, std::vector<LayerSpec> layers)
    : input_shape_(input_shape), layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorCode::kInvalidArgument, "network has no layers");
  std::set<std::string> names;
  shapes_.push_back(input_shape_);
  std::size_t offset = 0;
  for (const LayerSpec& spec : layers_) {
    if (spec.name.empty() || !names.insert(spec.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "layer names must be unique and non-empty: '" + spec.name + "'");
    }
    shapes_.push_back(LayerOps<T>::OutputShape(spec, shapes_.back()));
    offsets_.push_back(offset);
    offset += LayerOps<T>::ParamCount(spec);
  }
  offsets_.push_back(offset);
  params_.assign(offset, T(0));
  const Shape& last = shapes_.back();
  if (last.height != 1 || last.width != 1) {
    throw Error(ErrorCode::kShapeMismatch, "network output must be a vector");
  }
}

template <typename T>
std::size_t Network<T>::LayerIndex(std::string_view name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].name == name) return i;
  }
  throw Error(ErrorCode::kUnknownLayer, "unknown layer: " + std::string(name));
}

template <typename T>
std::span<T> Network<T>::layer_params(std::size_t i) {
  return std::span<T>(params_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

template <typename T>
std::span<const T> Network<T>::layer_params(std::size_t i) const {
  return std::span<const T>(params_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

template <typename T>
void Network<T>::Initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::fill(params_.begin(), params_.end(), T(0));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    if (spec.kind != LayerKind::kConv2d && spec.kind != LayerKind::kLinear) continue;
    const int fan_in = spec.kind == LayerKind::kConv2d
                           ? spec.in * spec.kernel * spec.kernel
                           : spec.in;
    const double bound = std::sqrt(6.0 / fan_in);
    const std::size_t weight_count = LayerOps<T>::ParamCount(spec) - spec.out;
    auto slice = layer_params(i);
    for (std::size_t k = 0; k < weight_count; ++k) {
      // 53-bit uniform in [0,1), mapped to [-bound, bound).
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      slice[k] = static_cast<T>((2.0 * u - 1.0) * bound);
    }
  }
}

template <typename T>
std::vector<Tensor<T>> Network<T>::ForwardTrace(const Tensor<T>& input) const {
  if (!(input.shape == input_shape_)) {
    throw Error(ErrorCode::kShapeMismatch, "network expects input " +
                                               input_shape_.ToString() + ", got " +
                                               input.shape.ToString());
  }
  std::vector<Tensor<T>> trace(layers_.size() + 1);
  trace[0] = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    LayerOps<T>::Forward(layers_[i], layer_params(i), trace[i], trace[i + 1]);
  }
  return trace;
}

template <typename T>
Tensor<T> Network<T>::ForwardFrom(std::size_t first, Tensor<T> activation) const {
  if (!(activation.shape == shapes_[first])) {
    throw Error(ErrorCode::kShapeMismatch, "activation shape mismatch at layer " +
                                               layers_[first].name);
  }
  Tensor<T> next;
  for (std::size_t i = first; i < layers_.size(); ++i) {
    LayerOps<T>::Forward(layers_[i], layer_params(i), activation, next);
    std::swap(activation, next);
  }
  return activation;
}

template <typename T>
std::vector<Tensor<T>> Network<T>::Backward(const std::vector<Tensor<T>>& trace,
                                            const Tensor<T>& grad_logits,
                                            std::size_t stop, ReluMode mode,
                                            std::span<T> param_grad) const {
  const std::size_t n = layers_.size();
  if (trace.size() != n + 1 || !(grad_logits.shape == shapes_.back())) {
    throw Error(ErrorCode::kShapeMismatch, "backward: trace/gradient shape mismatch");
  }
  if (!param_grad.empty() && param_grad.size() != params_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "backward: parameter gradient size mismatch");
  }
  // Parameter gradients of every layer need the gradient above it.
  if (!param_grad.empty()) stop = std::min<std::size_t>(stop, 1);
  std::vector<Tensor<T>> grads(n + 1);
  grads[n] = grad_logits;
  for (std::size_t i = n; i-- > 0;) {
    const bool need_input_grad = i >= stop;
    if (!need_input_grad && param_grad.empty()) break;
    std::span<T> pg;
    if (!param_grad.empty()) {
      pg = param_grad.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
    }
    if (!need_input_grad && pg.empty()) continue;
    LayerOps<T>::Backward(layers_[i], layer_params(i), trace[i], trace[i + 1],
                          grads[i + 1], need_input_grad ? &grads[i] : nullptr, pg,
                          mode);
  }
  return grads;
}

template class Network<float>;
template class Network<double>;

}  // namespace voice::net
