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

#ifndef VOICE_NETCORE_LAYERS_HPP_
#define VOICE_NETCORE_LAYERS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "voice/netcore/tensor.hpp"

namespace voice::net {

enum class LayerKind { kConv2d, kRelu, kMaxPool2, kFlatten, kLinear };

std::string_view LayerKindName(LayerKind kind);
LayerKind ParseLayerKind(std::string_view name);

// How ReLU layers route gradients backwards. kGuided additionally zeroes
// negative incoming gradients (guided backpropagation).
enum class ReluMode { kStandard, kGuided };

// Serializable description of one layer. Conv layers are square kernels with
// stride 1 and "same" zero padding; max pooling is 2x2 with stride 2.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::string name;
  int in = 0;
  int out = 0;
  int kernel = 0;

  bool operator==(const LayerSpec&) const = default;
};

// Layer kernels. Parameters live in the owning network's flat buffer; each
// function receives the layer's slice. Backward accumulates into
// `param_grad` when it is non-empty, and writes `grad_in` when non-null.
template <typename T>
struct LayerOps {
  static std::size_t ParamCount(const LayerSpec& spec);
  static Shape OutputShape(const LayerSpec& spec, const Shape& in);
  static void Forward(const LayerSpec& spec, std::span<const T> params,
                      const Tensor<T>& in, Tensor<T>& out);
  static void Backward(const LayerSpec& spec, std::span<const T> params,
                       const Tensor<T>& in, const Tensor<T>& out,
                       const Tensor<T>& grad_out, Tensor<T>* grad_in,
                       std::span<T> param_grad, ReluMode mode);
};

}  // namespace voice::net

#endif  // VOICE_NETCORE_LAYERS_HPP_
