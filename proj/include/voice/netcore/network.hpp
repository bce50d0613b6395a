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

#ifndef VOICE_NETCORE_NETWORK_HPP_
#define VOICE_NETCORE_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voice/netcore/layers.hpp"
#include "voice/netcore/tensor.hpp"

namespace voice::net {

// A feed-forward stack of layers over a flat parameter buffer. Scalar type is
// a template parameter so gradient checks can run the same graph in double.
template <typename T>
class Network {
 public:
  Network() = default;
  Network(Shape input_shape, std::vector<LayerSpec> layers);

  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t layer_count() const { return layers_.size(); }
  // Output shape of layer i (i.e. the shape of trace[i + 1]).
  const Shape& output_shape(std::size_t i) const { return shapes_[i + 1]; }
  int num_outputs() const { return shapes_.back().channels; }

  // Index of the layer called `name`; throws kUnknownLayer.
  std::size_t LayerIndex(std::string_view name) const;

  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  std::span<T> layer_params(std::size_t i);
  std::span<const T> layer_params(std::size_t i) const;

  // He-uniform weights and zero biases from a seeded generator.
  void Initialize(std::uint64_t seed);

  // trace[0] = input, trace[i + 1] = output of layer i; trace.back() = logits.
  std::vector<Tensor<T>> ForwardTrace(const Tensor<T>& input) const;

  // Runs layers [first, end) starting from `activation`, the input of `first`.
  Tensor<T> ForwardFrom(std::size_t first, Tensor<T> activation) const;

  // Backpropagates `grad_logits` through the trace. Entry i of the result is
  // the gradient with respect to trace[i]; it is filled for i >= stop and left
  // empty below. Parameter gradients are accumulated when `param_grad` is
  // non-empty (full-length, aligned with params()).
  std::vector<Tensor<T>> Backward(const std::vector<Tensor<T>>& trace,
                                  const Tensor<T>& grad_logits, std::size_t stop,
                                  ReluMode mode, std::span<T> param_grad = {}) const;

  template <typename U>
  Network<U> Cast() const {
    Network<U> out(input_shape_, layers_);
    auto dst = out.params();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

 private:
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<T> params_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace voice::net

#endif  // VOICE_NETCORE_NETWORK_HPP_
