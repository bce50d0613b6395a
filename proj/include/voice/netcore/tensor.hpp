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

#ifndef VOICE_NETCORE_TENSOR_HPP_
#define VOICE_NETCORE_TENSOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace voice::net {

// Channels x height x width. Fully-connected activations use 1x1 spatial.
struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

// Dense CHW tensor.
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T(0)) : shape(s), data(s.size(), fill) {}

  T& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }
  const T& at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }
  void Reset(Shape s) {
    shape = s;
    data.assign(s.size(), T(0));
  }
};

}  // namespace voice::net

#endif  // VOICE_NETCORE_TENSOR_HPP_
