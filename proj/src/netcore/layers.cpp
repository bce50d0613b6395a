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

#include "voice/netcore/layers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

#include "voice/common/error.hpp"

namespace voice::net {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

// Unfolds a CHW input into (C*k*k) x (H*W) patch columns, zero padded.
template <typename T>
void Im2Col(const Tensor<T>& in, int kernel, std::vector<T>& cols) {
  const int pad = kernel / 2;
  const int h = in.shape.height;
  const int w = in.shape.width;
  cols.assign(static_cast<std::size_t>(in.shape.channels) * kernel * kernel * h * w, T(0));
  std::size_t row = 0;
  for (int c = 0; c < in.shape.channels; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        T* dst = cols.data() + row * h * w;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          const T* src = in.data.data() + (static_cast<std::size_t>(c) * h + sy) * w;
          const int x0 = std::max(0, pad - kx);
          const int x1 = std::min(w, w + pad - kx);
          for (int x = x0; x < x1; ++x) dst[y * w + x] = src[x + kx - pad];
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const std::vector<T>& cols, int kernel, Tensor<T>& grad_in) {
  const int pad = kernel / 2;
  const int h = grad_in.shape.height;
  const int w = grad_in.shape.width;
  std::fill(grad_in.data.begin(), grad_in.data.end(), T(0));
  std::size_t row = 0;
  for (int c = 0; c < grad_in.shape.channels; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        const T* src = cols.data() + row * h * w;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          T* dst = grad_in.data.data() + (static_cast<std::size_t>(c) * h + sy) * w;
          const int x0 = std::max(0, pad - kx);
          const int x1 = std::min(w, w + pad - kx);
          for (int x = x0; x < x1; ++x) dst[x + kx - pad] += src[y * w + x];
        }
      }
    }
  }
}

}  // namespace

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2: return "maxpool2";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kLinear: return "linear";
  }
  return "unknown";
}

LayerKind ParseLayerKind(std::string_view name) {
  for (LayerKind k : {LayerKind::kConv2d, LayerKind::kRelu, LayerKind::kMaxPool2,
                      LayerKind::kFlatten, LayerKind::kLinear}) {
    if (LayerKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown layer kind: " + std::string(name));
}

template <typename T>
std::size_t LayerOps<T>::ParamCount(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::kConv2d:
      return static_cast<std::size_t>(spec.out) * spec.in * spec.kernel * spec.kernel +
             spec.out;
    case LayerKind::kLinear:
      return static_cast<std::size_t>(spec.out) * spec.in + spec.out;
    default:
      return 0;
  }
}

template <typename T>
Shape LayerOps<T>::OutputShape(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::kConv2d:
      if (in.channels != spec.in) {
        throw Error(ErrorCode::kShapeMismatch,
                    spec.name + ": expected " + std::to_string(spec.in) +
                        " input channels, got " + std::to_string(in.channels));
      }
      return {spec.out, in.height, in.width};
    case LayerKind::kRelu:
      return in;
    case LayerKind::kMaxPool2:
      if (in.height < 2 || in.width < 2) {
        throw Error(ErrorCode::kShapeMismatch, spec.name + ": input too small to pool");
      }
      return {in.channels, in.height / 2, in.width / 2};
    case LayerKind::kFlatten:
      return {static_cast<int>(in.size()), 1, 1};
    case LayerKind::kLinear:
      if (static_cast<int>(in.size()) != spec.in) {
        throw Error(ErrorCode::kShapeMismatch,
                    spec.name + ": expected " + std::to_string(spec.in) +
                        " inputs, got " + std::to_string(in.size()));
      }
      return {spec.out, 1, 1};
  }
  return in;
}

template <typename T>
void LayerOps<T>::Forward(const LayerSpec& spec, std::span<const T> params,
                          const Tensor<T>& in, Tensor<T>& out) {
  out.Reset(OutputShape(spec, in.shape));
  switch (spec.kind) {
    case LayerKind::kConv2d: {
      const int kk = spec.in * spec.kernel * spec.kernel;
      const int hw = static_cast<int>(in.shape.plane());
      std::vector<T> cols;
      Im2Col(in, spec.kernel, cols);
      ConstMatrixMap<T> weights(params.data(), spec.out, kk);
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(
          params.data() + static_cast<std::size_t>(spec.out) * kk, spec.out);
      ConstMatrixMap<T> col_mat(cols.data(), kk, hw);
      MatrixMap<T> result(out.data.data(), spec.out, hw);
      result.noalias() = weights * col_mat;
      result.colwise() += bias;
      break;
    }
    case LayerKind::kRelu:
      for (std::size_t i = 0; i < in.data.size(); ++i) {
        out.data[i] = in.data[i] > T(0) ? in.data[i] : T(0);
      }
      break;
    case LayerKind::kMaxPool2:
      for (int c = 0; c < out.shape.channels; ++c) {
        for (int y = 0; y < out.shape.height; ++y) {
          for (int x = 0; x < out.shape.width; ++x) {
            T best = in.at(c, 2 * y, 2 * x);
            best = std::max(best, in.at(c, 2 * y, 2 * x + 1));
            best = std::max(best, in.at(c, 2 * y + 1, 2 * x));
            best = std::max(best, in.at(c, 2 * y + 1, 2 * x + 1));
            out.at(c, y, x) = best;
          }
        }
      }
      break;
    case LayerKind::kFlatten:
      out.data = in.data;
      break;
    case LayerKind::kLinear: {
      ConstMatrixMap<T> weights(params.data(), spec.out, spec.in);
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(
          params.data() + static_cast<std::size_t>(spec.out) * spec.in, spec.out);
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> x(in.data.data(), spec.in);
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> y(out.data.data(), spec.out);
      y.noalias() = weights * x;
      y += bias;
      break;
    }
  }
}

template <typename T>
void LayerOps<T>::Backward(const LayerSpec& spec, std::span<const T> params,
                           const Tensor<T>& in, const Tensor<T>& out,
                           const Tensor<T>& grad_out, Tensor<T>* grad_in,
                           std::span<T> param_grad, ReluMode mode) {
  if (grad_in != nullptr) grad_in->Reset(in.shape);
  switch (spec.kind) {
    case LayerKind::kConv2d: {
      const int kk = spec.in * spec.kernel * spec.kernel;
      const int hw = static_cast<int>(in.shape.plane());
      ConstMatrixMap<T> g(grad_out.data.data(), spec.out, hw);
      std::vector<T> cols;
      if (!param_grad.empty()) {
        Im2Col(in, spec.kernel, cols);
        ConstMatrixMap<T> col_mat(cols.data(), kk, hw);
        MatrixMap<T> gw(param_grad.data(), spec.out, kk);
        gw.noalias() += g * col_mat.transpose();
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(
            param_grad.data() + static_cast<std::size_t>(spec.out) * kk, spec.out);
        gb += g.rowwise().sum();
      }
      if (grad_in != nullptr) {
        ConstMatrixMap<T> weights(params.data(), spec.out, kk);
        cols.assign(static_cast<std::size_t>(kk) * hw, T(0));
        MatrixMap<T> gcols(cols.data(), kk, hw);
        gcols.noalias() = weights.transpose() * g;
        Col2Im(cols, spec.kernel, *grad_in);
      }
      break;
    }
    case LayerKind::kRelu:
      if (grad_in == nullptr) break;
      for (std::size_t i = 0; i < in.data.size(); ++i) {
        T g = in.data[i] > T(0) ? grad_out.data[i] : T(0);
        if (mode == ReluMode::kGuided && g < T(0)) g = T(0);
        grad_in->data[i] = g;
      }
      break;
    case LayerKind::kMaxPool2:
      if (grad_in == nullptr) break;
      // Gradient goes to the first maximal element in raster order.
      for (int c = 0; c < out.shape.channels; ++c) {
        for (int y = 0; y < out.shape.height; ++y) {
          for (int x = 0; x < out.shape.width; ++x) {
            const T target = out.at(c, y, x);
            bool routed = false;
            for (int dy = 0; dy < 2 && !routed; ++dy) {
              for (int dx = 0; dx < 2 && !routed; ++dx) {
                if (in.at(c, 2 * y + dy, 2 * x + dx) == target) {
                  grad_in->at(c, 2 * y + dy, 2 * x + dx) += grad_out.at(c, y, x);
                  routed = true;
                }
              }
            }
          }
        }
      }
      break;
    case LayerKind::kFlatten:
      if (grad_in != nullptr) grad_in->data = grad_out.data;
      break;
    case LayerKind::kLinear: {
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> g(grad_out.data.data(),
                                                              spec.out);
      if (!param_grad.empty()) {
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> x(in.data.data(), spec.in);
        MatrixMap<T> gw(param_grad.data(), spec.out, spec.in);
        gw.noalias() += g * x.transpose();
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(
            param_grad.data() + static_cast<std::size_t>(spec.out) * spec.in, spec.out);
        gb += g;
      }
      if (grad_in != nullptr) {
        ConstMatrixMap<T> weights(params.data(), spec.out, spec.in);
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gx(grad_in->data.data(), spec.in);
        gx.noalias() = weights.transpose() * g;
      }
      break;
    }
  }
}

template struct LayerOps<float>;
template struct LayerOps<double>;

}  // namespace voice::net
