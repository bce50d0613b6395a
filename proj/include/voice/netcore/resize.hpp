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

#ifndef VOICE_NETCORE_RESIZE_HPP_
#define VOICE_NETCORE_RESIZE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace voice::net {

// Half-pixel-centre bilinear sampling taps along one axis (the
// align_corners=false convention). Source coordinates are clamped at the edges.
struct LinearTaps {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> w_hi;
};

inline LinearTaps ComputeLinearTaps(int src, int dst) {
  LinearTaps taps;
  taps.lo.resize(dst);
  taps.hi.resize(dst);
  taps.w_hi.resize(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, src - 1);
    taps.lo[i] = lo;
    taps.hi[i] = hi;
    taps.w_hi[i] = s - lo;
  }
  return taps;
}

// Resizes `planes` stacked single-channel planes (plane-major layout).
template <typename T>
std::vector<T> ResizePlanesBilinear(std::span<const T> src, int planes, int src_h,
                                    int src_w, int dst_h, int dst_w) {
  std::vector<T> dst(static_cast<std::size_t>(planes) * dst_h * dst_w);
  if (src_h == dst_h && src_w == dst_w) {
    std::copy(src.begin(), src.end(), dst.begin());
    return dst;
  }
  const LinearTaps ty = ComputeLinearTaps(src_h, dst_h);
  const LinearTaps tx = ComputeLinearTaps(src_w, dst_w);
  for (int p = 0; p < planes; ++p) {
    const T* s = src.data() + static_cast<std::size_t>(p) * src_h * src_w;
    T* d = dst.data() + static_cast<std::size_t>(p) * dst_h * dst_w;
    for (int y = 0; y < dst_h; ++y) {
      const double wy = ty.w_hi[y];
      const T* r0 = s + static_cast<std::size_t>(ty.lo[y]) * src_w;
      const T* r1 = s + static_cast<std::size_t>(ty.hi[y]) * src_w;
      for (int x = 0; x < dst_w; ++x) {
        const double wx = tx.w_hi[x];
        const double top = (1 - wx) * r0[tx.lo[x]] + wx * r0[tx.hi[x]];
        const double bot = (1 - wx) * r1[tx.lo[x]] + wx * r1[tx.hi[x]];
        d[static_cast<std::size_t>(y) * dst_w + x] = static_cast<T>((1 - wy) * top + wy * bot);
      }
    }
  }
  return dst;
}

// Adjoint of ResizePlanesBilinear: scatters a gradient on the resized planes
// back onto the source grid.
template <typename T>
std::vector<T> ResizePlanesBilinearAdjoint(std::span<const T> grad_dst, int planes,
                                           int src_h, int src_w, int dst_h,
                                           int dst_w) {
  std::vector<T> grad_src(static_cast<std::size_t>(planes) * src_h * src_w, T(0));
  if (src_h == dst_h && src_w == dst_w) {
    std::copy(grad_dst.begin(), grad_dst.end(), grad_src.begin());
    return grad_src;
  }
  const LinearTaps ty = ComputeLinearTaps(src_h, dst_h);
  const LinearTaps tx = ComputeLinearTaps(src_w, dst_w);
  for (int p = 0; p < planes; ++p) {
    const T* g = grad_dst.data() + static_cast<std::size_t>(p) * dst_h * dst_w;
    T* s = grad_src.data() + static_cast<std::size_t>(p) * src_h * src_w;
    for (int y = 0; y < dst_h; ++y) {
      const double wy = ty.w_hi[y];
      T* r0 = s + static_cast<std::size_t>(ty.lo[y]) * src_w;
      T* r1 = s + static_cast<std::size_t>(ty.hi[y]) * src_w;
      for (int x = 0; x < dst_w; ++x) {
        const double v = g[static_cast<std::size_t>(y) * dst_w + x];
        const double wx = tx.w_hi[x];
        r0[tx.lo[x]] += static_cast<T>((1 - wy) * (1 - wx) * v);
        r0[tx.hi[x]] += static_cast<T>((1 - wy) * wx * v);
        r1[tx.lo[x]] += static_cast<T>(wy * (1 - wx) * v);
        r1[tx.hi[x]] += static_cast<T>(wy * wx * v);
      }
    }
  }
  return grad_src;
}

}  // namespace voice::net

#endif  // VOICE_NETCORE_RESIZE_HPP_
