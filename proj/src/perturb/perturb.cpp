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

#include "voice/perturb/perturb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "voice/common/error.hpp"
#include "voice/common/image_io.hpp"
#include "voice/common/random.hpp"

namespace voice::perturb {
namespace {

constexpr std::array<double, 6> kBlurSigmas = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
constexpr std::array<double, 6> kContrastFactors = {1.0, 0.75, 0.6, 0.45, 0.3, 0.15};
constexpr std::array<int, 6> kJpegQualities = {100, 80, 60, 40, 25, 15};

void CheckLevel(int level, int max_level, std::string_view what) {
  if (level < 0 || level > max_level) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " level must lie in [0, " +
                                                 std::to_string(max_level) + "]");
  }
}

// Reflects an out-of-range index back into [0, n) (edge pixel not repeated).
int Reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

std::string_view ChallengeKindName(ChallengeKind kind) {
  switch (kind) {
    case ChallengeKind::kAwgn: return "awgn";
    case ChallengeKind::kGaussianBlur: return "gaussian_blur";
    case ChallengeKind::kContrast: return "contrast";
    case ChallengeKind::kJpeg: return "jpeg";
    case ChallengeKind::kIfgsm: return "ifgsm";
  }
  return "unknown";
}

ChallengeKind ParseChallengeKind(std::string_view name) {
  for (ChallengeKind k : {ChallengeKind::kAwgn, ChallengeKind::kGaussianBlur,
                          ChallengeKind::kContrast, ChallengeKind::kJpeg, ChallengeKind::kIfgsm}) {
    if (ChallengeKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown challenge: " + std::string(name));
}

double AwgnPower(int level) {
  CheckLevel(level, kMaxAwgnLevel, "awgn");
  if (level == 0) return 0.0;
  if (level <= 7) return 50.0 + (level - 1) * (450.0 - 50.0) / 6.0;
  return 7000.0 + (level - 8) * (11000.0 - 7000.0) / 7.0;
}

double BlurSigma(int level) {
  CheckLevel(level, kMaxCorruptionLevel, "gaussian_blur");
  return kBlurSigmas[level];
}

double ContrastFactor(int level) {
  CheckLevel(level, kMaxCorruptionLevel, "contrast");
  return kContrastFactors[level];
}

int JpegQuality(int level) {
  CheckLevel(level, kMaxCorruptionLevel, "jpeg");
  return kJpegQualities[level];
}

int MaxLevel(ChallengeKind kind) {
  return kind == ChallengeKind::kAwgn ? kMaxAwgnLevel : kMaxCorruptionLevel;
}

net::ImageTensor Awgn(const net::ImageTensor& x, int level, std::uint64_t seed) {
  const double power = AwgnPower(level);
  net::ImageTensor out = x;
  if (power == 0.0) return out;
  const double sd = std::sqrt(power) / 255.0;
  Rng rng(MixSeed(seed, StableHash(x.source_id), static_cast<std::uint64_t>(level)));
  for (float& v : out.pixels) {
    v = static_cast<float>(std::clamp(v + sd * rng.Normal(), 0.0, 1.0));
  }
  return out;
}

net::ImageTensor GaussianBlurSigma(const net::ImageTensor& x, double sigma) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "blur sigma must be >= 0");
  net::ImageTensor out = x;
  if (sigma == 0.0) return out;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += kernel[i + radius];
  }
  for (double& k : kernel) k /= total;

  const int h = x.height;
  const int w = x.width;
  const int c = x.channels;
  std::vector<double> tmp(x.pixels.size());
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] * x.at(y, Reflect(xx + k, w), ch);
        }
        tmp[(static_cast<std::size_t>(y) * w + xx) * c + ch] = acc;
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] *
                 tmp[(static_cast<std::size_t>(Reflect(y + k, h)) * w + xx) * c + ch];
        }
        out.at(y, xx, ch) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

net::ImageTensor GaussianBlur(const net::ImageTensor& x, int level) {
  return GaussianBlurSigma(x, BlurSigma(level));
}

net::ImageTensor Contrast(const net::ImageTensor& x, int level) {
  const double f = ContrastFactor(level);
  net::ImageTensor out = x;
  if (f == 1.0) return out;
  const std::size_t plane = static_cast<std::size_t>(x.height) * x.width;
  for (int ch = 0; ch < x.channels; ++ch) {
    double mean = 0.0;
    for (std::size_t p = 0; p < plane; ++p) mean += x.pixels[p * x.channels + ch];
    mean /= static_cast<double>(plane);
    for (std::size_t p = 0; p < plane; ++p) {
      float& v = out.pixels[p * x.channels + ch];
      v = static_cast<float>(std::clamp(mean + f * (v - mean), 0.0, 1.0));
    }
  }
  return out;
}

net::ImageTensor Jpeg(const net::ImageTensor& x, int level) {
  const int quality = JpegQuality(level);
  if (level == 0) return x;
  const std::vector<std::uint8_t> bytes = EncodeJpeg(net::ToRaster(x), quality);
  net::ImageTensor out = net::FromRaster(DecodeJpeg(bytes), x.source_id);
  out.norm_mean = x.norm_mean;
  out.norm_std = x.norm_std;
  if (out.channels != x.channels) {
    throw Error(ErrorCode::kShapeMismatch, "jpeg round trip changed the channel count");
  }
  return out;
}

void ProjectLinf(const net::ImageTensor& x, double eps, net::ImageTensor& z) {
  if (z.pixels.size() != x.pixels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "projection: shapes differ");
  }
  constexpr float kInf = std::numeric_limits<float>::infinity();
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    const double xi = x.pixels[i];
    // Round the box edges inward so the float bounds never exceed eps.
    float lo = static_cast<float>(std::max(0.0, xi - eps));
    if (xi - lo > eps) lo = std::nextafter(lo, kInf);
    float hi = static_cast<float>(std::min(1.0, xi + eps));
    if (hi - xi > eps) hi = std::nextafter(hi, -kInf);
    lo = std::min(lo, x.pixels[i]);
    hi = std::max(hi, x.pixels[i]);
    z.pixels[i] = std::clamp(z.pixels[i], lo, hi);
  }
}

net::ImageTensor Ifgsm(net::Model& model, const net::ImageTensor& x,
                       const IfgsmOptions& options) {
  if (!(options.eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be >= 0");
  if (options.steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  net::ImageTensor adv = x;
  if (options.eps == 0.0) return adv;
  const double step = options.step_size.value_or(options.eps / options.steps);
  const int label = options.label.has_value() ? *options.label : model.Forward(x).predicted;

  net::GradientRequest request;
  request.input_gradient = true;
  const net::Objective objective{net::Objective::Kind::kCrossEntropy, label};
  for (int s = 0; s < options.steps; ++s) {
    const net::GradientResult r = model.BackwardObjective(adv, objective, request);
    for (std::size_t i = 0; i < adv.pixels.size(); ++i) {
      const float g = r.input_gradient[i];
      if (!std::isfinite(g)) throw Error(ErrorCode::kNonFinite, "non-finite input gradient");
      const double dir = g > 0.0f ? 1.0 : (g < 0.0f ? -1.0 : 0.0);
      adv.pixels[i] = static_cast<float>(adv.pixels[i] + step * dir);
    }
    ProjectLinf(x, options.eps, adv);
  }
  return adv;
}

std::string ChallengeSpec::Key() const {
  return std::string(ChallengeKindName(kind)) + ":" + std::to_string(level) + ":" +
         std::to_string(seed);
}

net::ImageTensor ApplyChallenge(const net::ImageTensor& x, const ChallengeSpec& spec,
                                net::Model* model) {
  switch (spec.kind) {
    case ChallengeKind::kAwgn:
      return Awgn(x, spec.level, spec.seed);
    case ChallengeKind::kGaussianBlur:
      return GaussianBlur(x, spec.level);
    case ChallengeKind::kContrast:
      return Contrast(x, spec.level);
    case ChallengeKind::kJpeg:
      return Jpeg(x, spec.level);
    case ChallengeKind::kIfgsm: {
      CheckLevel(spec.level, kMaxCorruptionLevel, "ifgsm");
      if (spec.level == 0) return x;
      if (model == nullptr) {
        throw Error(ErrorCode::kPrecondition, "ifgsm challenge needs a model");
      }
      IfgsmOptions options;
      options.eps = spec.level * spec.ifgsm_eps_per_level;
      options.steps = spec.ifgsm_steps;
      return Ifgsm(*model, x, options);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown challenge kind");
}

}  // namespace voice::perturb
