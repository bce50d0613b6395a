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

// Leveled input corruptions and an iterative FGSM probe. Every function
// preserves shape and keeps pixels in [0,1]; level 0 is the identity.

#ifndef VOICE_PERTURB_PERTURB_HPP_
#define VOICE_PERTURB_PERTURB_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "voice/netcore/image.hpp"
#include "voice/netcore/model.hpp"

namespace voice::perturb {

enum class ChallengeKind { kAwgn, kGaussianBlur, kContrast, kJpeg, kIfgsm };

// "awgn", "gaussian_blur", "contrast", "jpeg", "ifgsm".
std::string_view ChallengeKindName(ChallengeKind kind);
ChallengeKind ParseChallengeKind(std::string_view name);

inline constexpr int kMaxAwgnLevel = 15;
inline constexpr int kMaxCorruptionLevel = 5;

// Noise power in squared 8-bit units: levels 1-7 run linearly 50..450,
// levels 8-15 linearly 7000..11000.
double AwgnPower(int level);
double BlurSigma(int level);         // {0, .5, 1, 1.5, 2, 2.5}
double ContrastFactor(int level);    // {1, .75, .6, .45, .3, .15}
int JpegQuality(int level);          // {100, 80, 60, 40, 25, 15}; level 0 skips the codec
int MaxLevel(ChallengeKind kind);

// Noise is drawn from MixSeed(seed, hash(source_id), level).
net::ImageTensor Awgn(const net::ImageTensor& x, int level, std::uint64_t seed);
net::ImageTensor GaussianBlur(const net::ImageTensor& x, int level);
// Blend toward the per-channel mean: mean + f * (x - mean).
net::ImageTensor Contrast(const net::ImageTensor& x, int level);
net::ImageTensor Jpeg(const net::ImageTensor& x, int level);

// Blur with an explicit sigma (reflected borders, radius ceil(3 sigma)).
net::ImageTensor GaussianBlurSigma(const net::ImageTensor& x, double sigma);

struct IfgsmOptions {
  double eps = 8.0 / 255.0;
  int steps = 10;
  std::optional<double> step_size;  // default eps / steps
  std::optional<int> label;         // default: the model's prediction on x
};

// Sign-gradient ascent on cross-entropy, projected after every step onto
// {z : |z - x|_inf <= eps} intersected with [0,1].
net::ImageTensor Ifgsm(net::Model& model, const net::ImageTensor& x,
                       const IfgsmOptions& options);

// Projects z onto the eps-ball around x in [0,1] such that the float result
// satisfies |z - x| <= eps exactly when evaluated in double precision.
void ProjectLinf(const net::ImageTensor& x, double eps, net::ImageTensor& z);

struct ChallengeSpec {
  ChallengeKind kind = ChallengeKind::kGaussianBlur;
  int level = 0;
  std::uint64_t seed = 0;
  // ifgsm only; level l uses eps = l * ifgsm_eps_per_level.
  double ifgsm_eps_per_level = 2.0 / 255.0;
  int ifgsm_steps = 10;

  // Cache identity: "<kind>:<level>:<seed>".
  std::string Key() const;
};

// Dispatches to the generator for spec.kind. The model is needed (and
// checked) only for ifgsm.
net::ImageTensor ApplyChallenge(const net::ImageTensor& x, const ChallengeSpec& spec,
                                net::Model* model = nullptr);

}  // namespace voice::perturb

#endif  // VOICE_PERTURB_PERTURB_HPP_
