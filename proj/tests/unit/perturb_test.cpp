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

#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "testing/fixtures.hpp"
#include "voice/common/error.hpp"
#include "voice/common/image_io.hpp"
#include "voice/perturb/perturb.hpp"

namespace voice::perturb {
namespace {

using net::ImageTensor;
using testing::RandomImage;

double MeanSquaredDifference(const ImageTensor& a, const ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a.pixels[i]) - b.pixels[i];
    s += d * d;
  }
  return s / a.size();
}

double ChannelStd(const ImageTensor& x, int c) {
  double mean = 0.0;
  const int n = x.height * x.width;
  for (int p = 0; p < n; ++p) mean += x.pixels[p * 3 + c];
  mean /= n;
  double ss = 0.0;
  for (int p = 0; p < n; ++p) ss += (x.pixels[p * 3 + c] - mean) * (x.pixels[p * 3 + c] - mean);
  return std::sqrt(ss / n);
}

void ExpectInRangeAndShape(const ImageTensor& out, const ImageTensor& in) {
  ASSERT_EQ(out.height, in.height);
  ASSERT_EQ(out.width, in.width);
  ASSERT_EQ(out.channels, in.channels);
  for (float v : out.pixels) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(LevelTablesTest, Values) {
  EXPECT_EQ(AwgnPower(1), 50.0);
  EXPECT_EQ(AwgnPower(7), 450.0);
  EXPECT_EQ(AwgnPower(8), 7000.0);
  EXPECT_EQ(AwgnPower(15), 11000.0);
  EXPECT_EQ(BlurSigma(5), 2.5);
  EXPECT_EQ(ContrastFactor(5), 0.15);
  EXPECT_EQ(JpegQuality(1), 80);
  EXPECT_EQ(MaxLevel(ChallengeKind::kAwgn), 15);
  EXPECT_THROW(BlurSigma(6), Error);
  for (ChallengeKind k : {ChallengeKind::kAwgn, ChallengeKind::kGaussianBlur,
                          ChallengeKind::kContrast, ChallengeKind::kJpeg, ChallengeKind::kIfgsm}) {
    EXPECT_EQ(ParseChallengeKind(ChallengeKindName(k)), k);
  }
  EXPECT_THROW(ParseChallengeKind("fog"), Error);
}

TEST(PerturbTest, LevelZeroIsIdentity) {
  const ImageTensor x = RandomImage(16, 16, 1);
  EXPECT_EQ(Awgn(x, 0, 3).pixels, x.pixels);
  EXPECT_EQ(GaussianBlur(x, 0).pixels, x.pixels);
  EXPECT_EQ(Contrast(x, 0).pixels, x.pixels);
  EXPECT_EQ(Jpeg(x, 0).pixels, x.pixels);
}

TEST(PerturbTest, AwgnLevelSevenVarianceMatchesPower) {
  const ImageTensor x(224, 224, 3, 0.5f);
  const ImageTensor y = Awgn(x, 7, 17);
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += double(y.pixels[i]) - x.pixels[i];
  mean /= x.size();
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = double(y.pixels[i]) - x.pixels[i] - mean;
    var += d * d;
  }
  var /= x.size();
  const double expected = 450.0 / (255.0 * 255.0);
  EXPECT_NEAR(var, expected, 0.1 * expected);
}

TEST(PerturbTest, AwgnIsSeededPerImage) {
  ImageTensor x = RandomImage(16, 16, 2, "a");
  EXPECT_EQ(Awgn(x, 3, 1).pixels, Awgn(x, 3, 1).pixels);
  EXPECT_NE(Awgn(x, 3, 1).pixels, Awgn(x, 3, 2).pixels);
  ImageTensor renamed = x;
  renamed.source_id = "b";
  EXPECT_NE(Awgn(x, 3, 1).pixels, Awgn(renamed, 3, 1).pixels);
}

TEST(PerturbTest, ContrastScalesChannelStd) {
  const ImageTensor x = RandomImage(32, 32, 3);
  const ImageTensor y = Contrast(x, 5);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(ChannelStd(y, c) / ChannelStd(x, c), 0.15, 0.15 * 0.02);
}

TEST(PerturbTest, JpegQuality100IsNearLossless) {
  ImageTensor x(32, 32, 3);
  for (int y = 0; y < 32; ++y) {
    for (int xx = 0; xx < 32; ++xx) {
      for (int c = 0; c < 3; ++c) x.at(y, xx, c) = (xx * 4 + y * 3 + c * 10) / 255.0f;
    }
  }
  x.norm_mean = {0.5f, 0.5f, 0.5f};
  x.norm_std = {0.25f, 0.25f, 0.25f};
  const ImageTensor y = net::FromRaster(DecodeJpeg(EncodeJpeg(net::ToRaster(x), 100)), "q100");
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(double(y.pixels[i]) - x.pixels[i]));
  EXPECT_LT(worst, 2.0 / 255.0);
  EXPECT_EQ(Jpeg(x, 3).norm_std, x.norm_std);
}

TEST(PerturbTest, BatchDistortionGrowsWithLevelAndStaysInRange) {
  // Batch mean MSE: per-image AWGN draws differ between levels, so single
  // images can wobble near saturation.
  std::vector<ImageTensor> batch;
  for (int i = 0; i < 8; ++i) batch.push_back(RandomImage(64, 64, 10 + i, "img" + std::to_string(i)));
  for (ChallengeKind kind : {ChallengeKind::kAwgn, ChallengeKind::kGaussianBlur,
                             ChallengeKind::kContrast, ChallengeKind::kJpeg}) {
    double previous = 0.0;
    for (int level = 0; level <= MaxLevel(kind); ++level) {
      ChallengeSpec spec;
      spec.kind = kind;
      spec.level = level;
      spec.seed = 5;
      double mse = 0.0;
      for (const ImageTensor& x : batch) {
        const ImageTensor y = ApplyChallenge(x, spec);
        ExpectInRangeAndShape(y, x);
        mse += MeanSquaredDifference(x, y) / batch.size();
      }
      EXPECT_GE(mse, previous) << ChallengeKindName(kind) << " level " << level;
      previous = mse;
    }
  }
}

TEST(ProjectLinfTest, BoundHoldsExactlyInDouble) {
  Rng rng(3);
  const ImageTensor x = RandomImage(16, 16, 4);
  for (double eps : {0.0, 1.0 / 255.0, 8.0 / 255.0, 0.1}) {
    ImageTensor z = x;
    for (float& v : z.pixels) v = static_cast<float>(rng.Uniform(-0.2, 1.2));
    ProjectLinf(x, eps, z);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_LE(std::abs(double(z.pixels[i]) - double(x.pixels[i])), eps);
      ASSERT_GE(z.pixels[i], 0.0f);
      ASSERT_LE(z.pixels[i], 1.0f);
    }
  }
}

TEST(IfgsmTest, RespectsBudgetAndZeroEpsIsIdentity) {
  net::Model model = testing::MakeToyModel(7);
  const ImageTensor x = RandomImage(8, 8, 5);
  IfgsmOptions opts;
  opts.eps = 0.0;
  EXPECT_EQ(Ifgsm(model, x, opts).pixels, x.pixels);
  opts.eps = 8.0 / 255.0;
  const ImageTensor adv = Ifgsm(model, x, opts);
  ExpectInRangeAndShape(adv, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(double(adv.pixels[i]) - x.pixels[i]));
  EXPECT_LE(worst, opts.eps);
  EXPECT_GT(worst, 0.0);
}

TEST(IfgsmTest, IncreasesLossOfTheAttackedLabel) {
  net::Model model = testing::MakeToyModel(8);
  int raised = 0;
  for (int i = 0; i < 5; ++i) {
    const ImageTensor x = RandomImage(8, 8, 20 + i);
    const auto before = model.Forward(x);
    IfgsmOptions opts;
    opts.eps = 4.0 / 255.0;
    const auto after = model.Forward(Ifgsm(model, x, opts));
    raised += after.probs[before.predicted] < before.probs[before.predicted];
  }
  EXPECT_EQ(raised, 5);
}

TEST(ChallengeSpecTest, KeyAndModelRequirement) {
  ChallengeSpec spec;
  spec.kind = ChallengeKind::kIfgsm;
  spec.level = 2;
  spec.seed = 9;
  EXPECT_EQ(spec.Key(), "ifgsm:2:9");
  EXPECT_THROW(ApplyChallenge(RandomImage(8, 8, 1), spec), Error);
  net::Model model = testing::MakeToyModel(9);
  EXPECT_NO_THROW(ApplyChallenge(RandomImage(8, 8, 1), spec, &model));
}

}  // namespace
}  // namespace voice::perturb
