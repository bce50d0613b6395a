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

#include <algorithm>
#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "testing/fixtures.hpp"
#include "voice/common/error.hpp"
#include "voice/explainers/explainers.hpp"
#include "voice/explainers/explanation_map.hpp"

namespace voice::explainers {
namespace {

using net::BackpropTarget;
using testing::MakeToyModel;
using testing::RandomImage;

net::LayerActivations MakeLayer(int c, int h, int w, std::vector<float> a,
                                std::vector<float> g) {
  net::LayerActivations layer;
  layer.layer_name = "test";
  layer.shape = net::Shape{c, h, w};
  layer.activations = std::move(a);
  layer.gradients = std::move(g);
  return layer;
}

TEST(GradCamTest, RawMapMatchesHandComputation) {
  // w = (mean(g0), mean(g1)) = (1, -0.5); map = ReLU(A0 - 0.5 A1).
  const auto layer = MakeLayer(2, 2, 2, {1, 2, 3, 4, 4, 3, 2, 1}, {1, 1, 1, 1, -2, 0, 0, 0});
  const net::Map2D m = GradCamRaw(layer);
  EXPECT_EQ(m.values, (std::vector<double>{0.0, 0.5, 2.0, 3.5}));
}

TEST(GradCamTest, UnitGradientReturnsActivations) {
  const auto layer = MakeLayer(1, 2, 2, {1, 0, 0, 1}, {1, 1, 1, 1});
  EXPECT_EQ(GradCamRaw(layer).values, (std::vector<double>{1, 0, 0, 1}));
}

TEST(GradCamTest, NegativeGradientsAndCancellationGiveZeroMaps) {
  const auto negative = MakeLayer(1, 2, 2, {1, 2, 3, 4}, {-1, -1, -2, -1});
  for (double v : GradCamRaw(negative).values) EXPECT_EQ(v, 0.0);
  const auto cancel = MakeLayer(2, 2, 2, {1, 2, 3, 4, -1, -2, -3, -4}, {1, 1, 1, 1, 1, 1, 1, 1});
  for (double v : GradCamRaw(cancel).values) EXPECT_EQ(v, 0.0);
  const auto zero = MakeLayer(1, 2, 2, {1, 2, 3, 4}, {0, 0, 0, 0});
  for (double v : GradCamPlusPlusRaw(zero).values) EXPECT_EQ(v, 0.0);
}

TEST(GradCamTest, RawMapIsLinearInActivations) {
  const auto layer = MakeLayer(2, 2, 2, {1, 2, 3, 4, 0.5, 1, 0, 2}, {1, 2, 0, 1, -1, 0, 0, 0});
  auto doubled = layer;
  for (float& a : doubled.activations) a *= 2.0f;
  const auto base = GradCamRaw(layer).values;
  const auto twice = GradCamRaw(doubled).values;
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_DOUBLE_EQ(twice[i], 2.0 * base[i]);
}

TEST(GradCamTest, PlusPlusReducesToGradCamForUniformGradients) {
  // Uniform positive g: alpha is constant, so both maps are proportional to A.
  const auto layer = MakeLayer(1, 2, 2, {0.5, 0, 2, 1}, {0.3f, 0.3f, 0.3f, 0.3f});
  net::Map2D cam = GradCamRaw(layer);
  net::Map2D pp = GradCamPlusPlusRaw(layer);
  NormalizeInPlace(cam);
  NormalizeInPlace(pp);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(cam.values[i], pp.values[i], 1e-12);
}

TEST(GradCamTest, PlusPlusMatchesHandComputation) {
  // sum(A) = 10; alpha = g^2 / (2 g^2 + 10 g^3) where g != 0.
  const auto layer = MakeLayer(1, 2, 2, {1, 2, 3, 4}, {1, 0, 2, -1});
  const double w = (1.0 / 12.0) * 1.0 + (4.0 / 88.0) * 2.0;  // g = -1 adds alpha * 0
  const net::Map2D m = GradCamPlusPlusRaw(layer);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(m.values[i], w * (i + 1), 1e-9);
}

TEST(GradCamTest, RejectsLayersWithoutSpatialExtent) {
  const auto layer = MakeLayer(2, 1, 1, {1, 2}, {1, 1});
  try {
    GradCamRaw(layer);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  EXPECT_THROW(GradCamPlusPlusRaw(layer), Error);
}

TEST(GradCamTest, LossTargetMatchesClosedFormOnToyModel) {
  // relu2 feeds flatten -> fc, so dJ/dA = W^T (softmax(y) - e_Q) exactly.
  net::Model model = MakeToyModel(31);
  const net::ImageTensor x = RandomImage(8, 8, 41);
  const net::PredictionRecord rec = model.Forward(x);
  const int p = rec.predicted;
  const int q = (p + 1) % 10;

  net::GradientRequest request;
  request.layers = {"relu2"};
  const net::GradientResult r = model.Backward(x, BackpropTarget::Loss(p, q), request);
  const net::LayerActivations& la = r.layer("relu2");

  const auto params = model.network().params();
  const std::size_t fc_offset = params.size() - (96 * 10 + 10);
  std::vector<double> grad(96, 0.0);
  for (int o = 0; o < 10; ++o) {
    const double d = rec.probs[o] - (o == q ? 1.0 : 0.0);
    for (int i = 0; i < 96; ++i) grad[i] += params[fc_offset + o * 96 + i] * d;
  }
  for (int i = 0; i < 96; ++i) EXPECT_NEAR(la.gradients[i], grad[i], 1e-5);

  net::Map2D expected(4, 4);
  for (int k = 0; k < 6; ++k) {
    double w = 0.0;
    for (int s = 0; s < 16; ++s) w += grad[k * 16 + s] / 16.0;
    for (int s = 0; s < 16; ++s) expected.values[s] += w * la.activations[k * 16 + s];
  }
  for (double& v : expected.values) v = std::max(v, 0.0);
  const net::Map2D raw = GradCamRaw(la);
  for (int s = 0; s < 16; ++s) EXPECT_NEAR(raw.values[s], expected.values[s], 1e-5);
}

TEST(ExplainerTest, MapsAreNormalizedAtInputSize) {
  net::Model model = MakeToyModel(32);
  const net::ImageTensor x = RandomImage(12, 10, 42);
  const int p = model.Forward(x).predicted;
  for (const char* name : {"gradcam", "gradcampp", "guided_backprop", "smoothgrad"}) {
    ExplainerOptions opts;
    opts.layer = "relu2";
    opts.smoothgrad_samples = 4;
    const auto explainer = MakeExplainer(name, opts);
    for (const BackpropTarget& t : {BackpropTarget::Logit(p), BackpropTarget::Loss(p, (p + 2) % 10)}) {
      const ExplanationMap m = explainer->Explain(model, x, t);
      EXPECT_EQ(m.height(), 12) << name;
      EXPECT_EQ(m.width(), 10) << name;
      EXPECT_EQ(m.target_desc, t.Describe());
      const auto [lo, hi] = std::minmax_element(m.values.values.begin(), m.values.values.end());
      EXPECT_GE(*lo, 0.0);
      EXPECT_LE(*hi, 1.0);
      if (!m.degenerate) {
        EXPECT_EQ(*lo, 0.0) << name;
        EXPECT_EQ(*hi, 1.0) << name;
      }
    }
  }
}

TEST(ExplainerTest, ConstantRawMapNormalizesToZeros) {
  net::Map2D m(3, 3, 2.5);
  const NormalizationBounds b = NormalizeInPlace(m);
  EXPECT_TRUE(b.constant);
  for (double v : m.values) EXPECT_EQ(v, 0.0);
}

TEST(ExplainerTest, SmoothGradWithZeroSigmaIsVanillaGradientBitwise) {
  net::Model model = MakeToyModel(33);
  const net::ImageTensor x = RandomImage(8, 8, 43);
  const int p = model.Forward(x).predicted;
  const SmoothGrad smooth(7, 0.0, 123);
  for (const BackpropTarget& t : {BackpropTarget::Logit(p), BackpropTarget::Loss(p, (p + 4) % 10)}) {
    const ExplanationMap a = smooth.Explain(model, x, t);
    const ExplanationMap b = InputGradientMap(model, x, t);
    ASSERT_EQ(a.values.size(), b.values.size());
    EXPECT_EQ(std::memcmp(a.values.values.data(), b.values.values.data(),
                          a.values.size() * sizeof(double)),
              0);
  }
}

TEST(ExplainerTest, SmoothGradIsSeededAndTargetIndependentInNoise) {
  net::Model model = MakeToyModel(34);
  const net::ImageTensor x = RandomImage(8, 8, 44);
  const SmoothGrad a(5, std::nullopt, 1);
  const SmoothGrad b(5, std::nullopt, 2);
  const auto t = BackpropTarget::Logit(model.Forward(x).predicted);
  EXPECT_EQ(a.Explain(model, x, t).values.values, a.Explain(model, x, t).values.values);
  EXPECT_NE(a.Explain(model, x, t).values.values, b.Explain(model, x, t).values.values);
  EXPECT_NE(a.ConfigKey(), b.ConfigKey());
}

TEST(ExplainerTest, FactoryAndNames) {
  for (Method m : {Method::kGradCam, Method::kGradCamPlusPlus, Method::kGuidedBackprop,
                   Method::kSmoothGrad}) {
    EXPECT_EQ(ParseMethod(MethodName(m)), m);
  }
  ExplainerOptions opts;
  opts.layer = "relu4";
  EXPECT_EQ(MakeExplainer("gradcam", opts)->ConfigKey(), "gradcam@relu4");
  EXPECT_EQ(MakeExplainer("gradcampp", opts)->layer(), "relu4");
  EXPECT_EQ(MakeExplainer("guided_backprop", opts)->layer(), "input");
  EXPECT_THROW(MakeExplainer("lime", opts), Error);
}

TEST(ExplainerTest, ChannelMaxTakesLargestMagnitudeWhenAbsolute) {
  const std::vector<float> g = {0.1f, -0.5f, 0.2f, 0.3f, 0.0f, -0.1f};  // 1x2, 3 channels
  const auto abs_max = ChannelMax(g, 1, 2, 3, true).values;
  EXPECT_EQ(abs_max[0], double(0.5f));
  EXPECT_EQ(abs_max[1], double(0.3f));
  const auto signed_max = ChannelMax(g, 1, 2, 3, false).values;
  EXPECT_NEAR(signed_max[0], 0.2, 1e-7);
  EXPECT_NEAR(signed_max[1], 0.3, 1e-7);
}

TEST(ExplanationMapTest, Png16ExportRoundTripsWithinQuantization) {
  const auto dir = testing::TempDir("map16");
  Rng rng(3);
  const net::Map2D m = testing::RandomMap(5, 7, rng);
  WriteMapPng16(dir / "m", m, {{"method", "gradcam"}});
  const net::Map2D back = ReadMapPng16(dir / "m.png");
  ASSERT_TRUE(back.SameShape(m));
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_LE(std::abs(back.values[i] - m.values[i]), 0.5 / 65535.0 + 1e-12);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "m.json"));
}

}  // namespace
}  // namespace voice::explainers
