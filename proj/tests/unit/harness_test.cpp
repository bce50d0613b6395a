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
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "testing/fixtures.hpp"
#include "voice/common/error.hpp"
#include "voice/common/hash.hpp"
#include "voice/explainers/explainers.hpp"
#include "voice/harness/cache.hpp"
#include "voice/harness/config.hpp"
#include "voice/harness/overlay.hpp"
#include "voice/harness/protocol.hpp"
#include "voice/harness/report.hpp"
#include "voice/netcore/synthetic.hpp"

namespace voice::harness {
namespace {

using nlohmann::json;

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t CountLines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

// ---- Config ----------------------------------------------------------------

TEST(ConfigTest, ParsesFlatTextWithComments) {
  const auto entries = ParseConfigText(
      "# experiment\nexplainers = gradcam, gradcampp\npt = 0.01   # small N\n\nlevels = 0-2\n");
  ExperimentConfig c;
  ApplyConfigEntries(entries, c);
  EXPECT_EQ(c.explainers, (std::vector<std::string>{"gradcam", "gradcampp"}));
  EXPECT_EQ(c.p_t, 0.01);
  EXPECT_EQ(c.levels, (std::vector<int>{0, 1, 2}));
}

TEST(ConfigTest, RejectsUnknownAndDuplicateKeys) {
  ExperimentConfig c;
  EXPECT_EQ(CodeOf([&] { ApplyConfigEntries({{"p_threshold", "0.1"}}, c); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(CodeOf([&] { ParseConfigText("pt = 0.1\npt = 0.2\n"); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(CodeOf([&] { ApplyConfigEntries({{"samples", "many"}}, c); }),
            ErrorCode::kInvalidConfig);
}

TEST(ConfigTest, HashIgnoresKeyOrderAndOutputLocation) {
  ExperimentConfig a;
  ApplyConfigEntries(ParseConfigText("pt = 0.01\nsamples = 20\nout = /tmp/a\nworkers = 1\n"), a);
  ExperimentConfig b;
  ApplyConfigEntries(ParseConfigText("workers = 4\nsamples = 20\nout = /tmp/b\npt = 0.01\n"), b);
  EXPECT_EQ(a.Hash(), b.Hash());
  b.p_t = 0.02;
  EXPECT_NE(a.Hash(), b.Hash());
}

TEST(ConfigTest, FlagsOverrideFileValues) {
  const auto dir = testing::TempDir("config");
  std::ofstream(dir / "run.cfg") << "samples = 20\npt = 0.01\n";
  const ExperimentConfig c = LoadConfig(dir / "run.cfg", {{"samples", "7"}, {"iou-t", "0.3"}});
  EXPECT_EQ(c.samples, 7);
  EXPECT_EQ(c.p_t, 0.01);
  EXPECT_EQ(c.iou_t, 0.3);
  EXPECT_EQ(CodeOf([&] { LoadConfig(dir / "missing.cfg", {}); }), ErrorCode::kIo);
}

TEST(ConfigTest, ValidationAndSchema) {
  ExperimentConfig c;
  EXPECT_EQ(CodeOf([&] { c.Validate(true, false); }), ErrorCode::kInvalidConfig);
  c.p_t = 1.5;
  EXPECT_EQ(CodeOf([&] { c.Validate(false, false); }), ErrorCode::kInvalidConfig);
  std::set<std::string> names;
  for (const ConfigKey& k : ConfigSchema()) names.insert(k.name);
  for (const char* key : {"weights", "data", "explainers", "pt", "iou_t", "challenge", "levels",
                          "seeds", "out", "workers"}) {
    EXPECT_TRUE(names.count(key)) << key;
  }
}

TEST(ConfigTest, ListParsing) {
  EXPECT_EQ(ParseIntList("0,3-5"), (std::vector<int>{0, 3, 4, 5}));
  EXPECT_EQ(ParseDoubleList("0.1, 0.3,0.5"), (std::vector<double>{0.1, 0.3, 0.5}));
  EXPECT_EQ(ParseStringList(" a ,b"), (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(ParseIntList("5-2"), Error);
}

TEST(SamplingTest, SeededDistinctIndices) {
  const auto a = SampleIndices(100, 30, 4);
  EXPECT_EQ(a, SampleIndices(100, 30, 4));
  EXPECT_NE(a, SampleIndices(100, 30, 5));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 30u);
  for (std::size_t i : a) EXPECT_LT(i, 100u);
  EXPECT_EQ(SampleIndices(5, 30, 4).size(), 5u);
}

// ---- Cache -----------------------------------------------------------------

TEST(CacheTest, RoundTripIsExact) {
  const auto dir = testing::TempDir("cache");
  net::Model model = testing::MakeToyModel(61);
  const net::ImageTensor x = testing::RandomImage(8, 8, 62, "toy:1");
  const auto result = uncertainty::ComputeVoice(model, x, explainers::GradCamPlusPlus("relu2"), 0.01);
  const MapCache cache(dir);
  CacheKey key{model.weight_checksum(), x.source_id, "clean", "gradcampp@relu2", "relu2", 0.01, 0};
  cache.Store(key.Digest(), EntryFromResult(result));
  const auto back = cache.Load(key.Digest());
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->explanation.values.values, result.explanation.values.values);
  EXPECT_EQ(back->voice.values.values, result.voice.values.values);
  EXPECT_EQ(back->record.probs, result.record.probs);
  EXPECT_EQ(back->contrast_classes, result.contrast_set.classes);
  EXPECT_EQ(back->voice.r_used, result.voice.r_used);

  CacheKey other = key;
  other.p_t = 0.02;
  EXPECT_NE(other.Digest(), key.Digest());
  EXPECT_FALSE(cache.Load(other.Digest()).has_value());
  EXPECT_FALSE(MapCache().Load(key.Digest()).has_value());
}

// ---- Protocol --------------------------------------------------------------

class ProtocolTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = net::GenerateSyntheticDataset(40, 77, "synthetic:test");
  }

  ExperimentConfig Config(const std::string& name) const {
    ExperimentConfig c;
    c.samples = 10;
    c.p_t = 0.01;
    c.workers = 1;
    c.out = testing::TempDir(name).string();
    return c;
  }

  net::Model model_ = testing::MakeSmallModel(71);
  net::Dataset data_;
};

TEST_F(ProtocolTest, OneRowPerImageAndExplainer) {
  const ExperimentConfig c = Config("rows");
  const RunResult run = RunCleanProtocol(model_, data_, c);
  EXPECT_EQ(run.records.size(), 20u);
  EXPECT_TRUE(run.skipped.empty());
  WriteRunOutputs(run, c);
  const std::string csv = ReadFile(std::filesystem::path(c.out) / "metrics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kMetricsCsvHeader);
  EXPECT_EQ(CountLines(csv), 21u);
  std::set<std::string> ids;
  for (const auto& r : run.records) ids.insert(r.source_id + "|" + r.method);
  EXPECT_EQ(ids.size(), 20u);
}

TEST_F(ProtocolTest, RerunHitsCacheAndReproducesCsv) {
  ExperimentConfig c = Config("rerun");
  const RunResult first = RunCleanProtocol(model_, data_, c);
  EXPECT_GT(first.backward_passes, 0u);
  WriteRunOutputs(first, c);
  const std::string csv1 = ReadFile(std::filesystem::path(c.out) / "metrics.csv");

  const RunResult second = RunCleanProtocol(model_, data_, c);
  EXPECT_EQ(second.backward_passes, 0u);
  EXPECT_EQ(second.cache_hits, 20);
  WriteRunOutputs(second, c);
  EXPECT_EQ(ReadFile(std::filesystem::path(c.out) / "metrics.csv"), csv1);

  // A cold run with two workers and no cache gives the same bytes.
  ExperimentConfig cold = Config("rerun_cold");
  cold.cache = "off";
  cold.workers = 2;
  WriteRunOutputs(RunCleanProtocol(model_, data_, cold), cold);
  EXPECT_EQ(ReadFile(std::filesystem::path(cold.out) / "metrics.csv"), csv1);
}

TEST_F(ProtocolTest, SummaryPercentDifferenceIsConsistent) {
  // Relabel half of the images with the prediction so both splits exist.
  for (std::size_t i = 0; i < data_.size(); i += 2) {
    data_.labels[i] = model_.Forward(data_.images[i]).predicted;
  }
  ExperimentConfig c = Config("summary");
  c.samples = 16;
  c.cache = "off";
  const RunResult run = RunCleanProtocol(model_, data_, c);
  const json summary = SummaryJson(run, c);
  ASSERT_EQ(summary.at("groups").size(), 2u);
  for (const json& g : summary.at("groups")) {
    EXPECT_EQ(g.at("n").get<int>(), 16);
    for (const char* metric : {"iou", "snr"}) {
      const json& s = g.at(metric);
      if (s.at("percent_difference").is_null()) continue;
      const double c_mean = s.at("correct").at("mean").get<double>();
      const double w_mean = s.at("wrong").at("mean").get<double>();
      EXPECT_DOUBLE_EQ(s.at("percent_difference").get<double>(),
                       metrics::PercentDifference(c_mean, w_mean));
    }
  }
}

TEST_F(ProtocolTest, AllCorrectLeavesWrongSplitAbsent) {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_.labels[i] = model_.Forward(data_.images[i]).predicted;
  }
  ExperimentConfig c = Config("allcorrect");
  c.samples = 1;
  c.explainers = {"gradcam"};
  const json summary = SummaryJson(RunCleanProtocol(model_, data_, c), c);
  const json& iou = summary.at("groups")[0].at("iou");
  EXPECT_TRUE(iou.at("wrong").at("mean").is_null());
  EXPECT_EQ(iou.at("wrong").at("count").get<int>(), 0);
  EXPECT_TRUE(iou.at("percent_difference").is_null());
}

TEST_F(ProtocolTest, IdentityOnlyChallengeIsRejected) {
  ExperimentConfig c = Config("identity");
  c.challenge = "gaussian_blur";
  c.levels = {0};
  EXPECT_EQ(CodeOf([&] { RunChallengeProtocol(model_, data_, c); }), ErrorCode::kPrecondition);
}

TEST_F(ProtocolTest, ChallengeCurvesAndAucTable) {
  ExperimentConfig c = Config("curves");
  c.challenge = "gaussian_blur";
  c.levels = {0, 1, 2};
  c.samples = 6;
  c.seeds = {0, 1};
  const RunResult run = RunChallengeProtocol(model_, data_, c);
  EXPECT_EQ(run.records.size(), 2u * 3u * 6u * 2u);
  const CurveSet curves = BuildCurves(run, c);
  EXPECT_EQ(curves.curves.size(), 8u);  // {accuracy, iou, snr, nll} x 2 methods
  ASSERT_EQ(curves.aucs.size(), 4u);    // {iou, snr} x 2 methods
  for (const auto& a : curves.aucs) {
    EXPECT_GE(a.auc, 0.0);
    EXPECT_LE(a.auc, 1.0);
    EXPECT_EQ(a.challenge, "gaussian_blur");
  }
  const json manifest = WriteRunOutputs(run, c);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.out) / "curves.json"));
  EXPECT_EQ(manifest.at("files").at("metrics.csv").get<std::string>(),
            "sha256:" + Sha256File(std::filesystem::path(c.out) / "metrics.csv"));
  const std::string table = FormatAucTable(CurvesJson(curves, run));
  EXPECT_NE(table.find("gradcampp"), std::string::npos);
}

TEST_F(ProtocolTest, SweepMatchesMetricsModule) {
  ExperimentConfig c = Config("sweep");
  c.explainers = {"gradcam"};
  RunOptions opts;
  opts.retain_maps = true;
  const RunResult run = RunCleanProtocol(model_, data_, c, opts);
  ASSERT_EQ(run.maps.size(), run.records.size());
  std::vector<metrics::MapPair> pairs;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    pairs.push_back({&run.maps[i].voice, &run.maps[i].explanation, run.records[i].correct});
  }
  const std::vector<double> t = {0.1, 0.3, 0.5};
  const auto expected = metrics::ThresholdSweep(pairs, t);
  const auto tables = SweepByMethod(run, t);
  ASSERT_EQ(tables.size(), 1u);
  ASSERT_EQ(tables[0].rows.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(tables[0].rows[k].correct.mean, expected[k].correct.mean);
    EXPECT_EQ(tables[0].rows[k].wrong.mean, expected[k].wrong.mean);
  }
  // Row IoU at the configured threshold equals the t = 0.1 recomputation.
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    EXPECT_EQ(run.records[i].iou, metrics::Iou(run.maps[i].voice, run.maps[i].explanation, 0.1));
  }
}

TEST_F(ProtocolTest, ReportCollectsAvailableTables) {
  const ExperimentConfig c = Config("report");
  WriteRunOutputs(RunCleanProtocol(model_, data_, c), c);
  const std::string report = WriteReport(c.out);
  EXPECT_NE(report.find("gradcam"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.out) / "report.md"));
  EXPECT_EQ(CodeOf([&] { WriteReport(testing::TempDir("report_empty")); }),
            ErrorCode::kPrecondition);
}

// ---- Overlay ---------------------------------------------------------------

TEST(OverlayTest, BlendMatchesHandArithmetic) {
  net::ImageTensor img(2, 2, 3, 0.4f);
  net::Map2D u(2, 2);
  u.values = {0.0, 0.5, 1.0, 0.25};
  const Raster8 out = BlendHeat(img, u);
  // jet(0.5) = (.5, 1, .5), jet(1) = (.5, 0, 0), jet(.25) = (0, .5, 1).
  const std::vector<std::uint8_t> expected = {102, 102, 102, 108, 140, 108,
                                              115, 51,  51,  89,  105, 121};
  EXPECT_EQ(out.data, expected);
}

TEST(OverlayTest, ZeroMapShowsBareImage) {
  const net::ImageTensor img = testing::RandomImage(8, 8, 3);
  EXPECT_EQ(BlendHeat(img, net::Map2D(8, 8)).data, net::ToRaster(img).data);
}

TEST(OverlayTest, PanelsAreDeterministic) {
  const auto dir = testing::TempDir("overlay");
  const net::ImageTensor img = testing::RandomImage(8, 8, 4);
  Rng rng(2);
  const net::Map2D m = testing::RandomMap(8, 8, rng);
  const net::Map2D u = testing::RandomMap(8, 8, rng);
  const Raster8 panels = ComposePanels(img, m, u, 2);
  EXPECT_EQ(panels.height, 16);
  EXPECT_EQ(panels.width, 3 * 16 + 2 * kPanelGap);
  RenderOverlay(dir / "a.png", img, m, u, 2);
  RenderOverlay(dir / "b.png", img, m, u, 2);
  EXPECT_EQ(Sha256File(dir / "a.png"), Sha256File(dir / "b.png"));
}

}  // namespace
}  // namespace voice::harness
