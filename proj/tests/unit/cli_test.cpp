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

// Drives the `voice` binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "testing/fixtures.hpp"
#include "voice/harness/config.hpp"
#include "voice/harness/protocol.hpp"
#include "voice/netcore/synthetic.hpp"
#include "voice/netcore/weights.hpp"

namespace voice {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::TempDir("cli"));
    net::WriteSyntheticCifar(*dir_ / "data", net::SyntheticSpec{64, 30, 5});
    net::SaveWeights(testing::MakeSmallModel(81), *dir_ / "small.bin");
  }
  static void TearDownTestSuite() { delete dir_; }

  static CommandResult Run(const std::string& args) {
    const fs::path out = *dir_ / "stdout.txt";
    const fs::path err = *dir_ / "stderr.txt";
    const std::string cmd = std::string(VOICE_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CommandResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(out);
    r.err = Slurp(err);
    return r;
  }

  static std::string Common(const std::string& out) {
    return "--weights " + (*dir_ / "small.bin").string() + " --data " +
           (*dir_ / "data").string() + " --pt 0.01 --workers 1 --out " + (*dir_ / out).string();
  }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, HelpListsSubcommands) {
  const CommandResult r = Run("--help");
  EXPECT_EQ(r.exit_code, 0);
  for (const char* sub : {"train", "explain", "voice", "evaluate", "sweep", "report"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(CliTest, EvaluateWritesOneRowPerImageAndExplainer) {
  const CommandResult r =
      Run("evaluate " + Common("eval") + " --samples 10 --explainers gradcam,gradcampp");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string csv = Slurp(*dir_ / "eval" / "metrics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 10 * 2);
  const json manifest = json::parse(Slurp(*dir_ / "eval" / "manifest.json"));
  EXPECT_EQ(manifest.at("records").get<int>(), 20);

  // Same config again: every map comes from the cache.
  const CommandResult again =
      Run("evaluate " + Common("eval") + " --samples 10 --explainers gradcam,gradcampp");
  ASSERT_EQ(again.exit_code, 0) << again.err;
  EXPECT_EQ(json::parse(again.out).at("backward_passes").get<int>(), 0);
  EXPECT_EQ(Slurp(*dir_ / "eval" / "metrics.csv"), csv);
}

TEST_F(CliTest, SweepReproducesLibrarySweep) {
  const CommandResult r = Run("sweep " + Common("sweep") + " --samples 8 --explainers gradcam --t 0.1,0.3,0.5");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json cli = json::parse(Slurp(*dir_ / "sweep" / "sweep.json"));

  harness::ExperimentConfig c;
  c.weights = (*dir_ / "small.bin").string();
  c.data = (*dir_ / "data").string();
  c.p_t = 0.01;
  c.samples = 8;
  c.explainers = {"gradcam"};
  c.cache = "off";
  net::Model model = net::LoadWeights(c.weights);
  harness::RunOptions opts;
  opts.retain_maps = true;
  const auto run = harness::RunCleanProtocol(model, harness::LoadConfiguredDataset(c), c, opts);
  std::vector<metrics::MapPair> pairs;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    pairs.push_back({&run.maps[i].voice, &run.maps[i].explanation, run.records[i].correct});
  }
  const std::vector<double> t = {0.1, 0.3, 0.5};
  const auto expected = metrics::ThresholdSweep(pairs, t);

  ASSERT_EQ(cli.size(), 1u);
  const json& rows = cli[0].at("rows");
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(rows[k].at("t").get<double>(), t[k]);
    const json& cm = rows[k].at("iou_correct").at("mean");
    const json& wm = rows[k].at("iou_wrong").at("mean");
    EXPECT_EQ(cm.is_null(), !expected[k].correct.mean.has_value());
    EXPECT_EQ(wm.is_null(), !expected[k].wrong.mean.has_value());
    if (!cm.is_null()) EXPECT_EQ(cm.get<double>(), *expected[k].correct.mean);
    if (!wm.is_null()) EXPECT_EQ(wm.get<double>(), *expected[k].wrong.mean);
  }
}

TEST_F(CliTest, VoiceWritesMapsForOneImage) {
  const CommandResult r = Run("voice " + Common("single") + " --index 3 --explainers gradcam");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  bool png = false;
  for (const auto& e : fs::recursive_directory_iterator(*dir_ / "single")) {
    png |= e.path().extension() == ".png";
  }
  EXPECT_TRUE(png);
}

TEST_F(CliTest, TrainReportsAccuracy) {
  const CommandResult r = Run("train --data " + (*dir_ / "data").string() + " --out " +
                              (*dir_ / "trained.bin").string() + " --epochs 1 --limit 32");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j.contains("test_accuracy"));
  EXPECT_TRUE(fs::exists(*dir_ / "trained.bin"));
}

TEST_F(CliTest, ErrorsAreMachineReadable) {
  const CommandResult r = Run("evaluate --weights /nonexistent.bin --data " +
                              (*dir_ / "data").string() + " --out " + (*dir_ / "err").string());
  EXPECT_EQ(r.exit_code, 1);
  const json j = json::parse(r.err.substr(r.err.find('{')));
  EXPECT_EQ(j.at("error").at("code").get<std::string>(), "invalid_config");

  const CommandResult unknown = Run("evaluate --set bogus=1 " + Common("err2"));
  EXPECT_EQ(unknown.exit_code, 1);
  EXPECT_NE(unknown.err.find("invalid_config"), std::string::npos);

  EXPECT_EQ(Run("evaluate --no-such-flag").exit_code, 2);
}

}  // namespace
}  // namespace voice
