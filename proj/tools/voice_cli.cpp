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

// `voice` command-line tool. Every failure prints
//   {"error": {"code": "...", "message": "..."}}
// on stderr and exits with status 1 (2 for bad command-line syntax).

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "voice/common/error.hpp"
#include "voice/common/image_io.hpp"
#include "voice/explainers/explainers.hpp"
#include "voice/harness/config.hpp"
#include "voice/harness/overlay.hpp"
#include "voice/harness/protocol.hpp"
#include "voice/harness/report.hpp"
#include "voice/metrics/metrics.hpp"
#include "voice/netcore/dataset.hpp"
#include "voice/netcore/synthetic.hpp"
#include "voice/netcore/train.hpp"
#include "voice/netcore/weights.hpp"
#include "voice/uncertainty/voice.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using voice::harness::ExperimentConfig;

// Flags shared by the config-driven subcommands. Only flags given on the
// command line override the config file.
struct ConfigFlags {
  std::string config;
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;

  void Register(CLI::App* app) {
    app->add_option("--config", config, "flat key = value config file");
    const std::pair<const char*, const char*> flags[] = {
        {"weights", "weight file"},
        {"data", "dataset directory"},
        {"explainers", "comma list: gradcam,gradcampp,guided_backprop,smoothgrad"},
        {"pt", "contrast-class probability threshold"},
        {"iou-t", "IoU binarization threshold"},
        {"challenge", "none|awgn|gaussian_blur|contrast|jpeg|ifgsm"},
        {"levels", "challenge levels, e.g. 0-5"},
        {"seeds", "comma list of seeds"},
        {"out", "output directory"},
        {"workers", "worker threads (0 = all cores)"},
        {"layer", "layer for CAM methods"},
        {"samples", "images per seed"},
    };
    for (const auto& [name, help] : flags) {
      app->add_option(std::string("--") + name, values[name], help);
    }
    app->add_option("--set", sets, "extra key=value override (repeatable)");
  }

  ExperimentConfig Load(CLI::App* app) const {
    std::map<std::string, std::string> overrides;
    for (const auto& [name, value] : values) {
      if (app->count(std::string("--") + name) > 0) overrides[name] = value;
    }
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw voice::Error(voice::ErrorCode::kInvalidConfig, "--set expects key=value");
      }
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    // Flag spellings map onto config keys.
    if (auto it = overrides.find("iou-t"); it != overrides.end()) {
      overrides["iou_t"] = it->second;
      overrides.erase(it);
    }
    std::optional<fs::path> file;
    if (!config.empty()) file = config;
    return voice::harness::LoadConfig(file, overrides);
  }
};

void PrintJson(const json& j) { std::cout << j.dump(2) << std::endl; }

void Progress(std::size_t done, std::size_t total) {
  if (done == total || done % 50 == 0) {
    std::fprintf(stderr, "\r%zu/%zu images", done, total);
    if (done == total) std::fprintf(stderr, "\n");
  }
}

json RecordJson(const voice::net::PredictionRecord& r) {
  json j = {{"predicted", r.predicted}, {"probs", r.probs}};
  if (r.label) j["label"] = *r.label;
  if (r.correct) j["correct"] = *r.correct;
  return j;
}

// The image for explain/voice: --image FILE, else --index into the dataset.
voice::net::ImageTensor SelectImage(const ExperimentConfig& config, const std::string& image,
                                    int index, std::optional<int>* label) {
  if (!image.empty()) {
    return voice::net::FromRaster(voice::ReadImageFile(image), fs::path(image).filename().string());
  }
  config.Validate(true, true);
  const voice::net::Dataset data = voice::harness::LoadConfiguredDataset(config);
  if (index < 0 || static_cast<std::size_t>(index) >= data.size()) {
    throw voice::Error(voice::ErrorCode::kInvalidArgument, "--index out of range");
  }
  *label = data.labels[index];
  return data.images[index];
}

std::string Stem(const std::string& text) {
  std::string s = text;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s;
}

int RunExplain(const ExperimentConfig& config, const std::string& image, int index,
               bool with_voice) {
  if (config.weights.empty() || !fs::exists(config.weights)) {
    throw voice::Error(voice::ErrorCode::kInvalidConfig, "weights not found: '" + config.weights + "'");
  }
  config.Validate(false, false);
  voice::net::Model model = voice::net::LoadWeights(config.weights);
  std::optional<int> label;
  const voice::net::ImageTensor x = SelectImage(config, image, index, &label);
  const fs::path out = config.out;
  fs::create_directories(out);

  voice::explainers::ExplainerOptions eo;
  eo.layer = config.layer.empty() ? model.default_explain_layer() : config.layer;
  eo.smoothgrad_samples = config.smoothgrad_samples;
  eo.smoothgrad_sigma = config.smoothgrad_sigma;
  eo.seed = config.seeds.front();

  voice::net::PredictionRecord record = model.Forward(x, label);
  json result = {{"source_id", x.source_id}, {"prediction", RecordJson(record)},
                 {"layer", eo.layer}, {"maps", json::array()}};
  for (const std::string& name : config.explainers) {
    const auto explainer = voice::explainers::MakeExplainer(name, eo);
    const std::string stem = Stem(x.source_id) + "_" + name;
    json entry = {{"method", name}};
    if (!with_voice) {
      const auto m = explainer->Explain(model, x, voice::net::BackpropTarget::Logit(record.predicted));
      voice::explainers::SaveExplanation(out / (stem + "_explanation"), m);
      voice::harness::RenderOverlay(out / (stem + "_overlay.png"), x, m.values,
                                    voice::net::Map2D(x.height, x.width), config.overlay_scale);
      entry["explanation"] = (out / (stem + "_explanation.png")).string();
    } else {
      const auto v = voice::uncertainty::ComputeVoice(model, x, *explainer, config.p_t);
      voice::explainers::SaveExplanation(out / (stem + "_explanation"), v.explanation);
      voice::uncertainty::SaveVoiceMap(out / (stem + "_voice"), v.voice);
      for (std::size_t k = 0; k < v.stack.maps.size(); ++k) {
        voice::explainers::WriteMapPng16(
            out / (stem + "_contrast_" + std::to_string(v.stack.contrast_classes[k])),
            v.stack.maps[k],
            {{"kind", "contrastive"},
             {"method", name},
             {"target", "loss(" + std::to_string(record.predicted) + "," +
                            std::to_string(v.stack.contrast_classes[k]) + ")"}});
      }
      voice::harness::RenderOverlay(out / (stem + "_overlay.png"), x, v.explanation.values,
                                    v.voice.values, config.overlay_scale);
      entry["explanation"] = (out / (stem + "_explanation.png")).string();
      entry["voice"] = (out / (stem + "_voice.png")).string();
      entry["contrast_classes"] = v.contrast_set.classes;
      entry["r_used"] = v.voice.r_used;
      entry["iou"] = voice::metrics::Iou(v.voice.values, v.explanation.values, config.iou_t);
      const auto snr = voice::metrics::Snr(v.voice.values);
      entry["snr"] = snr ? json(*snr) : json(nullptr);
    }
    entry["overlay"] = (out / (stem + "_overlay.png")).string();
    result["maps"].push_back(entry);
  }
  PrintJson(result);
  return 0;
}

struct LoadedRun {
  voice::net::Model model;
  voice::net::Dataset data;
};

LoadedRun LoadForRun(const ExperimentConfig& config) {
  config.Validate(true, true);
  voice::net::Dataset data = voice::harness::LoadConfiguredDataset(config);
  voice::net::Model model = voice::net::LoadWeights(config.weights, data.num_classes);
  return {std::move(model), std::move(data)};
}

int RunEvaluate(const ExperimentConfig& config) {
  LoadedRun loaded = LoadForRun(config);
  voice::harness::RunOptions options;
  options.progress = Progress;
  const auto run =
      config.challenge == "none"
          ? voice::harness::RunCleanProtocol(loaded.model, loaded.data, config, options)
          : voice::harness::RunChallengeProtocol(loaded.model, loaded.data, config, options);
  const json manifest = voice::harness::WriteRunOutputs(run, config);
  PrintJson({{"out", config.out},
             {"records", run.records.size()},
             {"skipped", run.skipped.size()},
             {"backward_passes", run.backward_passes},
             {"config_hash", manifest.at("config_hash")}});
  return 0;
}

int RunSweep(ExperimentConfig config, const std::string& t_values) {
  if (!t_values.empty()) config.sweep_t = voice::harness::ParseDoubleList(t_values);
  config.Validate(true, true);
  LoadedRun loaded = LoadForRun(config);
  voice::harness::RunOptions options;
  options.retain_maps = true;
  options.progress = Progress;
  const auto run = voice::harness::RunCleanProtocol(loaded.model, loaded.data, config, options);
  voice::harness::ExperimentConfig clean = config;
  clean.challenge = "none";
  clean.levels = {0};
  voice::harness::WriteRunOutputs(run, clean);
  const json sweep = voice::harness::SweepJson(voice::harness::SweepByMethod(run, config.sweep_t));
  voice::harness::WriteJson(fs::path(config.out) / "sweep.json", sweep);
  PrintJson(sweep);
  return 0;
}

int RunTrain(const std::string& data_dir, const std::string& out, voice::net::TrainConfig tc,
             int limit) {
  voice::net::Dataset train =
      voice::net::LoadDataset(data_dir, std::nullopt, voice::net::Split::kTrain);
  if (limit > 0 && static_cast<std::size_t>(limit) < train.size()) {
    train.images.resize(limit);
    train.labels.resize(limit);
  }
  voice::net::Model model = voice::net::TrainReferenceModel(train, tc, [](const auto& s) {
    std::fprintf(stderr, "epoch %d loss %.4f train_acc %.4f (%.1fs)\n", s.epoch, s.mean_loss,
                 s.train_accuracy, s.seconds);
  });
  voice::net::SaveWeights(model, out);
  json result = {{"weights", out}, {"checksum", model.weight_checksum()},
                 {"train_images", train.size()}};
  try {
    voice::net::Dataset test =
        voice::net::LoadDataset(data_dir, std::nullopt, voice::net::Split::kTest);
    result["test_accuracy"] = voice::net::EvaluateAccuracy(model, test);
  } catch (const voice::Error&) {
    // No test split (image folders); training still succeeded.
  }
  PrintJson(result);
  return 0;
}

int Fail(std::string_view code, const std::string& message, int status = 1) {
  const json j = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VOICE: uncertainty maps for gradient-based explanations"};
  app.require_subcommand(1);

  auto* make = app.add_subcommand("make-dataset", "write the procedural CIFAR-layout dataset");
  std::string make_out;
  voice::net::SyntheticSpec spec;
  make->add_option("--out", make_out, "output directory")->required();
  make->add_option("--train", spec.train_count, "training images");
  make->add_option("--test", spec.test_count, "test images");
  make->add_option("--seed", spec.seed, "generator seed");

  auto* train = app.add_subcommand("train", "train the bundled CNN");
  std::string train_data;
  std::string train_out;
  int train_limit = 0;
  voice::net::TrainConfig tc;
  train->add_option("--data", train_data, "CIFAR-10 binary directory")->required();
  train->add_option("--out", train_out, "weight file to write")->required();
  train->add_option("--epochs", tc.epochs, "epochs");
  train->add_option("--batch", tc.batch_size, "batch size");
  train->add_option("--lr", tc.learning_rate, "peak learning rate");
  train->add_option("--seed", tc.seed, "initialization and shuffling seed");
  train->add_option("--limit", train_limit, "use only the first N training images");

  auto* explain = app.add_subcommand("explain", "explanation maps for one image");
  auto* voice_cmd = app.add_subcommand("voice", "explanation and VOICE maps for one image");
  ConfigFlags explain_flags;
  ConfigFlags voice_flags;
  std::string image;
  int index = 0;
  explain_flags.Register(explain);
  voice_flags.Register(voice_cmd);
  for (CLI::App* sub : {explain, voice_cmd}) {
    sub->add_option("--image", image, "PNG/JPEG file (instead of --data/--index)");
    sub->add_option("--index", index, "image index in the dataset");
  }

  auto* evaluate = app.add_subcommand("evaluate", "run the clean or challenge protocol");
  ConfigFlags evaluate_flags;
  evaluate_flags.Register(evaluate);

  auto* sweep = app.add_subcommand("sweep", "IoU threshold sweep on clean images");
  ConfigFlags sweep_flags;
  std::string t_values;
  sweep_flags.Register(sweep);
  sweep->add_option("--t", t_values, "comma list of thresholds");

  auto* report = app.add_subcommand("report", "markdown tables from a run directory");
  std::string report_dir;
  report->add_option("--out", report_dir, "run directory")->required();

  app.add_subcommand("schema", "list the config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail("invalid_arguments", e.what(), 2);
  }

  try {
    if (*make) {
      voice::net::WriteSyntheticCifar(make_out, spec);
      PrintJson({{"out", make_out}, {"train", spec.train_count}, {"test", spec.test_count}});
      return 0;
    }
    if (*train) return RunTrain(train_data, train_out, tc, train_limit);
    if (*explain) return RunExplain(explain_flags.Load(explain), image, index, false);
    if (*voice_cmd) return RunExplain(voice_flags.Load(voice_cmd), image, index, true);
    if (*evaluate) return RunEvaluate(evaluate_flags.Load(evaluate));
    if (*sweep) return RunSweep(sweep_flags.Load(sweep), t_values);
    if (*report) {
      std::cout << voice::harness::WriteReport(report_dir);
      return 0;
    }
    json keys = json::array();
    for (const auto& k : voice::harness::ConfigSchema()) {
      keys.push_back({{"key", k.name}, {"type", k.type}, {"help", k.help}});
    }
    PrintJson(keys);
    return 0;
  } catch (const voice::Error& e) {
    return Fail(voice::ErrorCodeName(e.code()), e.what());
  } catch (const std::exception& e) {
    return Fail("internal", e.what());
  }
}
