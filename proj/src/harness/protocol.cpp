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

#include "voice/harness/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

#include "voice/common/error.hpp"
#include "voice/common/hash.hpp"
#include "voice/common/random.hpp"
#include "voice/explainers/explainers.hpp"
#include "voice/harness/overlay.hpp"
#include "voice/perturb/perturb.hpp"
#include "voice/uncertainty/voice.hpp"

namespace voice::harness {
namespace {

using nlohmann::json;

constexpr double kMaxSkipFraction = 0.10;
constexpr std::uint64_t kSampleStream = 0x5A4D504C;  // distinct RNG stream for sampling

struct WorkItem {
  std::size_t seed_index;
  std::size_t level_index;
  std::size_t image_index;
  std::size_t sample_position;
};

struct ItemOutput {
  std::vector<metrics::MetricRecord> records;
  std::vector<std::string> keys;
  std::vector<RetainedMaps> maps;
  std::optional<SkipEntry> skip;
  int hits = 0;
  int misses = 0;
};

bool IsPerImageError(ErrorCode code) {
  return code == ErrorCode::kNonFinite || code == ErrorCode::kShapeMismatch ||
         code == ErrorCode::kInvalidArgument;
}

std::string SafeFileStem(std::string text) {
  for (char& c : text) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return text;
}

json OptionalJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json MeanJson(const metrics::MeanStat& s) {
  return {{"mean", OptionalJson(s.mean)}, {"count", s.count}};
}

json SplitJson(const metrics::SplitMeans& s) {
  return {{"all", MeanJson(s.all)},
          {"correct", MeanJson(s.correct)},
          {"wrong", MeanJson(s.wrong)},
          {"undefined", s.undefined},
          {"percent_difference", OptionalJson(s.percent_difference)}};
}

std::string ChallengeName(const ExperimentConfig& config) {
  return config.challenge == "none" ? "clean" : config.challenge;
}

class Runner {
 public:
  Runner(const net::Model& model, const net::Dataset& data, const ExperimentConfig& config,
         const RunOptions& options)
      : model_(model), data_(data), config_(config), options_(options),
        cache_(config.CacheDir()) {}

  RunResult Run();

 private:
  ItemOutput Process(net::Model& replica, const WorkItem& item) const;
  void Worker(std::vector<ItemOutput>& outputs);

  const net::Model& model_;
  const net::Dataset& data_;
  const ExperimentConfig& config_;
  const RunOptions& options_;
  MapCache cache_;
  std::string layer_;
  std::string checksum_;
  std::vector<WorkItem> items_;
  std::atomic<std::size_t> next_{0};
  std::atomic<std::size_t> done_{0};
  std::mutex mu_;
  std::exception_ptr failure_;
};

ItemOutput Runner::Process(net::Model& replica, const WorkItem& item) const {
  ItemOutput out;
  const net::ImageTensor& x = data_.images[item.image_index];
  const int label = data_.labels[item.image_index];
  const std::uint64_t seed = config_.seeds[item.seed_index];
  const int level = config_.levels[item.level_index];
  const bool clean = config_.challenge == "none";

  perturb::ChallengeSpec spec;
  if (!clean) {
    spec.kind = perturb::ParseChallengeKind(config_.challenge);
    spec.level = level;
    spec.seed = seed;
    spec.ifgsm_eps_per_level = config_.ifgsm_eps;
    spec.ifgsm_steps = config_.ifgsm_steps;
  }
  const std::string challenge_key = clean ? "clean" : spec.Key();

  explainers::ExplainerOptions eo;
  eo.layer = layer_;
  eo.smoothgrad_samples = config_.smoothgrad_samples;
  eo.smoothgrad_sigma = config_.smoothgrad_sigma;
  eo.seed = seed;

  std::optional<net::ImageTensor> challenged;
  auto input = [&]() -> const net::ImageTensor& {
    if (!challenged) {
      challenged = clean ? x : perturb::ApplyChallenge(x, spec, &replica);
    }
    return *challenged;
  };

  for (const std::string& name : config_.explainers) {
    const auto explainer = explainers::MakeExplainer(name, eo);
    CacheKey key{checksum_,          x.source_id,         challenge_key, explainer->ConfigKey(),
                 explainer->layer(), config_.p_t,         seed};
    const std::string digest = key.Digest();
    std::optional<CacheEntry> entry = cache_.Load(digest);
    if (entry) {
      ++out.hits;
    } else {
      ++out.misses;
      entry = EntryFromResult(uncertainty::ComputeVoice(replica, input(), *explainer, config_.p_t));
      cache_.Store(digest, *entry);
    }

    metrics::MetricRecord r;
    r.source_id = x.source_id;
    r.method = name;
    r.challenge = ChallengeName(config_);
    r.level = clean ? 0 : level;
    r.seed = seed;
    r.predicted = entry->record.predicted;
    r.label = label;
    r.correct = r.predicted == label;
    r.r_used = entry->voice.r_used;
    r.threshold_t = config_.iou_t;
    r.iou = metrics::Iou(entry->voice.values, entry->explanation.values, config_.iou_t);
    r.snr = metrics::Snr(entry->voice.values);
    net::PredictionRecord labeled = entry->record;
    labeled.label = label;
    r.nll = metrics::Nll(labeled);
    out.records.push_back(r);
    out.keys.push_back(digest);

    if (item.seed_index == 0 && item.sample_position < static_cast<std::size_t>(config_.overlays)) {
      const std::string stem = SafeFileStem(x.source_id + "_" + challenge_key + "_" + name);
      RenderOverlay(std::filesystem::path(config_.out) / "overlays" / (stem + ".png"),
                    input(), entry->explanation.values,
                    entry->voice.values, config_.overlay_scale);
    }
    if (options_.retain_maps) {
      out.maps.push_back({entry->explanation.values, entry->voice.values});
    }
  }
  return out;
}

void Runner::Worker(std::vector<ItemOutput>& outputs) {
  net::Model replica = model_;
  for (;;) {
    const std::size_t i = next_.fetch_add(1);
    if (i >= items_.size()) return;
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (failure_) return;
    }
    try {
      outputs[i] = Process(replica, items_[i]);
    } catch (const Error& e) {
      if (!IsPerImageError(e.code())) {
        std::lock_guard<std::mutex> lock(mu_);
        if (!failure_) failure_ = std::current_exception();
        return;
      }
      outputs[i] = ItemOutput{};
      outputs[i].skip = SkipEntry{data_.images[items_[i].image_index].source_id, e.what()};
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!failure_) failure_ = std::current_exception();
      return;
    }
    const std::size_t done = done_.fetch_add(1) + 1;
    if (options_.progress) {
      std::lock_guard<std::mutex> lock(mu_);
      options_.progress(done, items_.size());
    }
  }
}

RunResult Runner::Run() {
  const auto start = std::chrono::steady_clock::now();
  if (data_.size() == 0) throw Error(ErrorCode::kPrecondition, "dataset is empty");
  if (data_.num_classes != model_.num_classes()) {
    throw Error(ErrorCode::kClassCountMismatch,
                "dataset has " + std::to_string(data_.num_classes) + " classes, model has " +
                    std::to_string(model_.num_classes()));
  }
  const std::size_t attempted_files = data_.size() + data_.skipped.size();
  if (static_cast<double>(data_.skipped.size()) > kMaxSkipFraction * attempted_files) {
    throw Error(ErrorCode::kPrecondition,
                std::to_string(data_.skipped.size()) + " of " + std::to_string(attempted_files) +
                    " images could not be read (limit 10%)");
  }

  layer_ = config_.layer.empty() ? model_.default_explain_layer() : config_.layer;
  const auto explainable = model_.explainable_layers();
  if (std::find(explainable.begin(), explainable.end(), layer_) == explainable.end()) {
    model_.network().LayerIndex(layer_);  // throws kUnknownLayer for unknown names
    throw Error(ErrorCode::kInvalidConfig, "layer '" + layer_ + "' has no spatial extent");
  }
  for (const std::string& name : config_.explainers) explainers::ParseMethod(name);
  checksum_ = model_.weight_checksum();

  for (std::size_t s = 0; s < config_.seeds.size(); ++s) {
    const auto sample = SampleIndices(data_.size(), config_.samples, config_.seeds[s]);
    for (std::size_t l = 0; l < config_.levels.size(); ++l) {
      for (std::size_t k = 0; k < sample.size(); ++k) items_.push_back({s, l, sample[k], k});
    }
  }

  const std::uint64_t passes_before = net::BackwardPassCount();
  std::vector<ItemOutput> outputs(items_.size());
  const int workers =
      std::min<int>(config_.ResolvedWorkers(), static_cast<int>(std::max<std::size_t>(1, items_.size())));
  if (workers <= 1) {
    Worker(outputs);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back([&] { Worker(outputs); });
    for (std::thread& t : threads) t.join();
  }
  if (failure_) std::rethrow_exception(failure_);

  RunResult result;
  result.weight_checksum = checksum_;
  result.layer = layer_;
  result.dataset_skipped = static_cast<int>(data_.skipped.size());
  for (const std::string& f : data_.skipped) result.skipped.push_back({f, "unreadable image"});
  std::size_t skipped_items = 0;
  for (ItemOutput& o : outputs) {
    if (o.skip) {
      ++skipped_items;
      result.skipped.push_back(*o.skip);
      continue;
    }
    result.cache_hits += o.hits;
    result.cache_misses += o.misses;
    for (std::size_t i = 0; i < o.records.size(); ++i) {
      result.records.push_back(std::move(o.records[i]));
      result.cache_keys.push_back(std::move(o.keys[i]));
    }
    for (RetainedMaps& m : o.maps) result.maps.push_back(std::move(m));
  }
  if (static_cast<double>(skipped_items) > kMaxSkipFraction * items_.size()) {
    throw Error(ErrorCode::kPrecondition,
                std::to_string(skipped_items) + " of " + std::to_string(items_.size()) +
                    " images were skipped (limit 10%); first: " + result.skipped.back().reason);
  }
  result.backward_passes = net::BackwardPassCount() - passes_before;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// Groups records by (challenge, level, method) preserving first appearance.
using GroupKey = std::tuple<std::string, int, std::string>;

std::vector<std::pair<GroupKey, std::vector<metrics::MetricRecord>>> GroupRecords(
    const std::vector<metrics::MetricRecord>& records) {
  std::vector<std::pair<GroupKey, std::vector<metrics::MetricRecord>>> groups;
  std::map<GroupKey, std::size_t> index;
  for (const metrics::MetricRecord& r : records) {
    const GroupKey key{r.challenge, r.level, r.method};
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({key, {}});
    groups[it->second].second.push_back(r);
  }
  return groups;
}

}  // namespace

net::Dataset LoadConfiguredDataset(const ExperimentConfig& config) {
  std::optional<net::DatasetFormat> format;
  if (config.data_format != "auto") format = net::ParseDatasetFormat(config.data_format);
  const net::Split split = config.split == "train" ? net::Split::kTrain : net::Split::kTest;
  return net::LoadDataset(config.data, format, split);
}

std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t count, std::uint64_t seed) {
  count = std::min(count, n);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(MixSeed(seed, kSampleStream));
  // Partial Fisher-Yates: the first `count` slots are the sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

RunResult RunProtocol(const net::Model& model, const net::Dataset& data,
                      const ExperimentConfig& config, const RunOptions& options) {
  config.Validate(false, false);
  Runner runner(model, data, config, options);
  return runner.Run();
}

RunResult RunCleanProtocol(const net::Model& model, const net::Dataset& data,
                           const ExperimentConfig& config, const RunOptions& options) {
  ExperimentConfig clean = config;
  clean.challenge = "none";
  clean.levels = {0};
  return RunProtocol(model, data, clean, options);
}

RunResult RunChallengeProtocol(const net::Model& model, const net::Dataset& data,
                               const ExperimentConfig& config, const RunOptions& options) {
  if (config.challenge == "none") {
    throw Error(ErrorCode::kPrecondition, "challenge protocol needs a challenge");
  }
  if (config.levels.size() < 2) {
    throw Error(ErrorCode::kPrecondition,
                "challenge protocol needs at least two levels to form curves with an AUC");
  }
  return RunProtocol(model, data, config, options);
}

json SummaryJson(const RunResult& run, const ExperimentConfig& config) {
  json groups = json::array();
  for (const auto& [key, records] : GroupRecords(run.records)) {
    const metrics::Aggregate a = metrics::AggregateRecords(records);
    groups.push_back({{"challenge", std::get<0>(key)},
                      {"level", std::get<1>(key)},
                      {"method", std::get<2>(key)},
                      {"n", a.n},
                      {"n_correct", a.n_correct},
                      {"n_wrong", a.n_wrong},
                      {"accuracy", OptionalJson(a.accuracy)},
                      {"iou", SplitJson(a.iou)},
                      {"snr", SplitJson(a.snr)},
                      {"nll", SplitJson(a.nll)}});
  }
  return {{"config_hash", config.Hash()},
          {"weight_checksum", run.weight_checksum},
          {"layer", run.layer},
          {"iou_t", config.iou_t},
          {"pt", config.p_t},
          {"groups", groups},
          {"skipped", run.skipped.size()}};
}

CurveSet BuildCurves(const RunResult& run, const ExperimentConfig& config) {
  CurveSet set;
  const std::string challenge = ChallengeName(config);
  const std::vector<std::string> metric_names = {"accuracy", "iou", "snr", "nll"};
  for (const std::string& method : config.explainers) {
    for (const std::string& metric : metric_names) {
      std::vector<double> raw;
      std::vector<double> spread;
      bool complete = true;
      for (int level : config.levels) {
        std::vector<double> per_seed;
        for (std::uint64_t seed : config.seeds) {
          std::vector<metrics::MetricRecord> subset;
          for (const metrics::MetricRecord& r : run.records) {
            if (r.method == method && r.level == level && r.seed == seed) subset.push_back(r);
          }
          if (subset.empty()) continue;
          const metrics::Aggregate a = metrics::AggregateRecords(subset);
          std::optional<double> v;
          if (metric == "accuracy") v = a.accuracy;
          if (metric == "iou") v = a.iou.all.mean;
          if (metric == "snr") v = a.snr.all.mean;
          if (metric == "nll") v = a.nll.all.mean;
          if (v) per_seed.push_back(*v);
        }
        if (per_seed.empty()) {
          complete = false;
          break;
        }
        const double mean =
            std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / per_seed.size();
        double var = 0.0;
        for (double v : per_seed) var += (v - mean) * (v - mean);
        raw.push_back(mean);
        spread.push_back(var / per_seed.size());
      }
      if (!complete) continue;
      set.curves.push_back(
          metrics::MakeCurve(challenge, method, metric, config.levels, raw, spread));
      if ((metric == "iou" || metric == "snr") && config.levels.size() >= 2) {
        set.aucs.push_back(metrics::AucCurve(set.curves.back()));
      }
    }
  }
  return set;
}

json CurvesJson(const CurveSet& curves, const RunResult& run) {
  json arr = json::array();
  for (const metrics::ChallengeCurve& c : curves.curves) {
    // Correct/wrong split means per level, pooled over seeds.
    json correct = json::array();
    json wrong = json::array();
    if (c.metric != "accuracy") {
      for (int level : c.levels) {
        std::vector<metrics::MetricRecord> subset;
        for (const metrics::MetricRecord& r : run.records) {
          if (r.method == c.method && r.level == level) subset.push_back(r);
        }
        const metrics::Aggregate a = metrics::AggregateRecords(subset);
        const metrics::SplitMeans& s =
            c.metric == "iou" ? a.iou : (c.metric == "snr" ? a.snr : a.nll);
        correct.push_back(OptionalJson(s.correct.mean));
        wrong.push_back(OptionalJson(s.wrong.mean));
      }
    }
    arr.push_back({{"challenge", c.challenge},
                   {"method", c.method},
                   {"metric", c.metric},
                   {"levels", c.levels},
                   {"mean", c.raw},
                   {"variance_across_seeds", c.spread},
                   {"normalized", c.normalized.values},
                   {"normalization", {{"scheme", "per-curve min-max"},
                                      {"lo", c.normalized.lo},
                                      {"hi", c.normalized.hi},
                                      {"constant", c.normalized.constant}}},
                   {"correct_mean", correct},
                   {"wrong_mean", wrong}});
  }
  json table = json::array();
  for (const metrics::AucResult& a : curves.aucs) {
    table.push_back({{"challenge", a.challenge},
                     {"method", a.method},
                     {"metric", a.metric},
                     {"auc", a.auc}});
  }
  return {{"curves", arr}, {"auc", table}};
}

std::vector<SweepTable> SweepByMethod(const RunResult& run, const std::vector<double>& t_values) {
  if (run.maps.size() != run.records.size()) {
    throw Error(ErrorCode::kPrecondition, "threshold sweep needs retained maps");
  }
  std::vector<SweepTable> tables;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const std::string& method = run.records[i].method;
    if (std::none_of(tables.begin(), tables.end(),
                     [&](const SweepTable& t) { return t.method == method; })) {
      tables.push_back({method, {}});
    }
  }
  for (SweepTable& table : tables) {
    std::vector<metrics::MapPair> pairs;
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      if (run.records[i].method != table.method) continue;
      pairs.push_back({&run.maps[i].voice, &run.maps[i].explanation, run.records[i].correct});
    }
    table.rows = metrics::ThresholdSweep(pairs, t_values);
  }
  return tables;
}

json SweepJson(const std::vector<SweepTable>& tables) {
  json out = json::array();
  for (const SweepTable& t : tables) {
    json rows = json::array();
    for (const metrics::SweepRow& r : t.rows) {
      rows.push_back({{"t", r.t},
                      {"iou_correct", MeanJson(r.correct)},
                      {"iou_wrong", MeanJson(r.wrong)},
                      {"percent_difference", OptionalJson(r.percent_difference)}});
    }
    out.push_back({{"method", t.method}, {"rows", rows}});
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void WriteMetricsCsv(const std::filesystem::path& path, const RunResult& run) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << kMetricsCsvHeader << "\n";
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const metrics::MetricRecord& r = run.records[i];
    out << r.source_id << ',' << r.challenge << ',' << r.level << ',' << r.seed << ','
        << r.method << ',' << r.predicted << ',' << r.label << ',' << (r.correct ? 1 : 0) << ','
        << r.r_used << ',' << FormatDouble(r.iou) << ',' << (r.snr ? FormatDouble(*r.snr) : "")
        << ',' << (r.nll ? FormatDouble(*r.nll) : "") << ','
        << (i < run.cache_keys.size() ? run.cache_keys[i] : "") << "\n";
  }
}

void WriteJson(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json WriteRunOutputs(const RunResult& run, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir = config.out;
  fs::create_directories(dir);
  json files = json::object();
  WriteMetricsCsv(dir / "metrics.csv", run);
  files["metrics.csv"] = "sha256:" + Sha256File(dir / "metrics.csv");
  WriteJson(dir / "summary.json", SummaryJson(run, config));
  files["summary.json"] = "sha256:" + Sha256File(dir / "summary.json");
  if (config.levels.size() >= 2 && config.challenge != "none") {
    WriteJson(dir / "curves.json", CurvesJson(BuildCurves(run, config), run));
    files["curves.json"] = "sha256:" + Sha256File(dir / "curves.json");
  }
  json skipped = json::array();
  for (const SkipEntry& s : run.skipped) {
    skipped.push_back({{"source_id", s.source_id}, {"reason", s.reason}});
  }
  const json manifest = {
      {"tool_version", kToolVersion},
      {"config", config.ToJson()},
      {"config_hash", config.Hash()},
      {"weight_checksum", run.weight_checksum},
      {"layer", run.layer},
      {"records", run.records.size()},
      {"skipped", skipped},
      {"cache", {{"dir", config.CacheDir().string()},
                 {"hits", run.cache_hits},
                 {"misses", run.cache_misses}}},
      {"backward_passes", run.backward_passes},
      {"wall_clock_seconds", run.wall_seconds},
      {"files", files},
  };
  WriteJson(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace voice::harness
