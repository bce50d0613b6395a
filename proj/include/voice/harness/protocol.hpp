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

// Experiment protocols: the correct/wrong split on clean images and the
// metric-versus-challenge-level curves.

#ifndef VOICE_HARNESS_PROTOCOL_HPP_
#define VOICE_HARNESS_PROTOCOL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "voice/harness/cache.hpp"
#include "voice/harness/config.hpp"
#include "voice/metrics/metrics.hpp"
#include "voice/netcore/dataset.hpp"
#include "voice/netcore/model.hpp"

namespace voice::harness {

// Loads config.data with config.data_format and config.split.
net::Dataset LoadConfiguredDataset(const ExperimentConfig& config);

// Seeded uniform sample of min(count, n) distinct indices in draw order.
std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t count, std::uint64_t seed);

struct SkipEntry {
  std::string source_id;
  std::string reason;
};

// Maps kept for threshold sweeps; parallel to RunResult::records.
struct RetainedMaps {
  net::Map2D explanation;
  net::Map2D voice;
};

struct RunResult {
  std::vector<metrics::MetricRecord> records;
  std::vector<std::string> cache_keys;  // parallel to records
  std::vector<RetainedMaps> maps;       // empty unless requested
  std::vector<SkipEntry> skipped;
  int dataset_skipped = 0;
  std::uint64_t backward_passes = 0;
  int cache_hits = 0;
  int cache_misses = 0;
  double wall_seconds = 0.0;
  std::string weight_checksum;
  std::string layer;
};

struct RunOptions {
  bool retain_maps = false;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// Samples config.samples images per seed and, for every level and explainer,
// computes the explanation and its VOICE map (through the cache) and one
// MetricRecord. Rows are ordered by seed, level, sample, explainer.
// Aborts when more than 10% of the attempted images had to be skipped.
RunResult RunProtocol(const net::Model& model, const net::Dataset& data,
                      const ExperimentConfig& config, const RunOptions& options = {});

// Clean images only (challenge and levels are ignored).
RunResult RunCleanProtocol(const net::Model& model, const net::Dataset& data,
                           const ExperimentConfig& config, const RunOptions& options = {});

// Requires a challenge and at least two levels, so every curve has an AUC.
RunResult RunChallengeProtocol(const net::Model& model, const net::Dataset& data,
                               const ExperimentConfig& config, const RunOptions& options = {});

// ---- Aggregation -----------------------------------------------------------

// Table-I-style aggregates per (challenge, level, method), over all seeds.
nlohmann::json SummaryJson(const RunResult& run, const ExperimentConfig& config);

struct CurveSet {
  std::vector<metrics::ChallengeCurve> curves;  // accuracy, iou, snr, nll per method
  std::vector<metrics::AucResult> aucs;         // iou and snr per method
};

// Per-level means (over seeds of per-seed means) and across-seed variance.
CurveSet BuildCurves(const RunResult& run, const ExperimentConfig& config);
nlohmann::json CurvesJson(const CurveSet& curves, const RunResult& run);

struct SweepTable {
  std::string method;
  std::vector<metrics::SweepRow> rows;
};
// Needs run.maps (RunOptions::retain_maps).
std::vector<SweepTable> SweepByMethod(const RunResult& run, const std::vector<double>& t_values);
nlohmann::json SweepJson(const std::vector<SweepTable>& tables);

// ---- Output ----------------------------------------------------------------

// Shortest round-trip decimal rendering.
std::string FormatDouble(double v);

inline constexpr char kMetricsCsvHeader[] =
    "source_id,challenge,level,seed,method,predicted,label,correct,r_used,iou,snr,nll,cache_key";

void WriteMetricsCsv(const std::filesystem::path& path, const RunResult& run);
void WriteJson(const std::filesystem::path& path, const nlohmann::json& j);

// Writes metrics.csv, summary.json, curves.json (challenge runs) and
// manifest.json into config.out; returns the manifest.
nlohmann::json WriteRunOutputs(const RunResult& run, const ExperimentConfig& config);

}  // namespace voice::harness

#endif  // VOICE_HARNESS_PROTOCOL_HPP_
