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

#ifndef VOICE_METRICS_METRICS_HPP_
#define VOICE_METRICS_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voice/netcore/image.hpp"
#include "voice/netcore/model.hpp"

namespace voice::metrics {

inline constexpr double kDefaultIouThreshold = 0.1;
inline constexpr double kNllEpsilon = 1e-12;

// Threshold grid for the IoU sweep.
inline constexpr double kSweepThresholds[] = {0.1, 0.3, 0.4, 0.5, 0.6, 0.7};

// Binary support {v > t} of a [0,1] map.
std::vector<bool> Binarize(const net::Map2D& map, double t);

// |{u > t} and {m > t}| / |{u > t} or {m > t}|; 0 when the union is empty.
// Throws kShapeMismatch for different shapes, kInvalidArgument unless 0 < t < 1.
double Iou(const net::Map2D& u, const net::Map2D& m, double t);

// mean / population std of the map values; nullopt when std is zero.
std::optional<double> Snr(const net::Map2D& u);

// -log(probs[label] + 1e-12). Throws kPrecondition when the label is missing.
double Nll(const net::PredictionRecord& record);

// (wrong - correct) / correct * 100. Throws kInvalidArgument when correct == 0.
double PercentDifference(double correct_mean, double wrong_mean);

// One row per (image, explainer, challenge level, seed).
struct MetricRecord {
  std::string source_id;
  std::string method;
  std::string challenge = "clean";
  int level = 0;
  std::uint64_t seed = 0;
  int predicted = 0;
  int label = -1;
  bool correct = false;
  int r_used = 0;
  double threshold_t = kDefaultIouThreshold;
  double iou = 0.0;
  std::optional<double> snr;  // nullopt: undefined (constant map)
  std::optional<double> nll;
};

struct MeanStat {
  std::optional<double> mean;  // absent for an empty group
  int count = 0;
};

struct SplitMeans {
  MeanStat all;
  MeanStat correct;
  MeanStat wrong;
  int undefined = 0;  // rows excluded because the value was undefined
  // Defined when both split means exist and the correct mean is non-zero.
  std::optional<double> percent_difference;
};

struct Aggregate {
  int n = 0;
  int n_correct = 0;
  int n_wrong = 0;
  std::optional<double> accuracy;
  SplitMeans iou;
  SplitMeans snr;
  SplitMeans nll;
};

Aggregate AggregateRecords(std::span<const MetricRecord> records);

// Min-max normalization of a curve over its own range; a constant curve maps
// to zeros. Bounds are kept so the raw values can be recovered.
struct NormalizedSeries {
  std::vector<double> values;
  double lo = 0.0;
  double hi = 0.0;
  bool constant = false;
};
NormalizedSeries NormalizeSeries(std::span<const double> raw);

// A metric as a function of challenge level for one (challenge, explainer).
struct ChallengeCurve {
  std::string challenge;
  std::string method;
  std::string metric;
  std::vector<int> levels;    // strictly increasing
  std::vector<double> raw;    // mean per level
  std::vector<double> spread; // variance across seeds per level
  NormalizedSeries normalized;

  // Throws kInvalidArgument on unsorted levels or mismatched lengths.
  void Validate() const;
};

ChallengeCurve MakeCurve(std::string challenge, std::string method, std::string metric,
                         std::vector<int> levels, std::vector<double> raw,
                         std::vector<double> spread = {});

struct AucResult {
  std::string challenge;
  std::string method;
  std::string metric;
  double auc = 0.0;
};

// Trapezoid area under (x, y) with x = levels rescaled to [0,1]. `values`
// must already lie in [0,1]. Throws kPrecondition with fewer than two levels.
double TrapezoidAuc(std::span<const int> levels, std::span<const double> values);
AucResult AucCurve(const ChallengeCurve& curve);

// IoU re-evaluated over a threshold grid on retained map pairs.
struct MapPair {
  const net::Map2D* voice = nullptr;
  const net::Map2D* explanation = nullptr;
  bool correct = false;
};

struct SweepRow {
  double t = 0.0;
  MeanStat correct;
  MeanStat wrong;
  std::optional<double> percent_difference;  // absent when undefined
};

std::vector<SweepRow> ThresholdSweep(std::span<const MapPair> pairs,
                                     std::span<const double> t_values);

}  // namespace voice::metrics

#endif  // VOICE_METRICS_METRICS_HPP_
