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

#include "voice/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "voice/common/error.hpp"

namespace voice::metrics {
namespace {

void CheckThreshold(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "IoU threshold must lie in (0, 1)");
  }
}

struct Accumulator {
  double sum = 0.0;
  int count = 0;

  void Add(double v) {
    sum += v;
    ++count;
  }
  MeanStat Stat() const {
    MeanStat s;
    s.count = count;
    if (count > 0) s.mean = sum / count;
    return s;
  }
};

std::optional<double> SafePercentDifference(const MeanStat& correct, const MeanStat& wrong) {
  if (!correct.mean || !wrong.mean || *correct.mean == 0.0) return std::nullopt;
  return PercentDifference(*correct.mean, *wrong.mean);
}

template <typename Get>
SplitMeans Summarize(std::span<const MetricRecord> records, Get get) {
  Accumulator all;
  Accumulator correct;
  Accumulator wrong;
  SplitMeans out;
  for (const MetricRecord& r : records) {
    const std::optional<double> v = get(r);
    if (!v) {
      ++out.undefined;
      continue;
    }
    all.Add(*v);
    (r.correct ? correct : wrong).Add(*v);
  }
  out.all = all.Stat();
  out.correct = correct.Stat();
  out.wrong = wrong.Stat();
  out.percent_difference = SafePercentDifference(out.correct, out.wrong);
  return out;
}

}  // namespace

std::vector<bool> Binarize(const net::Map2D& map, double t) {
  std::vector<bool> support(map.values.size());
  for (std::size_t i = 0; i < support.size(); ++i) support[i] = map.values[i] > t;
  return support;
}

double Iou(const net::Map2D& u, const net::Map2D& m, double t) {
  if (!u.SameShape(m)) throw Error(ErrorCode::kShapeMismatch, "IoU maps differ in shape");
  CheckThreshold(t);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const bool a = u.values[i] > t;
    const bool b = m.values[i] > t;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<double> Snr(const net::Map2D& u) {
  if (u.values.empty()) return std::nullopt;
  // Exact test: the two-pass std of a constant map can round to a tiny non-zero.
  const auto [lo, hi] = std::minmax_element(u.values.begin(), u.values.end());
  if (*lo == *hi) return std::nullopt;
  const double n = static_cast<double>(u.values.size());
  double mean = 0.0;
  for (double v : u.values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : u.values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) return std::nullopt;
  return mean / sd;
}

double Nll(const net::PredictionRecord& record) {
  if (!record.label) throw Error(ErrorCode::kPrecondition, "NLL needs a label");
  const int label = *record.label;
  if (label < 0 || label >= record.num_classes()) {
    throw Error(ErrorCode::kInvalidArgument, "label out of range");
  }
  return -std::log(record.probs[label] + kNllEpsilon);
}

double PercentDifference(double correct_mean, double wrong_mean) {
  if (correct_mean == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "percent difference undefined for a zero base");
  }
  return (wrong_mean - correct_mean) / correct_mean * 100.0;
}

Aggregate AggregateRecords(std::span<const MetricRecord> records) {
  Aggregate a;
  a.n = static_cast<int>(records.size());
  for (const MetricRecord& r : records) (r.correct ? a.n_correct : a.n_wrong)++;
  if (a.n > 0) a.accuracy = static_cast<double>(a.n_correct) / a.n;
  a.iou = Summarize(records, [](const MetricRecord& r) { return std::optional(r.iou); });
  a.snr = Summarize(records, [](const MetricRecord& r) { return r.snr; });
  a.nll = Summarize(records, [](const MetricRecord& r) { return r.nll; });
  return a;
}

NormalizedSeries NormalizeSeries(std::span<const double> raw) {
  NormalizedSeries s;
  s.values.assign(raw.begin(), raw.end());
  if (raw.empty()) {
    s.constant = true;
    return s;
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  s.lo = *lo;
  s.hi = *hi;
  s.constant = !(s.hi > s.lo);
  for (double& v : s.values) v = s.constant ? 0.0 : (v - s.lo) / (s.hi - s.lo);
  return s;
}

void ChallengeCurve::Validate() const {
  if (raw.size() != levels.size() || (!spread.empty() && spread.size() != levels.size())) {
    throw Error(ErrorCode::kInvalidArgument, "curve: one value per level required");
  }
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "curve: levels must be strictly increasing");
    }
  }
}

ChallengeCurve MakeCurve(std::string challenge, std::string method, std::string metric,
                         std::vector<int> levels, std::vector<double> raw,
                         std::vector<double> spread) {
  ChallengeCurve c;
  c.challenge = std::move(challenge);
  c.method = std::move(method);
  c.metric = std::move(metric);
  c.levels = std::move(levels);
  c.raw = std::move(raw);
  c.spread = std::move(spread);
  c.Validate();
  c.normalized = NormalizeSeries(c.raw);
  return c;
}

double TrapezoidAuc(std::span<const int> levels, std::span<const double> values) {
  if (levels.size() < 2) {
    throw Error(ErrorCode::kPrecondition, "AUC needs at least two challenge levels");
  }
  if (values.size() != levels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "AUC: one value per level required");
  }
  const double x0 = levels.front();
  const double span = static_cast<double>(levels.back()) - x0;
  if (!(span > 0.0)) throw Error(ErrorCode::kInvalidArgument, "AUC: levels must increase");
  double area = 0.0;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double dx = (levels[i] - levels[i - 1]) / span;
    area += 0.5 * dx * (values[i] + values[i - 1]);
  }
  return area;
}

AucResult AucCurve(const ChallengeCurve& curve) {
  curve.Validate();
  AucResult r;
  r.challenge = curve.challenge;
  r.method = curve.method;
  r.metric = curve.metric;
  r.auc = TrapezoidAuc(curve.levels, curve.normalized.values);
  return r;
}

std::vector<SweepRow> ThresholdSweep(std::span<const MapPair> pairs,
                                     std::span<const double> t_values) {
  std::vector<SweepRow> rows;
  rows.reserve(t_values.size());
  for (double t : t_values) {
    Accumulator correct;
    Accumulator wrong;
    for (const MapPair& p : pairs) {
      (p.correct ? correct : wrong).Add(Iou(*p.voice, *p.explanation, t));
    }
    SweepRow row;
    row.t = t;
    row.correct = correct.Stat();
    row.wrong = wrong.Stat();
    row.percent_difference = SafePercentDifference(row.correct, row.wrong);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace voice::metrics
