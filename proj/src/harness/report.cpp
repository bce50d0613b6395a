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

#include "voice/harness/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "voice/common/error.hpp"

namespace voice::harness {
namespace {

using nlohmann::json;

std::string Num(const json& v, int decimals = 4) {
  if (!v.is_number()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v.get<double>());
  return buf;
}

json ReadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return json::parse(in);
}

}  // namespace

std::string FormatCorrectWrongTable(const json& summary) {
  std::ostringstream out;
  out << "| challenge | level | method | n (correct/wrong) | IoU correct | IoU wrong | IoU %diff "
         "| SNR correct | SNR wrong | SNR %diff |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const json& g : summary.at("groups")) {
    const json& iou = g.at("iou");
    const json& snr = g.at("snr");
    out << "| " << g.at("challenge").get<std::string>() << " | " << g.at("level").get<int>()
        << " | " << g.at("method").get<std::string>() << " | " << g.at("n_correct").get<int>()
        << "/" << g.at("n_wrong").get<int>() << " | " << Num(iou["correct"]["mean"]) << " | "
        << Num(iou["wrong"]["mean"]) << " | " << Num(iou["percent_difference"], 2) << " | "
        << Num(snr["correct"]["mean"]) << " | " << Num(snr["wrong"]["mean"]) << " | "
        << Num(snr["percent_difference"], 2) << " |\n";
  }
  return out.str();
}

std::string FormatAucTable(const json& curves) {
  // (challenge, method) -> (iou auc, snr auc)
  std::map<std::pair<std::string, std::string>, std::pair<json, json>> rows;
  for (const json& a : curves.at("auc")) {
    auto& row = rows[{a.at("challenge").get<std::string>(), a.at("method").get<std::string>()}];
    (a.at("metric") == "iou" ? row.first : row.second) = a.at("auc");
  }
  std::ostringstream out;
  out << "| challenge | method | IoU AUC | SNR AUC |\n|---|---|---|---|\n";
  for (const auto& [key, value] : rows) {
    out << "| " << key.first << " | " << key.second << " | " << Num(value.first) << " | "
        << Num(value.second) << " |\n";
  }
  return out.str();
}

std::string FormatSweepTable(const json& sweep) {
  std::ostringstream out;
  out << "| method | t | IoU correct | IoU wrong | %diff |\n|---|---|---|---|---|\n";
  for (const json& table : sweep) {
    for (const json& r : table.at("rows")) {
      out << "| " << table.at("method").get<std::string>() << " | " << Num(r.at("t"), 2)
          << " | " << Num(r["iou_correct"]["mean"]) << " | " << Num(r["iou_wrong"]["mean"])
          << " | " << Num(r["percent_difference"], 2) << " |\n";
    }
  }
  return out.str();
}

std::string WriteReport(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ostringstream out;
  out << "# VOICE run report\n\n";
  bool any = false;
  if (fs::exists(dir / "summary.json")) {
    const json summary = ReadJson(dir / "summary.json");
    out << "## Correct vs wrong predictions\n\n"
        << "IoU threshold t = " << Num(summary.at("iou_t"), 2)
        << ", contrast threshold p_t = " << summary.at("pt").dump() << ", layer "
        << summary.at("layer").get<std::string>() << ".\n\n"
        << FormatCorrectWrongTable(summary) << "\n";
    any = true;
  }
  if (fs::exists(dir / "curves.json")) {
    out << "## Area under normalized challenge curves (lower is better)\n\n"
        << FormatAucTable(ReadJson(dir / "curves.json")) << "\n";
    any = true;
  }
  if (fs::exists(dir / "sweep.json")) {
    out << "## IoU threshold sweep\n\n" << FormatSweepTable(ReadJson(dir / "sweep.json")) << "\n";
    any = true;
  }
  if (!any) {
    throw Error(ErrorCode::kPrecondition, "no summary.json, curves.json or sweep.json in " +
                                              dir.string());
  }
  const std::string text = out.str();
  std::ofstream file(dir / "report.md", std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot write report.md");
  file << text;
  return text;
}

}  // namespace voice::harness
