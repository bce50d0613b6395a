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

#ifndef VOICE_HARNESS_REPORT_HPP_
#define VOICE_HARNESS_REPORT_HPP_

#include <filesystem>
#include <string>

#include "json.hpp"

namespace voice::harness {

// Markdown table of correct/wrong IoU and SNR means with %-differences, one
// row per (challenge, level, method) group of a summary.json document.
std::string FormatCorrectWrongTable(const nlohmann::json& summary);

// Markdown table challenge x method x {IoU AUC, SNR AUC} from curves.json.
std::string FormatAucTable(const nlohmann::json& curves);

// Markdown table t x method of IoU %-differences from sweep.json.
std::string FormatSweepTable(const nlohmann::json& sweep);

// Reads whichever of summary.json, curves.json and sweep.json exist in `dir`
// and writes report.md next to them. Returns the report text.
std::string WriteReport(const std::filesystem::path& dir);

}  // namespace voice::harness

#endif  // VOICE_HARNESS_REPORT_HPP_
