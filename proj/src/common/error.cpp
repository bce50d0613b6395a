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

#include "voice/common/error.hpp"

namespace voice {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kUnknownLayer: return "unknown_layer";
    case ErrorCode::kChecksumMismatch: return "checksum_mismatch";
    case ErrorCode::kClassCountMismatch: return "class_count_mismatch";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kPrecondition: return "precondition_failed";
  }
  return "unknown";
}

}  // namespace voice
