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

#ifndef VOICE_COMMON_ERROR_HPP_
#define VOICE_COMMON_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace voice {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNonFinite,
  kUnknownLayer,
  kChecksumMismatch,
  kClassCountMismatch,
  kIo,
  kInvalidConfig,
  kPrecondition,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; the CLI maps `code()` to
// its machine-readable error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace voice

#endif  // VOICE_COMMON_ERROR_HPP_
