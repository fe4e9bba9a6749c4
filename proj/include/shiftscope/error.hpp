// Copyright 2026 The Shiftscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHIFTSCOPE_ERROR_HPP_
#define SHIFTSCOPE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace shiftscope {

// Values are stable: they double as C API status codes and CLI exit codes.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 2,
  kParseError = 3,
  kDuplicateId = 4,
  kAttributeSchemaMismatch = 5,
  kBadMagic = 6,
  kCountMismatch = 7,
  kNonFiniteValue = 8,
  kRowCountMismatch = 9,
  kSplitEmpty = 10,
  kDimensionMismatch = 11,
  kNonPositiveRatio = 12,
  kDivergedLoss = 13,
  kTooFewPoints = 14,
  kUnknownSpace = 15,
  kUnknownInstance = 16,
  kUnknownCluster = 17,
  kMissingModel = 18,
  kMissingArtifact = 19,
  kScoreCoverageGap = 20,
  kCoverageGap = 21,
  kOutOfRange = 22,
  kDegenerateVariance = 23,
  kNoAttributes = 24,
  kSingleClass = 25,
  kIoError = 26,
  kPortUnavailable = 27,
  kUnknownSubcommand = 28,
  kStoreLocked = 29,
  kInternal = 30,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace shiftscope

#endif  // SHIFTSCOPE_ERROR_HPP_
