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

#include "shiftscope/error.hpp"

namespace shiftscope {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kAttributeSchemaMismatch: return "AttributeSchemaMismatch";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kRowCountMismatch: return "RowCountMismatch";
    case ErrorCode::kSplitEmpty: return "SplitEmpty";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonPositiveRatio: return "NonPositiveRatio";
    case ErrorCode::kDivergedLoss: return "DivergedLoss";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kUnknownSpace: return "UnknownSpace";
    case ErrorCode::kUnknownInstance: return "UnknownInstance";
    case ErrorCode::kUnknownCluster: return "UnknownCluster";
    case ErrorCode::kMissingModel: return "MissingModel";
    case ErrorCode::kMissingArtifact: return "MissingArtifact";
    case ErrorCode::kScoreCoverageGap: return "ScoreCoverageGap";
    case ErrorCode::kCoverageGap: return "CoverageGap";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kNoAttributes: return "NoAttributes";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kPortUnavailable: return "PortUnavailable";
    case ErrorCode::kUnknownSubcommand: return "UnknownSubcommand";
    case ErrorCode::kStoreLocked: return "StoreLocked";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace shiftscope
