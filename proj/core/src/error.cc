// Copyright 2026 The BSM Toolkit Authors
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

#include "bsm/error.h"

namespace bsm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonMonotoneFrequencies: return "NonMonotoneFrequencies";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBadWeights: return "BadWeights";
    case ErrorCode::kNoHorizontalDirections: return "NoHorizontalDirections";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kDegeneratePower: return "DegeneratePower";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kInsufficientTaps: return "InsufficientTaps";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
  }
  return "UnknownError";
}

ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return ErrorClass::kConfig;
    case ErrorCode::kSingularSystem:
    case ErrorCode::kDegeneratePower:
      return ErrorClass::kNumerical;
    default:
      return ErrorClass::kData;
  }
}

}  // namespace bsm
