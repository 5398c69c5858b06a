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

#ifndef BSM_ERROR_H_
#define BSM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsm {

enum class ErrorCode {
  kDomain,
  kConfig,
  kIo,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kDimensionMismatch,
  kNonMonotoneFrequencies,
  kNonFinite,
  kBadWeights,
  kNoHorizontalDirections,
  kSingularSystem,
  kDegeneratePower,
  kGridMismatch,
  kInsufficientTaps,
  kChannelMismatch,
  kUnsupportedFormat,
};

// Coarse classes used by the command-line front end to pick an exit code.
enum class ErrorClass { kConfig, kData, kNumerical };

std::string_view error_code_name(ErrorCode code);
ErrorClass error_class(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bsm

#endif  // BSM_ERROR_H_
