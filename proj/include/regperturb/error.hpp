// Copyright 2026 The regperturb Authors
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
#ifndef REGPERTURB_ERROR_HPP_
#define REGPERTURB_ERROR_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace regperturb {

enum class ErrorCode {
  kInvalidParameters,
  kInvalidSpec,
  kDimensionMismatch,
  kRankDeficient,
  kConstantResponse,
  kDegenerateDirection,
  kDegenerateFit,
  kZeroDirection,
  kUndefinedScale,
  kPositivityUnachievable,
  kInsufficientData,
  kNoAdequateB,
  kParseError,
  kSchemaMismatch,
  kNonFiniteValue,
  kIoError,
  kVerificationFailed,
};

constexpr std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameters: return "InvalidParameters";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kConstantResponse: return "ConstantResponse";
    case ErrorCode::kDegenerateDirection: return "DegenerateDirection";
    case ErrorCode::kDegenerateFit: return "DegenerateFit";
    case ErrorCode::kZeroDirection: return "ZeroDirection";
    case ErrorCode::kUndefinedScale: return "UndefinedScale";
    case ErrorCode::kPositivityUnachievable: return "PositivityUnachievable";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNoAdequateB: return "NoAdequateB";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kVerificationFailed: return "VerificationFailed";
  }
  return "Unknown";
}

// Process exit status used by the command-line tool:
// 2 usage, 3 data, 4 numerical degeneracy, 5 positivity unachievable.
constexpr int ExitStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameters:
    case ErrorCode::kInvalidSpec:
      return 2;
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kConstantResponse:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kNonFiniteValue:
    case ErrorCode::kIoError:
    case ErrorCode::kVerificationFailed:
      return 3;
    case ErrorCode::kRankDeficient:
    case ErrorCode::kDegenerateDirection:
    case ErrorCode::kDegenerateFit:
    case ErrorCode::kZeroDirection:
    case ErrorCode::kUndefinedScale:
    case ErrorCode::kNoAdequateB:
      return 4;
    case ErrorCode::kPositivityUnachievable:
      return 5;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when every candidate release violated the positivity requirement.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& message, double best_min, int attempts)
      : Error(ErrorCode::kPositivityUnachievable, message),
        best_min_(best_min),
        attempts_(attempts) {}

  // Largest min(y + eps) over all candidates that were evaluated.
  double best_min() const noexcept { return best_min_; }
  int attempts() const noexcept { return attempts_; }

 private:
  double best_min_;
  int attempts_;
};

}  // namespace regperturb

#endif  // REGPERTURB_ERROR_HPP_
