// Copyright 2026 The qndnoise Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qnd {

// Error categories. The numeric values of the first four are the CLI exit
// codes; the C API reports the same numbers.
enum class ErrorCode : int {
  kConfig = 1,
  kIo = 2,
  kEstimation = 3,
  kSelftest = 4,
  kInvalidArgument = 5,
};

// Estimator failures carry a stable name that is surfaced to users.
enum class EstimationFailure {
  kNone,
  kIllPosedDesign,
  kAtomicTermUnidentifiable,
  kDegenerateCalibration,
};

std::string_view to_string(EstimationFailure failure);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Error(EstimationFailure failure, const std::string& message)
      : std::runtime_error(std::string(to_string(failure)) + ": " + message),
        code_(ErrorCode::kEstimation),
        failure_(failure) {}

  ErrorCode code() const { return code_; }
  EstimationFailure failure() const { return failure_; }

 private:
  ErrorCode code_;
  EstimationFailure failure_ = EstimationFailure::kNone;
};

[[noreturn]] inline void throw_invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

inline std::string_view to_string(EstimationFailure failure) {
  switch (failure) {
    case EstimationFailure::kIllPosedDesign:
      return "ill-posed-design";
    case EstimationFailure::kAtomicTermUnidentifiable:
      return "atomic-term-unidentifiable";
    case EstimationFailure::kDegenerateCalibration:
      return "degenerate-calibration";
    case EstimationFailure::kNone:
      break;
  }
  return "none";
}

}  // namespace qnd
