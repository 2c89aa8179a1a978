// Copyright 2026 The ft-evolve Authors
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

#ifndef FTEVOLVE_ERROR_H_
#define FTEVOLVE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ftevolve {

// Numeric values are part of the C API (see ftevolve.h) and must not be
// reordered.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIoError = 2,
  // expr
  kUnknownToken = 10,
  kFeatureOutOfRange = 11,
  kStackUnderflow = 12,
  kLeftoverOperands = 13,
  kEmptySequence = 14,
  kEmptyCombination = 15,
  kSequenceTooLong = 16,
  kCombinationTooLong = 17,
  // table
  kMissingTarget = 20,
  kNonNumericCell = 21,
  kTooFewRows = 22,
  kInvalidTarget = 23,
  kArityMismatch = 24,
  kLengthMismatch = 25,
  kDegenerateColumn = 26,
  // eval
  kEmptyInput = 30,
  kConstantActuals = 31,
  kTooFewClassSamples = 32,
  kSingularDesign = 33,
  kEvaluationFailure = 34,
  // library
  kEmptySelection = 40,
  kInsufficientExperiences = 41,
  kUnverifiedExperience = 42,
  kMalformedLibrary = 43,
  // policy
  kPolicyUnavailable = 50,
  kNoSequenceFound = 51,
  kDisallowedOperator = 52,
  kEndpointUnreachable = 53,
  kAuthFailure = 54,
  kMalformedEndpointResponse = 55,
  // loop / report
  kEmptyReport = 60,
  kMalformedReport = 61,
  // unexpected failure inside the library
  kInternal = 99,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ftevolve

#endif  // FTEVOLVE_ERROR_H_
