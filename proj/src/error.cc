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

#include "ftevolve/error.h"

namespace ftevolve {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnknownToken: return "UnknownToken";
    case ErrorCode::kFeatureOutOfRange: return "FeatureOutOfRange";
    case ErrorCode::kStackUnderflow: return "StackUnderflow";
    case ErrorCode::kLeftoverOperands: return "LeftoverOperands";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kEmptyCombination: return "EmptyCombination";
    case ErrorCode::kSequenceTooLong: return "SequenceTooLong";
    case ErrorCode::kCombinationTooLong: return "CombinationTooLong";
    case ErrorCode::kMissingTarget: return "MissingTarget";
    case ErrorCode::kNonNumericCell: return "NonNumericCell";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kInvalidTarget: return "InvalidTarget";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateColumn: return "DegenerateColumn";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kConstantActuals: return "ConstantActuals";
    case ErrorCode::kTooFewClassSamples: return "TooFewClassSamples";
    case ErrorCode::kSingularDesign: return "SingularDesign";
    case ErrorCode::kEvaluationFailure: return "EvaluationFailure";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kInsufficientExperiences: return "InsufficientExperiences";
    case ErrorCode::kUnverifiedExperience: return "UnverifiedExperience";
    case ErrorCode::kMalformedLibrary: return "MalformedLibrary";
    case ErrorCode::kPolicyUnavailable: return "PolicyUnavailable";
    case ErrorCode::kNoSequenceFound: return "NoSequenceFound";
    case ErrorCode::kDisallowedOperator: return "DisallowedOperator";
    case ErrorCode::kEndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kMalformedEndpointResponse:
      return "MalformedEndpointResponse";
    case ErrorCode::kEmptyReport: return "EmptyReport";
    case ErrorCode::kMalformedReport: return "MalformedReport";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace ftevolve
