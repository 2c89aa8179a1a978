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

#ifndef FTEVOLVE_LOOP_H_
#define FTEVOLVE_LOOP_H_

// Experience-conditioned generation: the closed loop (generate, verify,
// rank, write back) and the one-shot baselines that spend the same call
// budget without touching the library.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftevolve/eval.h"
#include "ftevolve/library.h"
#include "ftevolve/policy.h"
#include "ftevolve/refine.h"
#include "ftevolve/table.h"

namespace ftevolve {

enum class LoopMode { kClosedLoop, kOneShotFixed, kOneShotResample };
std::string_view LoopModeName(LoopMode mode);
LoopMode ParseLoopMode(std::string_view text);

struct LoopConfig {
  int iterations = 10;   // T
  int candidates = 10;   // B, one policy call each
  int keep_top = 3;      // at most this many written back per iteration
  SelectionParams context;
  double dedup_threshold = 0.9;
  std::uint64_t seed = 0;
  LoopMode mode = LoopMode::kClosedLoop;
  SamplingSettings sampling;
  OperatorSet allowed_operators = OperatorSet::Default();
  CheckContext checks;
  int jobs = 1;  // concurrent candidate evaluations
};

// Throws kInvalidArgument.
void ValidateLoopConfig(const LoopConfig& config);

enum class CallStatus { kAccepted, kParseError, kCheckFailed, kEvalError };
std::string_view CallStatusName(CallStatus status);
CallStatus ParseCallStatus(std::string_view text);

struct CallRecord {
  int iteration = 0;  // 1-based
  int call = 0;       // 1-based within the iteration
  CallStatus status = CallStatus::kParseError;
  std::string reason;
  std::string sequence;          // postfix, empty when unparsable
  std::optional<double> score;   // set iff status == kAccepted
  double best_so_far = 0.0;
  bool written_back = false;
  std::string prompt_hash;
};

struct RunReport {
  LoopMode mode = LoopMode::kClosedLoop;
  std::string dataset;
  int feature_count = 0;
  int iterations = 0;
  int candidates = 0;
  Metric metric = Metric::kOneMinusRae;
  double baseline_score = 0.0;  // original features
  double initial_best = 0.0;    // best library score before the run
  std::vector<CallRecord> records;
  std::optional<Experience> final_best;
  std::int64_t library_version_before = 0;
  std::int64_t library_version_after = 0;
  std::size_t library_size_before = 0;
  std::size_t library_size_after = 0;

  std::vector<double> BestSoFar() const;
  double FinalBestScore() const;
};

// Closed loop. Requires at least one experience for the dataset (throws
// kInsufficientExperiences). Individual candidate failures are recorded;
// policy errors propagate with (iteration, call) context.
RunReport RunClosedLoop(const Dataset& dataset, ExperienceLibrary& library,
                        Policy& policy, const LoopConfig& config,
                        const EvaluationConfig& eval);

// One-shot baseline (config.mode must be a one-shot mode). The library is
// never modified.
RunReport RunOneShot(const Dataset& dataset, const ExperienceLibrary& library,
                     Policy& policy, const LoopConfig& config,
                     const EvaluationConfig& eval);

struct BehaviorStats {
  int sequences = 0;
  std::map<std::string, int> operator_counts;
  int simple_count = 0;
  int complex_count = 0;
  double simple_ratio = 0.0;  // simple / (simple + complex); 0 when no operators
  std::vector<int> feature_usage;  // per original feature
  double feature_usage_entropy = 0.0;
};

// Over the parsed candidate sequences of the report. Throws kEmptyReport.
BehaviorStats ComputeBehaviorStats(const RunReport& report);
BehaviorStats ComputeBehaviorStats(std::span<const TransformationSequence> sequences,
                                   int feature_count);

// One JSON object per call, newline-terminated.
std::string RunReportToJsonl(const RunReport& report);
std::string RunReportSummaryJson(const RunReport& report);
// Throws kMalformedReport, kEmptyReport.
RunReport RunReportFromJsonl(std::string_view text);

}  // namespace ftevolve

#endif  // FTEVOLVE_LOOP_H_
