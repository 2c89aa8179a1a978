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

#ifndef FTEVOLVE_REFINE_H_
#define FTEVOLVE_REFINE_H_

// Library refinement: combination/sequence validity checks, outlier
// filtering, performance-ordered trajectories and policy-driven enhancement.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftevolve/eval.h"
#include "ftevolve/expr.h"
#include "ftevolve/library.h"
#include "ftevolve/table.h"

namespace ftevolve {

class Policy;
struct GenerationRules;
struct SamplingSettings;

struct CheckThresholds {
  double max_nan_ratio = 0.05;
  double min_column_std = 1e-12;
  int utility_folds = 5;
  int utility_fail_folds = 4;
};

enum class CheckLevel { kSyntactic, kStability, kUtility };
std::string_view CheckLevelName(CheckLevel level);

struct CheckReason {
  CheckLevel level;
  int combination_index;  // -1 for whole-sequence failures
  std::string message;
};

struct Verdict {
  std::vector<CheckReason> reasons;
  bool passed() const { return reasons.empty(); }
  // "Stability@2: ..." style, reasons joined by "; ".
  std::string Describe() const;
};

// Everything a check needs besides the candidate and the dataset.
struct CheckContext {
  CheckThresholds thresholds;
  OperatorSet ops = OperatorSet::Default();
  SequenceLimits limits;
  EvaluationConfig eval;  // used by the utility vote
};

// Syntactic: any validate-structure diagnostic. Stability: NaN ratio above
// the gate, an infinite value, an all-NaN column or std below
// min_column_std after median imputation. Utility (optional): appending the
// column lowers the fold score versus the originals in at least
// utility_fail_folds of utility_folds folds.
Verdict CheckCombination(const Combination& combination, const Dataset& dataset,
                         const CheckContext& context, bool with_utility);

// Every combination passes (utility off unless requested) and the whole
// sequence executes. Reasons carry the offending combination index.
Verdict CheckSequence(const TransformationSequence& sequence,
                      const Dataset& dataset, const CheckContext& context,
                      bool with_utility = false);

// Drops experiences scoring below Q1 - 1.5 IQR (linear-interpolated
// quartiles); keeps order, never drops the best. Fewer than 4 inputs are
// returned unchanged.
std::vector<Experience> FilterOutliers(std::span<const Experience> experiences);
// Index form: positions within `experiences` that survive.
std::vector<std::size_t> OutlierSurvivors(std::span<const Experience> experiences);

struct CoTTrajectory {
  std::vector<Experience> steps;            // ascending score
  std::vector<std::size_t> library_indices;  // parallel to steps
};

// Library indices for `dataset` that survive outlier filtering.
std::vector<std::size_t> TrajectoryPool(const ExperienceLibrary& library,
                                        const DatasetSignature& dataset);

// Greedy context selection over the outlier-filtered pool, then ascending
// order by score (ties by earlier library index). Throws
// kInsufficientExperiences when the pool holds fewer than max(2, k).
CoTTrajectory BuildTrajectory(const ExperienceLibrary& library,
                              const DatasetSignature& dataset,
                              const SelectionParams& params);
// Same over an explicit candidate pool of library indices.
CoTTrajectory BuildTrajectoryFrom(const ExperienceLibrary& library,
                                  std::span<const std::size_t> pool,
                                  const SelectionParams& params);

struct EnhancementResult {
  std::vector<Experience> kept;
  std::vector<std::string> rejections;
};

struct EnhancementOptions {
  int variants_per_pair = 1;
  std::uint64_t seed = 0;
  int iteration = 0;
};

// Asks the policy for gap-filling variants between each adjacent step pair.
// A variant is kept when it passes CheckSequence, is not a copy of a step or
// of an already kept variant, and scores at least the lower step's score.
// Per-candidate failures are collected in `rejections`. Throws
// kPolicyUnavailable when `policy` is null.
EnhancementResult EnhanceTrajectory(const CoTTrajectory& trajectory,
                                    Policy* policy, const Dataset& dataset,
                                    const EvaluationConfig& eval,
                                    const CheckContext& context,
                                    const GenerationRules& rules,
                                    const SamplingSettings& sampling,
                                    const EnhancementOptions& options = {});

}  // namespace ftevolve

#endif  // FTEVOLVE_REFINE_H_
