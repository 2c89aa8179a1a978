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

#include "ftevolve/refine.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ftevolve/policy.h"

namespace ftevolve {
namespace {

std::string Where(int index) {
  return index < 0 ? std::string() : "@" + std::to_string(index + 1);
}

// Linear interpolation between order statistics (numpy's default).
double QuantileOfSorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void AddStability(const Combination& combination, const Dataset& dataset,
                  const CheckThresholds& th, int index,
                  std::vector<CheckReason>* reasons) {
  TransformOutcome outcome = ExecuteCombination(combination, dataset);
  if (outcome.nan_ratio > th.max_nan_ratio) {
    reasons->push_back({CheckLevel::kStability, index,
                        "NaN ratio " + std::to_string(outcome.nan_ratio) +
                            " exceeds " + std::to_string(th.max_nan_ratio)});
  }
  if (outcome.has_inf) {
    reasons->push_back({CheckLevel::kStability, index, "infinite values"});
  }
  std::optional<std::vector<double>> imputed = ImputeMedian(std::move(outcome.values));
  if (!imputed) {
    reasons->push_back({CheckLevel::kStability, index, "column is all-NaN"});
    return;
  }
  const double sd = StdDev(*imputed);
  if (sd < th.min_column_std || sd < kStdFloor) {
    reasons->push_back({CheckLevel::kStability, index,
                        "column std " + std::to_string(sd) + " (zero variance)"});
  }
}

}  // namespace

std::string_view CheckLevelName(CheckLevel level) {
  switch (level) {
    case CheckLevel::kSyntactic: return "Syntactic";
    case CheckLevel::kStability: return "Stability";
    case CheckLevel::kUtility: return "Utility";
  }
  return "?";
}

std::string Verdict::Describe() const {
  std::string out;
  for (const CheckReason& r : reasons) {
    if (!out.empty()) out += "; ";
    out += std::string(CheckLevelName(r.level)) + Where(r.combination_index) +
           ": " + r.message;
  }
  return out;
}

Verdict CheckCombination(const Combination& combination, const Dataset& dataset,
                         const CheckContext& context, bool with_utility) {
  Verdict verdict;
  TransformationSequence single{{combination}};
  for (Diagnostic& d : ValidateStructure(single, context.ops, dataset.feature_count(),
                                         context.limits)) {
    verdict.reasons.push_back({CheckLevel::kSyntactic, -1,
                               std::string(ErrorCodeName(d.code)) + ": " + d.message});
  }
  if (!verdict.passed()) return verdict;

  AddStability(combination, dataset, context.thresholds, -1, &verdict.reasons);
  if (!verdict.passed() || !with_utility) return verdict;

  EvaluationConfig cfg = context.eval;
  cfg.folds = context.thresholds.utility_folds;
  const CvResult base = CrossValidate(dataset, cfg);
  const CvResult with = CrossValidate(ExecuteSequence(single, dataset), cfg);
  int worse = 0;
  for (std::size_t f = 0; f < base.fold_scores.size(); ++f) {
    if (with.fold_scores[f] < base.fold_scores[f]) ++worse;
  }
  if (worse >= context.thresholds.utility_fail_folds) {
    verdict.reasons.push_back(
        {CheckLevel::kUtility, -1,
         "negative gain in " + std::to_string(worse) + " of " +
             std::to_string(base.fold_scores.size()) + " folds"});
  }
  return verdict;
}

Verdict CheckSequence(const TransformationSequence& sequence,
                      const Dataset& dataset, const CheckContext& context,
                      bool with_utility) {
  Verdict verdict;
  if (sequence.combinations.empty() ||
      static_cast<int>(sequence.size()) > context.limits.max_combinations) {
    for (Diagnostic& d : ValidateStructure(sequence, context.ops,
                                           dataset.feature_count(), context.limits)) {
      if (d.combination_index < 0) {
        verdict.reasons.push_back({CheckLevel::kSyntactic, -1,
                                   std::string(ErrorCodeName(d.code)) + ": " + d.message});
      }
    }
  }
  for (std::size_t c = 0; c < sequence.combinations.size(); ++c) {
    Verdict v = CheckCombination(sequence.combinations[c], dataset, context, with_utility);
    for (CheckReason& r : v.reasons) {
      r.combination_index = static_cast<int>(c);
      verdict.reasons.push_back(std::move(r));
    }
  }
  if (!verdict.passed()) return verdict;
  try {
    ExecuteSequence(sequence, dataset, ExecutionMode::kAppend);
  } catch (const Error& e) {
    verdict.reasons.push_back({CheckLevel::kStability, -1, e.what()});
  }
  return verdict;
}

std::vector<std::size_t> OutlierSurvivors(std::span<const Experience> experiences) {
  std::vector<std::size_t> keep(experiences.size());
  std::iota(keep.begin(), keep.end(), 0);
  if (experiences.size() < 4) return keep;
  std::vector<double> scores;
  for (const Experience& e : experiences) scores.push_back(e.score.value);
  std::sort(scores.begin(), scores.end());
  const double q1 = QuantileOfSorted(scores, 0.25);
  const double q3 = QuantileOfSorted(scores, 0.75);
  const double fence = q1 - 1.5 * (q3 - q1);
  const double best = scores.back();
  keep.clear();
  for (std::size_t i = 0; i < experiences.size(); ++i) {
    const double s = experiences[i].score.value;
    if (s >= fence || s == best) keep.push_back(i);
  }
  return keep;
}

std::vector<Experience> FilterOutliers(std::span<const Experience> experiences) {
  std::vector<Experience> out;
  for (std::size_t i : OutlierSurvivors(experiences)) out.push_back(experiences[i]);
  return out;
}

std::vector<std::size_t> TrajectoryPool(const ExperienceLibrary& library,
                                        const DatasetSignature& dataset) {
  const std::vector<std::size_t> indices = library.IndicesFor(dataset);
  std::vector<Experience> subset;
  for (std::size_t i : indices) subset.push_back(library.experiences()[i]);
  std::vector<std::size_t> pool;
  for (std::size_t pos : OutlierSurvivors(subset)) pool.push_back(indices[pos]);
  return pool;
}

CoTTrajectory BuildTrajectory(const ExperienceLibrary& library,
                              const DatasetSignature& dataset,
                              const SelectionParams& params) {
  const std::vector<std::size_t> pool = TrajectoryPool(library, dataset);
  return BuildTrajectoryFrom(library, pool, params);
}

CoTTrajectory BuildTrajectoryFrom(const ExperienceLibrary& library,
                                  std::span<const std::size_t> pool,
                                  const SelectionParams& params) {
  if (pool.size() < 2 || params.k < 2) {
    throw Error(ErrorCode::kInsufficientExperiences,
                "a trajectory needs at least 2 experiences (pool " +
                    std::to_string(pool.size()) + ", k " + std::to_string(params.k) +
                    ")");
  }
  std::vector<std::size_t> chosen = library.SelectFrom(pool, params);
  const auto& all = library.experiences();
  std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
    if (all[a].score.value != all[b].score.value) {
      return all[a].score.value < all[b].score.value;
    }
    return a < b;
  });
  CoTTrajectory traj;
  for (std::size_t i : chosen) {
    traj.steps.push_back(all[i]);
    traj.library_indices.push_back(i);
  }
  return traj;
}

EnhancementResult EnhanceTrajectory(const CoTTrajectory& trajectory,
                                    Policy* policy, const Dataset& dataset,
                                    const EvaluationConfig& eval,
                                    const CheckContext& context,
                                    const GenerationRules& rules,
                                    const SamplingSettings& sampling,
                                    const EnhancementOptions& options) {
  if (policy == nullptr) {
    throw Error(ErrorCode::kPolicyUnavailable, "enhancement needs a policy");
  }
  EnhancementResult result;
  std::set<std::string> seen;
  for (const Experience& e : trajectory.steps) seen.insert(RenderSequence(e.sequence));
  const DatasetSignature signature = SignatureOfDataset(dataset);

  for (std::size_t p = 0; p + 1 < trajectory.steps.size(); ++p) {
    const Experience& lo = trajectory.steps[p];
    const Experience& hi = trajectory.steps[p + 1];
    const std::vector<Demonstration> pair = {{lo.sequence, lo.score.value},
                                             {hi.sequence, hi.score.value}};
    const PromptBundle prompt = BuildPrompt(pair, dataset, rules, PromptKind::kEnhancement);
    for (int v = 0; v < options.variants_per_pair; ++v) {
      const std::string tag = "pair " + std::to_string(p + 1) + " variant " +
                              std::to_string(v + 1) + ": ";
      const std::uint64_t seed =
          options.seed * 0x9E3779B97F4A7C15ull + p * 1000003ull + static_cast<std::uint64_t>(v);
      TransformationSequence candidate;
      try {
        candidate = ParseResponse(policy->Generate(prompt, sampling, seed), rules);
      } catch (const Error& e) {
        result.rejections.push_back(tag + e.what());
        continue;
      }
      const std::string rendering = RenderSequence(candidate);
      if (seen.count(rendering) > 0) {
        result.rejections.push_back(tag + "duplicate of an existing step");
        continue;
      }
      const Verdict verdict = CheckSequence(candidate, dataset, context);
      if (!verdict.passed()) {
        result.rejections.push_back(tag + verdict.Describe());
        continue;
      }
      Score score;
      try {
        score = CrossValidatedScore(ExecuteSequence(candidate, dataset), eval);
      } catch (const Error& e) {
        result.rejections.push_back(tag + e.what());
        continue;
      }
      if (score.value < lo.score.value) {
        result.rejections.push_back(tag + "score " + std::to_string(score.value) +
                                    " below the lower step");
        continue;
      }
      seen.insert(rendering);
      result.kept.push_back({std::move(candidate), score, signature,
                             Origin::kEnhancement, options.iteration});
    }
  }
  return result;
}

}  // namespace ftevolve
