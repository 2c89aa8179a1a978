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

#ifndef FTEVOLVE_EXPLORE_H_
#define FTEVOLVE_EXPLORE_H_

// Reward-driven exploration that seeds the experience library. A
// contextless three-head epsilon-greedy bandit picks (head feature,
// operator, tail feature); each accepted action appends one combination and
// is rewarded by the change in cross-validated score.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ftevolve/eval.h"
#include "ftevolve/expr.h"
#include "ftevolve/library.h"
#include "ftevolve/refine.h"
#include "ftevolve/table.h"

namespace ftevolve {

struct ExplorerConfig {
  int episodes = 50;
  int steps_per_episode = 4;
  double epsilon_start = 0.9;
  double epsilon_end = 0.1;
  // Per-episode multiplicative decay; <= 0 fits the decay so that epsilon
  // reaches epsilon_end on the last episode.
  double epsilon_decay = 0.0;
  std::uint64_t seed = 0;
  int keep_top = -1;  // -1 = episodes
  double invalid_penalty = 0.01;
  int max_retries = 3;
};

// Throws kInvalidArgument when the config violates its ranges.
void ValidateExplorerConfig(const ExplorerConfig& config);

// Epsilon used in episode `episode` (0-based).
double EpsilonForEpisode(const ExplorerConfig& config, int episode);

class ActionValueTable {
 public:
  struct Head {
    std::vector<double> value;
    std::vector<int> visits;

    // Incremental mean of observed rewards.
    void Update(int action, double reward);
    // Lowest id among the maxima over [0, limit).
    int Argmax(int limit) const;
  };

  ActionValueTable(int max_features, int num_operators);

  Head& head_feature() { return head_feature_; }
  Head& op() { return op_; }
  Head& tail_feature() { return tail_feature_; }
  const Head& head_feature() const { return head_feature_; }
  const Head& op() const { return op_; }
  const Head& tail_feature() const { return tail_feature_; }

 private:
  Head head_feature_;
  Head op_;
  Head tail_feature_;
};

struct Action {
  int head_feature = 0;
  int op_index = 0;  // index into the operator set
  OpCode op = OpCode::kPlus;
  std::optional<int> tail_feature;  // binary operators only
};

// With probability epsilon draws every head uniformly, otherwise takes each
// head's argmax. `current_feature_count` bounds the feature heads.
Action SelectAction(const ActionValueTable& tables, double epsilon,
                    std::mt19937_64& rng, int current_feature_count,
                    const OperatorSet& ops);

struct EpisodeTrace {
  int episode = 0;
  double epsilon = 0.0;
  std::vector<double> rewards;  // one per step; 0 when every retry failed
  double baseline_score = 0.0;
  double final_score = 0.0;
  TransformationSequence sequence;
  int invalid_actions = 0;
};

struct ExplorationResult {
  double baseline_score = 0.0;
  Metric metric = Metric::kOneMinusRae;
  std::vector<EpisodeTrace> episodes;
  // keep_top best distinct candidates, descending score.
  std::vector<Experience> experiences;
};

// Throws kEvaluationFailure (with episode/step context) when scoring fails.
ExplorationResult RunExploration(const Dataset& dataset,
                                 const EvaluationConfig& eval,
                                 const ExplorerConfig& config,
                                 const CheckContext& checks = {});

}  // namespace ftevolve

#endif  // FTEVOLVE_EXPLORE_H_
