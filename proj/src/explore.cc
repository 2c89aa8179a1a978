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

#include "ftevolve/explore.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "seed.h"

namespace ftevolve {
namespace {

Combination Compose(const std::vector<Combination>& columns, const Action& action) {
  Combination c = columns[static_cast<std::size_t>(action.head_feature)];
  if (action.tail_feature) {
    const auto& tail = columns[static_cast<std::size_t>(*action.tail_feature)].tokens;
    c.tokens.insert(c.tokens.end(), tail.begin(), tail.end());
  }
  c.tokens.push_back(Token::Operator(action.op));
  return c;
}

void Reward(ActionValueTable& tables, const Action& action, double reward) {
  tables.head_feature().Update(action.head_feature, reward);
  tables.op().Update(action.op_index, reward);
  if (action.tail_feature) tables.tail_feature().Update(*action.tail_feature, reward);
}

}  // namespace

void ValidateExplorerConfig(const ExplorerConfig& c) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "explorer: " + msg);
  };
  if (c.episodes < 1) fail("episodes must be >= 1");
  if (c.steps_per_episode < 1) fail("steps_per_episode must be >= 1");
  if (!(0.0 <= c.epsilon_end && c.epsilon_end <= c.epsilon_start && c.epsilon_start <= 1.0)) {
    fail("need 0 <= epsilon_end <= epsilon_start <= 1");
  }
  if (c.epsilon_decay > 1.0) fail("epsilon_decay must be <= 1");
  if (c.keep_top == 0 || c.keep_top < -1) fail("keep_top must be >= 1 (or -1)");
  if (c.max_retries < 0) fail("max_retries must be >= 0");
  if (c.invalid_penalty < 0.0) fail("invalid_penalty must be >= 0");
}

double EpsilonForEpisode(const ExplorerConfig& config, int episode) {
  if (config.epsilon_decay > 0.0) {
    return std::max(config.epsilon_end,
                    config.epsilon_start * std::pow(config.epsilon_decay, episode));
  }
  if (config.episodes <= 1 || config.epsilon_start == 0.0) return config.epsilon_start;
  const double t = static_cast<double>(episode) / static_cast<double>(config.episodes - 1);
  return config.epsilon_start * std::pow(config.epsilon_end / config.epsilon_start, t);
}

void ActionValueTable::Head::Update(int action, double reward) {
  const auto i = static_cast<std::size_t>(action);
  ++visits[i];
  value[i] += (reward - value[i]) / static_cast<double>(visits[i]);
}

int ActionValueTable::Head::Argmax(int limit) const {
  int best = 0;
  for (int i = 1; i < limit; ++i) {
    if (value[static_cast<std::size_t>(i)] > value[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

ActionValueTable::ActionValueTable(int max_features, int num_operators) {
  head_feature_ = {std::vector<double>(static_cast<std::size_t>(max_features), 0.0),
                   std::vector<int>(static_cast<std::size_t>(max_features), 0)};
  tail_feature_ = head_feature_;
  op_ = {std::vector<double>(static_cast<std::size_t>(num_operators), 0.0),
         std::vector<int>(static_cast<std::size_t>(num_operators), 0)};
}

Action SelectAction(const ActionValueTable& tables, double epsilon,
                    std::mt19937_64& rng, int current_feature_count,
                    const OperatorSet& ops) {
  if (current_feature_count < 1 || ops.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "action selection needs at least one feature and one operator");
  }
  const int n = std::min<int>(current_feature_count,
                              static_cast<int>(tables.head_feature().value.size()));
  const int m = static_cast<int>(ops.size());
  Action a;
  const bool explore = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon;
  if (explore) {
    a.head_feature = std::uniform_int_distribution<int>(0, n - 1)(rng);
    a.op_index = std::uniform_int_distribution<int>(0, m - 1)(rng);
  } else {
    a.head_feature = tables.head_feature().Argmax(n);
    a.op_index = tables.op().Argmax(m);
  }
  a.op = ops.operators()[static_cast<std::size_t>(a.op_index)].code;
  if (DescriptorOf(a.op).arity == 2) {
    a.tail_feature = explore ? std::uniform_int_distribution<int>(0, n - 1)(rng)
                             : tables.tail_feature().Argmax(n);
  }
  return a;
}

ExplorationResult RunExploration(const Dataset& dataset, const EvaluationConfig& eval,
                                 const ExplorerConfig& config,
                                 const CheckContext& checks) {
  ValidateExplorerConfig(config);
  const OperatorSet& ops = checks.ops;
  const int d = dataset.feature_count();
  const DatasetSignature signature = SignatureOfDataset(dataset);

  ExplorationResult result;
  const Score baseline = CrossValidatedScore(dataset, eval);
  result.baseline_score = baseline.value;
  result.metric = baseline.metric;

  ActionValueTable tables(d + config.steps_per_episode, static_cast<int>(ops.size()));
  std::vector<Experience> candidates;

  for (int ep = 0; ep < config.episodes; ++ep) {
    std::mt19937_64 rng(internal::DeriveSeed(config.seed, static_cast<std::uint64_t>(ep)));
    EpisodeTrace trace;
    trace.episode = ep;
    trace.epsilon = EpsilonForEpisode(config, ep);
    trace.baseline_score = baseline.value;

    // Columns of the current state as combinations over the original features.
    std::vector<Combination> columns;
    for (int f = 0; f < d; ++f) columns.push_back({{Token::Feature(f)}});
    double state_score = baseline.value;

    for (int step = 0; step < config.steps_per_episode; ++step) {
      if (static_cast<int>(trace.sequence.size()) >= checks.limits.max_combinations) {
        trace.rewards.push_back(0.0);
        continue;
      }
      bool accepted = false;
      for (int attempt = 0; attempt <= config.max_retries && !accepted; ++attempt) {
        const Action action = SelectAction(tables, trace.epsilon, rng,
                                           static_cast<int>(columns.size()), ops);
        const Combination comb = Compose(columns, action);
        const bool duplicate =
            std::find(trace.sequence.combinations.begin(),
                      trace.sequence.combinations.end(),
                      comb) != trace.sequence.combinations.end();
        if (duplicate || !CheckCombination(comb, dataset, checks, false).passed()) {
          Reward(tables, action, -config.invalid_penalty);
          ++trace.invalid_actions;
          continue;
        }
        TransformationSequence next = trace.sequence;
        next.combinations.push_back(comb);
        double next_score = 0.0;
        try {
          next_score = CrossValidatedScore(ExecuteSequence(next, dataset), eval).value;
        } catch (const Error& e) {
          throw Error(ErrorCode::kEvaluationFailure,
                      "episode " + std::to_string(ep + 1) + ", step " +
                          std::to_string(step + 1) + ": " + e.what());
        }
        const double reward = next_score - state_score;
        Reward(tables, action, reward);
        trace.rewards.push_back(reward);
        trace.sequence = std::move(next);
        columns.push_back(comb);
        state_score = next_score;
        accepted = true;
      }
      if (!accepted) trace.rewards.push_back(0.0);
    }
    trace.final_score = state_score;
    if (!trace.sequence.combinations.empty()) {
      candidates.push_back({trace.sequence, Score{state_score, baseline.metric}, signature,
                            Origin::kRl, ep});
    }
    result.episodes.push_back(std::move(trace));
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Experience& a, const Experience& b) {
                     return a.score.value > b.score.value;
                   });
  const std::size_t keep =
      config.keep_top < 0 ? static_cast<std::size_t>(config.episodes)
                          : static_cast<std::size_t>(config.keep_top);
  std::set<std::string> seen;
  for (Experience& e : candidates) {
    if (result.experiences.size() >= keep) break;
    if (seen.insert(RenderSequence(e.sequence)).second) {
      result.experiences.push_back(std::move(e));
    }
  }
  return result;
}

}  // namespace ftevolve
