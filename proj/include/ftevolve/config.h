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

#ifndef FTEVOLVE_CONFIG_H_
#define FTEVOLVE_CONFIG_H_

// Run configuration file (JSON). Every section is optional; unknown keys
// are rejected so typos do not silently fall back to defaults.
//
//   {
//     "seed": 0,
//     "data": {"path": "toy.csv", "target": "y", "task": "regression",
//              "mode": "append"},
//     "evaluation": {"folds": 5, "learner": "auto", "ridge_alpha": 0.1, ...},
//     "explorer": {"episodes": 50, "steps_per_episode": 4, ...},
//     "selection": {"k": 5, "lambda": 0.05, "mu": 0.10},
//     "loop": {"iterations": 10, "candidates": 10, "keep_top": 3,
//              "dedup_threshold": 0.9, "mode": "closed_loop", "jobs": 1},
//     "checks": {"max_nan_ratio": 0.05, "min_column_std": 1e-12,
//                "utility_folds": 5, "utility_fail_folds": 4},
//     "limits": {"max_tokens_per_combination": 15, "max_combinations": 10},
//     "operators": ["plus", "minus", ...],
//     "sampling": {"temperature": 0.7, "top_p": 0.9, "top_k": 50,
//                  "max_new_tokens": 500},
//     "refine": {"enhance": false, "variants_per_pair": 1, "utility": false},
//     "policy": {"kind": "mock"} or {"kind": "http", "base_url": ...,
//                "model": ..., "audit_log": ..., "max_attempts": 3, ...},
//     "library": "library.json",
//     "out": "out"
//   }
//
// The top-level seed feeds evaluation folds, the explorer, the loop and
// enhancement.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ftevolve/eval.h"
#include "ftevolve/explore.h"
#include "ftevolve/loop.h"
#include "ftevolve/policy.h"
#include "ftevolve/refine.h"
#include "ftevolve/table.h"

namespace ftevolve {

enum class PolicyKind { kMock, kHttp };

struct RefineConfig {
  bool enhance = false;
  bool utility = false;
  int variants_per_pair = 1;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string data_path;
  std::optional<std::string> target;
  std::optional<TaskKind> task;
  ExecutionMode execution_mode = ExecutionMode::kAppend;
  EvaluationConfig evaluation;
  ExplorerConfig explorer;
  LoopConfig loop;  // loop.context holds the selection params
  RefineConfig refine;
  PolicyKind policy = PolicyKind::kMock;
  HttpPolicyConfig http;
  std::string library_path = "library.json";
  std::string out_dir = "out";

  // Copies the seed, limits, operators and evaluation settings into the
  // nested configs that carry their own copies.
  void Propagate();
  GenerationRules RulesFor(int feature_count) const;
};

// Throws kInvalidArgument naming the offending key.
RunConfig ParseRunConfig(std::string_view json_text);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Loads data.path. Throws kInvalidArgument when path or task is missing.
Dataset LoadConfiguredDataset(const RunConfig& config);

// kHttp reads the key from FT_EVOLVE_API_KEY.
std::unique_ptr<Policy> MakePolicy(const RunConfig& config);

}  // namespace ftevolve

#endif  // FTEVOLVE_CONFIG_H_
