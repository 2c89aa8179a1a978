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

#include "ftevolve/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ftevolve {
namespace {

using json = nlohmann::json;

[[noreturn]] void Bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, "config " + where + ": " + what);
}

void OnlyKeys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) Bad(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) Bad(where, "unknown key '" + key + "'");
  }
}

template <typename T>
void Read(const json& obj, const std::string& where, const char* key, T* out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    *out = it->get<T>();
  } catch (const json::exception& e) {
    Bad(where + "." + key, e.what());
  }
}

std::string String(const json& obj, const std::string& where, const char* key,
                   std::string fallback) {
  Read(obj, where, key, &fallback);
  return fallback;
}

}  // namespace

void RunConfig::Propagate() {
  evaluation.seed = seed;
  explorer.seed = seed;
  loop.seed = seed;
  loop.checks.eval = evaluation;
  loop.checks.ops = loop.allowed_operators;
}

GenerationRules RunConfig::RulesFor(int feature_count) const {
  return GenerationRules{loop.allowed_operators, feature_count, loop.checks.limits};
}

RunConfig ParseRunConfig(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    Bad("", e.what());
  }
  OnlyKeys(doc, "root",
           {"seed", "data", "evaluation", "explorer", "selection", "loop", "checks", "limits",
            "operators", "sampling", "refine", "policy", "library", "out"});
  RunConfig c;
  Read(doc, "root", "seed", &c.seed);
  Read(doc, "root", "library", &c.library_path);
  Read(doc, "root", "out", &c.out_dir);

  if (doc.contains("data")) {
    const json& d = doc["data"];
    OnlyKeys(d, "data", {"path", "target", "task", "mode"});
    Read(d, "data", "path", &c.data_path);
    if (d.contains("target") && !d["target"].is_null()) {
      c.target = String(d, "data", "target", "");
    }
    if (d.contains("task")) c.task = ParseTask(String(d, "data", "task", ""));
    if (d.contains("mode")) c.execution_mode = ParseExecutionMode(String(d, "data", "mode", ""));
  }
  if (doc.contains("evaluation")) {
    const json& e = doc["evaluation"];
    OnlyKeys(e, "evaluation",
             {"folds", "learner", "ridge_alpha", "logistic_l2", "logistic_learning_rate",
              "logistic_iterations", "knn_k"});
    Read(e, "evaluation", "folds", &c.evaluation.folds);
    if (e.contains("learner")) {
      c.evaluation.learner = ParseLearner(String(e, "evaluation", "learner", ""));
    }
    Read(e, "evaluation", "ridge_alpha", &c.evaluation.ridge_alpha);
    Read(e, "evaluation", "logistic_l2", &c.evaluation.logistic_l2);
    Read(e, "evaluation", "logistic_learning_rate", &c.evaluation.logistic_learning_rate);
    Read(e, "evaluation", "logistic_iterations", &c.evaluation.logistic_iterations);
    Read(e, "evaluation", "knn_k", &c.evaluation.knn_k);
    if (c.evaluation.folds < 2) Bad("evaluation.folds", "must be >= 2");
  }
  if (doc.contains("explorer")) {
    const json& x = doc["explorer"];
    OnlyKeys(x, "explorer",
             {"episodes", "steps_per_episode", "epsilon_start", "epsilon_end", "epsilon_decay",
              "keep_top", "invalid_penalty", "max_retries"});
    Read(x, "explorer", "episodes", &c.explorer.episodes);
    Read(x, "explorer", "steps_per_episode", &c.explorer.steps_per_episode);
    Read(x, "explorer", "epsilon_start", &c.explorer.epsilon_start);
    Read(x, "explorer", "epsilon_end", &c.explorer.epsilon_end);
    Read(x, "explorer", "epsilon_decay", &c.explorer.epsilon_decay);
    Read(x, "explorer", "keep_top", &c.explorer.keep_top);
    Read(x, "explorer", "invalid_penalty", &c.explorer.invalid_penalty);
    Read(x, "explorer", "max_retries", &c.explorer.max_retries);
  }
  if (doc.contains("selection")) {
    const json& s = doc["selection"];
    OnlyKeys(s, "selection", {"k", "lambda", "mu"});
    Read(s, "selection", "k", &c.loop.context.k);
    Read(s, "selection", "lambda", &c.loop.context.lambda);
    Read(s, "selection", "mu", &c.loop.context.mu);
  }
  if (doc.contains("loop")) {
    const json& l = doc["loop"];
    OnlyKeys(l, "loop",
             {"iterations", "candidates", "keep_top", "dedup_threshold", "mode", "jobs"});
    Read(l, "loop", "iterations", &c.loop.iterations);
    Read(l, "loop", "candidates", &c.loop.candidates);
    Read(l, "loop", "keep_top", &c.loop.keep_top);
    Read(l, "loop", "dedup_threshold", &c.loop.dedup_threshold);
    Read(l, "loop", "jobs", &c.loop.jobs);
    if (l.contains("mode")) c.loop.mode = ParseLoopMode(String(l, "loop", "mode", ""));
  }
  if (doc.contains("checks")) {
    const json& k = doc["checks"];
    OnlyKeys(k, "checks",
             {"max_nan_ratio", "min_column_std", "utility_folds", "utility_fail_folds"});
    CheckThresholds& t = c.loop.checks.thresholds;
    Read(k, "checks", "max_nan_ratio", &t.max_nan_ratio);
    Read(k, "checks", "min_column_std", &t.min_column_std);
    Read(k, "checks", "utility_folds", &t.utility_folds);
    Read(k, "checks", "utility_fail_folds", &t.utility_fail_folds);
  }
  if (doc.contains("limits")) {
    const json& m = doc["limits"];
    OnlyKeys(m, "limits", {"max_tokens_per_combination", "max_combinations"});
    Read(m, "limits", "max_tokens_per_combination",
         &c.loop.checks.limits.max_tokens_per_combination);
    Read(m, "limits", "max_combinations", &c.loop.checks.limits.max_combinations);
    if (c.loop.checks.limits.max_tokens_per_combination < 1 ||
        c.loop.checks.limits.max_combinations < 1) {
      Bad("limits", "limits must be >= 1");
    }
  }
  if (doc.contains("operators")) {
    std::vector<std::string> names;
    Read(doc, "root", "operators", &names);
    c.loop.allowed_operators = OperatorSet::FromNames(names);
  }
  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    OnlyKeys(s, "sampling", {"temperature", "top_p", "top_k", "max_new_tokens"});
    Read(s, "sampling", "temperature", &c.loop.sampling.temperature);
    Read(s, "sampling", "top_p", &c.loop.sampling.top_p);
    Read(s, "sampling", "top_k", &c.loop.sampling.top_k);
    Read(s, "sampling", "max_new_tokens", &c.loop.sampling.max_new_tokens);
  }
  if (doc.contains("refine")) {
    const json& r = doc["refine"];
    OnlyKeys(r, "refine", {"enhance", "utility", "variants_per_pair"});
    Read(r, "refine", "enhance", &c.refine.enhance);
    Read(r, "refine", "utility", &c.refine.utility);
    Read(r, "refine", "variants_per_pair", &c.refine.variants_per_pair);
  }
  if (doc.contains("policy")) {
    const json& p = doc["policy"];
    OnlyKeys(p, "policy",
             {"kind", "base_url", "model", "audit_log", "max_attempts", "initial_backoff_ms",
              "timeout_seconds", "max_in_flight", "send_top_k"});
    const std::string kind = String(p, "policy", "kind", "mock");
    if (kind == "mock") {
      c.policy = PolicyKind::kMock;
    } else if (kind == "http") {
      c.policy = PolicyKind::kHttp;
    } else {
      Bad("policy.kind", "expected mock or http, got '" + kind + "'");
    }
    Read(p, "policy", "base_url", &c.http.base_url);
    Read(p, "policy", "model", &c.http.model);
    Read(p, "policy", "audit_log", &c.http.audit_log_path);
    Read(p, "policy", "max_attempts", &c.http.max_attempts);
    Read(p, "policy", "initial_backoff_ms", &c.http.initial_backoff_ms);
    Read(p, "policy", "timeout_seconds", &c.http.timeout_seconds);
    Read(p, "policy", "max_in_flight", &c.http.max_in_flight);
    Read(p, "policy", "send_top_k", &c.http.send_top_k);
  }
  c.Propagate();
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRunConfig(buf.str());
}

Dataset LoadConfiguredDataset(const RunConfig& config) {
  if (config.data_path.empty()) Bad("data.path", "no dataset given");
  if (!config.task) Bad("data.task", "task must be classification or regression");
  return LoadCsv(config.data_path, config.target, *config.task);
}

std::unique_ptr<Policy> MakePolicy(const RunConfig& config) {
  if (config.policy == PolicyKind::kMock) return std::make_unique<MockPolicy>();
  HttpPolicyConfig http = config.http;
  if (http.api_key.empty()) http.api_key = ApiKeyFromEnvironment();
  if (http.base_url.empty()) {
    throw Error(ErrorCode::kPolicyUnavailable, "policy.base_url is required for http");
  }
  return std::make_unique<HttpPolicy>(std::move(http));
}

}  // namespace ftevolve
