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

#ifndef FTEVOLVE_POLICY_H_
#define FTEVOLVE_POLICY_H_

// Generation policy: prompt construction, response parsing, and the policy
// implementations (a deterministic mutation mock and a chat-completions HTTP
// client).

#include <cstdint>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "ftevolve/expr.h"
#include "ftevolve/refine.h"
#include "ftevolve/table.h"

namespace ftevolve {

struct GenerationRules {
  OperatorSet allowed_operators = OperatorSet::Default();
  int feature_count = 0;
  SequenceLimits limits;
};

struct SamplingSettings {
  double temperature = 0.7;
  double top_p = 0.9;
  int top_k = 50;
  int max_new_tokens = 500;
};

struct Demonstration {
  TransformationSequence sequence;
  double score = 0.0;
};

enum class PromptKind { kGeneration, kEnhancement };

struct PromptBundle {
  std::string system_text;
  std::string dataset_summary;
  std::string operator_block;
  std::string demonstration_block;
  std::string instruction_text;

  // Structured copies of what the text encodes, for in-process policies.
  std::vector<Demonstration> demonstrations;  // ascending score
  GenerationRules rules;

  // Everything after the system text, as sent in the user message.
  std::string UserText() const;
  std::string FullText() const;
};

inline constexpr std::string_view kBeginMarker = "BEGIN_SEQUENCE";
inline constexpr std::string_view kEndMarker = "END_SEQUENCE";

// Deterministic: identical inputs give byte-identical prompts.
PromptBundle BuildPrompt(const CoTTrajectory& trajectory, const Dataset& dataset,
                         const GenerationRules& rules,
                         PromptKind kind = PromptKind::kGeneration);
// Prompt built directly from demonstrations (used for one-step contexts).
PromptBundle BuildPrompt(std::span<const Demonstration> demonstrations,
                         const Dataset& dataset, const GenerationRules& rules,
                         PromptKind kind = PromptKind::kGeneration);

// Extracts the first BEGIN_SEQUENCE ... END_SEQUENCE block (falling back to
// the first line that parses as a sequence) and enforces the rules. Throws
// kNoSequenceFound, kDisallowedOperator or the expr parse errors.
TransformationSequence ParseResponse(std::string_view text,
                                     const GenerationRules& rules);

std::string WrapInMarkers(const TransformationSequence& sequence);

class Policy {
 public:
  virtual ~Policy() = default;
  // Returns the raw model text for one call. Must be safe to call
  // concurrently.
  virtual std::string Generate(const PromptBundle& prompt,
                               const SamplingSettings& settings,
                               std::uint64_t seed) = 0;
  virtual std::string_view name() const = 0;
};

// Takes the best demonstration and applies one seeded mutation: swap an
// operator for another of the same arity, substitute one feature index,
// append one valid combination (borrowed from another demonstration or
// freshly drawn) or replace one combination with a borrowed one. Output always satisfies the prompt's rules. Deterministic
// in (prompt, seed); never throws.
class MockPolicy final : public Policy {
 public:
  std::string Generate(const PromptBundle& prompt, const SamplingSettings& settings,
                       std::uint64_t seed) override;
  std::string_view name() const override { return "mock"; }
};

struct HttpPolicyConfig {
  // e.g. "https://api.openai.com/v1"; requests go to <base_url>/chat/completions.
  std::string base_url;
  std::string model;
  std::string api_key;
  std::string audit_log_path;  // JSONL of raw requests/responses; empty = off
  int max_attempts = 3;
  int initial_backoff_ms = 500;
  int timeout_seconds = 120;
  int max_in_flight = 4;
  bool send_top_k = false;
};

// Reads FT_EVOLVE_API_KEY; empty when unset.
std::string ApiKeyFromEnvironment();

class HttpPolicy final : public Policy {
 public:
  // Throws kInvalidArgument for an unparsable base URL.
  explicit HttpPolicy(HttpPolicyConfig config);
  ~HttpPolicy() override;

  // Throws kEndpointUnreachable, kAuthFailure, kMalformedEndpointResponse.
  std::string Generate(const PromptBundle& prompt, const SamplingSettings& settings,
                       std::uint64_t seed) override;
  std::string_view name() const override { return "http"; }

 private:
  void Audit(const std::string& line);

  HttpPolicyConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<> in_flight_;
  std::mutex audit_mu_;
};

}  // namespace ftevolve

#endif  // FTEVOLVE_POLICY_H_
