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

#include "ftevolve/policy.h"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

#include "ftevolve/library.h"
#include "seed.h"

namespace ftevolve {
namespace {

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string_view TrimView(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view MetricPhrase(TaskKind task) {
  return task == TaskKind::kClassification ? "F1 score" : "1-RAE";
}

TransformationSequence ParseUnderRules(std::string_view text,
                                       const GenerationRules& rules) {
  TransformationSequence seq = ParseSequence(text, OperatorSet::Default(),
                                             rules.feature_count, rules.limits);
  for (const Combination& c : seq.combinations) {
    for (const Token& t : c.tokens) {
      if (t.is_operator() && !rules.allowed_operators.Contains(t.op)) {
        throw Error(ErrorCode::kDisallowedOperator,
                    "'" + DescriptorOf(t.op).name + "' is not an allowed operator");
      }
    }
  }
  return seq;
}

template <typename T>
const T& Pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, items.size() - 1);
  return items[dist(rng)];
}

int PickInt(int lo, int hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

int OtherFeature(int f, int n, std::mt19937_64& rng) {
  const int g = PickInt(0, n - 2, rng);
  return g >= f ? g + 1 : g;
}

Combination RandomCombination(const GenerationRules& rules, std::mt19937_64& rng) {
  const std::vector<OpCode> unary = rules.allowed_operators.WithArity(1);
  const std::vector<OpCode> binary = rules.allowed_operators.WithArity(2);
  const int n = rules.feature_count;
  const int f = PickInt(0, n - 1, rng);
  std::vector<int> forms;
  if (!unary.empty()) forms.push_back(0);
  if (!binary.empty() && n >= 2) forms.push_back(1);
  if (!unary.empty() && !binary.empty() && n >= 2) {
    forms.push_back(2);
    forms.push_back(3);
  }
  if (forms.empty()) return {{Token::Feature(f)}};
  Combination c;
  switch (Pick(forms, rng)) {
    case 0:  // u(f)
      c.tokens = {Token::Feature(f), Token::Operator(Pick(unary, rng))};
      break;
    case 1:  // f b g
      c.tokens = {Token::Feature(f), Token::Feature(OtherFeature(f, n, rng)),
                  Token::Operator(Pick(binary, rng))};
      break;
    case 2:  // u(f b g)
      c.tokens = {Token::Feature(f), Token::Feature(OtherFeature(f, n, rng)),
                  Token::Operator(Pick(binary, rng)), Token::Operator(Pick(unary, rng))};
      break;
    default:  // u(f) b g
      c.tokens = {Token::Feature(f), Token::Operator(Pick(unary, rng)),
                  Token::Feature(OtherFeature(f, n, rng)),
                  Token::Operator(Pick(binary, rng))};
      break;
  }
  if (static_cast<int>(c.tokens.size()) > rules.limits.max_tokens_per_combination) {
    return {{Token::Feature(f)}};
  }
  return c;
}

// Rewrites a demonstration so it satisfies `rules`: out-of-set operators are
// replaced by an allowed operator of the same arity, out-of-range features
// wrap around, and combinations that cannot be repaired are dropped.
TransformationSequence Sanitize(const TransformationSequence& seq,
                                const GenerationRules& rules, std::mt19937_64& rng) {
  TransformationSequence out;
  for (const Combination& c : seq.combinations) {
    if (static_cast<int>(c.tokens.size()) > rules.limits.max_tokens_per_combination) {
      continue;
    }
    Combination fixed = c;
    bool ok = true;
    for (Token& t : fixed.tokens) {
      if (t.is_feature()) {
        t.feature = ((t.feature % rules.feature_count) + rules.feature_count) %
                    rules.feature_count;
      } else if (!rules.allowed_operators.Contains(t.op)) {
        const auto same = rules.allowed_operators.WithArity(DescriptorOf(t.op).arity);
        if (same.empty()) {
          ok = false;
          break;
        }
        t.op = Pick(same, rng);
      }
    }
    if (ok) out.combinations.push_back(std::move(fixed));
    if (static_cast<int>(out.size()) == rules.limits.max_combinations) break;
  }
  return out;
}

bool Contains(const TransformationSequence& seq, const Combination& c) {
  return std::find(seq.combinations.begin(), seq.combinations.end(), c) !=
         seq.combinations.end();
}

}  // namespace

std::string PromptBundle::UserText() const {
  return dataset_summary + "\n" + operator_block + "\n" + demonstration_block +
         "\n" + instruction_text;
}

std::string PromptBundle::FullText() const {
  return system_text + "\n\n" + UserText();
}

PromptBundle BuildPrompt(const CoTTrajectory& trajectory, const Dataset& dataset,
                         const GenerationRules& rules, PromptKind kind) {
  std::vector<Demonstration> demos;
  for (const Experience& e : trajectory.steps) demos.push_back({e.sequence, e.score.value});
  return BuildPrompt(demos, dataset, rules, kind);
}

PromptBundle BuildPrompt(std::span<const Demonstration> demonstrations,
                         const Dataset& dataset, const GenerationRules& rules,
                         PromptKind kind) {
  PromptBundle p;
  p.rules = rules;
  p.demonstrations.assign(demonstrations.begin(), demonstrations.end());
  std::stable_sort(p.demonstrations.begin(), p.demonstrations.end(),
                   [](const Demonstration& a, const Demonstration& b) {
                     return a.score < b.score;
                   });

  p.system_text =
      "You are a feature transformation assistant for tabular machine learning. "
      "You write transformation sequences in postfix notation; each combination "
      "creates one new feature, and the transformed dataset is scored by a "
      "downstream model (" +
      std::string(MetricPhrase(dataset.task())) + ", higher is better).";

  std::string summary = "Dataset: " + dataset.name() + " (" +
                        std::to_string(dataset.rows()) + " rows, " +
                        std::to_string(dataset.feature_count()) + " features, task: " +
                        std::string(TaskName(dataset.task())) + ")\nFeatures:\n";
  for (int i = 0; i < dataset.feature_count(); ++i) {
    const std::vector<double>& col = dataset.column(i);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    summary += "f" + std::to_string(i + 1) + ": " + dataset.columns()[static_cast<std::size_t>(i)].name +
               ", mean=" + Format("%.6g", mean) + ", std=" + Format("%.6g", StdDev(col)) + "\n";
  }
  p.dataset_summary = std::move(summary);

  std::string ops = "Operators (name/arity, token):\n";
  for (const OperatorDescriptor& d : rules.allowed_operators.operators()) {
    ops += "- " + d.name + "/" + std::to_string(d.arity) + " (token: " + d.symbol + ")\n";
  }
  p.operator_block = std::move(ops);

  std::string demo = kind == PromptKind::kGeneration
                         ? "Verified sequences, ordered from lower to higher score:\n"
                         : "Two verified sequences, lower score first:\n";
  for (std::size_t j = 0; j < p.demonstrations.size(); ++j) {
    demo += "Step " + std::to_string(j + 1) + ": Sequence: " +
            RenderSequence(p.demonstrations[j].sequence) +
            "; Score: " + Format("%.4f", p.demonstrations[j].score) + "\n";
  }
  p.demonstration_block = std::move(demo);

  const std::string format =
      "Write postfix tokens separated by commas: features f1..f" +
      std::to_string(rules.feature_count) +
      ", operators by the tokens listed above, and <SEP> between combinations. "
      "Use at most " +
      std::to_string(rules.limits.max_combinations) + " combinations of at most " +
      std::to_string(rules.limits.max_tokens_per_combination) +
      " tokens each. Reply with exactly one sequence between the lines " +
      std::string(kBeginMarker) + " and " + std::string(kEndMarker) + ".\n";
  if (kind == PromptKind::kGeneration) {
    p.instruction_text =
        "Following the improvement trend of the steps above, write one new "
        "transformation sequence that should score higher than the last step. " +
        format;
  } else {
    p.instruction_text =
        "Propose one intermediate or nearby variant that fills the gap between "
        "the two sequences and scores at least as well as the first. " +
        format;
  }
  return p;
}

TransformationSequence ParseResponse(std::string_view text,
                                     const GenerationRules& rules) {
  const std::size_t begin = text.find(kBeginMarker);
  if (begin != std::string_view::npos) {
    const std::size_t start = begin + kBeginMarker.size();
    const std::size_t end = text.find(kEndMarker, start);
    std::string_view body = text.substr(
        start, end == std::string_view::npos ? std::string_view::npos : end - start);
    return ParseUnderRules(TrimView(body), rules);
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = TrimView(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      return ParseUnderRules(line, rules);
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::kNoSequenceFound, "response contains no transformation sequence");
}

std::string WrapInMarkers(const TransformationSequence& sequence) {
  return std::string(kBeginMarker) + "\n" + RenderSequence(sequence) + "\n" +
         std::string(kEndMarker) + "\n";
}

std::string MockPolicy::Generate(const PromptBundle& prompt,
                                 const SamplingSettings& /*settings*/,
                                 std::uint64_t seed) {
  const GenerationRules& rules = prompt.rules;
  std::mt19937_64 rng(internal::DeriveSeed(Fnv1a64(prompt.FullText()), seed));
  if (rules.feature_count < 1 || rules.limits.max_combinations < 1 ||
      rules.limits.max_tokens_per_combination < 1) {
    return "no valid sequence exists under these rules\n";
  }

  // Edits start from the best (last) demonstration.
  TransformationSequence base;
  const std::size_t base_index =
      prompt.demonstrations.empty() ? 0 : prompt.demonstrations.size() - 1;
  if (!prompt.demonstrations.empty()) {
    base = Sanitize(prompt.demonstrations[base_index].sequence, rules, rng);
  }
  if (base.combinations.empty()) {
    base.combinations.push_back(RandomCombination(rules, rng));
    return WrapInMarkers(base);
  }

  struct Site {
    std::size_t comb;
    std::size_t pos;
  };
  std::vector<Site> swappable;
  std::vector<Site> features;
  for (std::size_t c = 0; c < base.size(); ++c) {
    const auto& toks = base.combinations[c].tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].is_feature()) {
        features.push_back({c, i});
      } else if (rules.allowed_operators.WithArity(DescriptorOf(toks[i].op).arity).size() >= 2) {
        swappable.push_back({c, i});
      }
    }
  }
  // Combinations from the other demonstrations, for append and crossover.
  std::vector<Combination> borrowed;
  for (std::size_t d = 0; d < prompt.demonstrations.size(); ++d) {
    if (d == base_index) continue;
    for (Combination& c : Sanitize(prompt.demonstrations[d].sequence, rules, rng).combinations) {
      if (!Contains(base, c) && std::find(borrowed.begin(), borrowed.end(), c) == borrowed.end()) {
        borrowed.push_back(std::move(c));
      }
    }
  }

  enum Kind { kSwap, kSubstitute, kAppend, kCrossover };
  std::vector<Kind> kinds;
  if (!swappable.empty()) kinds.push_back(kSwap);
  if (rules.feature_count >= 2 && !features.empty()) kinds.push_back(kSubstitute);
  if (static_cast<int>(base.size()) < rules.limits.max_combinations) kinds.push_back(kAppend);
  if (!borrowed.empty()) kinds.push_back(kCrossover);
  if (kinds.empty()) return WrapInMarkers(base);

  switch (Pick(kinds, rng)) {
    case kSwap: {
      const Site s = Pick(swappable, rng);
      Token& t = base.combinations[s.comb].tokens[s.pos];
      std::vector<OpCode> others;
      for (OpCode op : rules.allowed_operators.WithArity(DescriptorOf(t.op).arity)) {
        if (op != t.op) others.push_back(op);
      }
      t.op = Pick(others, rng);
      break;
    }
    case kSubstitute: {
      const Site s = Pick(features, rng);
      Token& t = base.combinations[s.comb].tokens[s.pos];
      t.feature = OtherFeature(t.feature, rules.feature_count, rng);
      break;
    }
    case kAppend: {
      Combination next;
      if (!borrowed.empty() && std::bernoulli_distribution(0.5)(rng)) {
        next = Pick(borrowed, rng);
      } else {
        next = RandomCombination(rules, rng);
        for (int attempt = 0; attempt < 5 && Contains(base, next); ++attempt) {
          next = RandomCombination(rules, rng);
        }
      }
      base.combinations.push_back(std::move(next));
      break;
    }
    case kCrossover: {
      std::uniform_int_distribution<std::size_t> at(0, base.size() - 1);
      base.combinations[at(rng)] = Pick(borrowed, rng);
      break;
    }
  }
  return WrapInMarkers(base);
}

std::string ApiKeyFromEnvironment() {
  const char* key = std::getenv("FT_EVOLVE_API_KEY");
  return key == nullptr ? std::string() : std::string(key);
}

}  // namespace ftevolve
