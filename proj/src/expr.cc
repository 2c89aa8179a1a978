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

#include "ftevolve/expr.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>

namespace ftevolve {
namespace {

const std::array<OperatorDescriptor, kNumOpCodes>& BuiltinOperators() {
  static const std::array<OperatorDescriptor, kNumOpCodes> kOps = {{
      {OpCode::kSqrt, "sqrt", "sqrt", 1, OperatorGroup::kComplex},
      {OpCode::kSquare, "square", "square", 1, OperatorGroup::kComplex},
      {OpCode::kCube, "cube", "cube", 1, OperatorGroup::kComplex},
      {OpCode::kReciprocal, "reciprocal", "reciprocal", 1,
       OperatorGroup::kComplex},
      {OpCode::kLog, "log", "log", 1, OperatorGroup::kComplex},
      {OpCode::kSin, "sin", "sin", 1, OperatorGroup::kComplex},
      {OpCode::kCos, "cos", "cos", 1, OperatorGroup::kComplex},
      {OpCode::kTanh, "tanh", "tanh", 1, OperatorGroup::kComplex},
      {OpCode::kSigmoid, "sigmoid", "sigmoid", 1, OperatorGroup::kComplex},
      {OpCode::kStandard, "standard", "standard", 1, OperatorGroup::kSimple},
      {OpCode::kNormalize, "normalize", "normalize", 1, OperatorGroup::kSimple},
      {OpCode::kQuantile, "quantile", "quantile", 1, OperatorGroup::kComplex},
      {OpCode::kPlus, "plus", "+", 2, OperatorGroup::kSimple},
      {OpCode::kMinus, "minus", "-", 2, OperatorGroup::kSimple},
      {OpCode::kMultiply, "multiply", "*", 2, OperatorGroup::kSimple},
      {OpCode::kDivide, "divide", "/", 2, OperatorGroup::kSimple},
  }};
  return kOps;
}

constexpr std::string_view kSos = "<SOS>";
constexpr std::string_view kSep = "<SEP>";
constexpr std::string_view kEos = "<EOS>";

bool IsSeparator(char c) {
  return c == ',' || std::isspace(static_cast<unsigned char>(c));
}

std::vector<std::string_view> SplitTokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSeparator(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !IsSeparator(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

// Parses `f<i>` (1-based); returns the 0-based index or -1.
int ParseFeatureToken(std::string_view tok) {
  if (tok.size() < 2 || (tok[0] != 'f' && tok[0] != 'F')) return -1;
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || value < 1) {
    return -1;
  }
  return value - 1;
}

std::string Quote(std::string_view s) { return "'" + std::string(s) + "'"; }

Combination FinishCombination(std::vector<Token> tokens, int index,
                              const SequenceLimits& limits) {
  Combination comb{std::move(tokens)};
  if (comb.tokens.empty()) {
    throw Error(ErrorCode::kEmptyCombination,
                "combination " + std::to_string(index + 1) + " is empty");
  }
  if (auto diag = CheckStack(comb)) {
    throw Error(diag->code, "combination " + std::to_string(index + 1) + ": " +
                                diag->message);
  }
  if (static_cast<int>(comb.tokens.size()) > limits.max_tokens_per_combination) {
    throw Error(ErrorCode::kCombinationTooLong,
                "combination " + std::to_string(index + 1) + " has " +
                    std::to_string(comb.tokens.size()) + " tokens, max " +
                    std::to_string(limits.max_tokens_per_combination));
  }
  return comb;
}

std::string InfixOf(const Combination& comb) {
  std::vector<std::string> stack;
  for (const Token& t : comb.tokens) {
    if (t.is_feature()) {
      stack.push_back(RenderToken(t));
      continue;
    }
    const OperatorDescriptor& d = DescriptorOf(t.op);
    if (d.arity == 1) {
      if (stack.empty()) return "<invalid>";
      stack.back() = d.name + "(" + stack.back() + ")";
    } else {
      if (stack.size() < 2) return "<invalid>";
      std::string rhs = std::move(stack.back());
      stack.pop_back();
      stack.back() = "(" + stack.back() + d.symbol + rhs + ")";
    }
  }
  return stack.size() == 1 ? stack.back() : "<invalid>";
}

}  // namespace

const OperatorDescriptor& DescriptorOf(OpCode code) {
  return BuiltinOperators()[static_cast<std::size_t>(code)];
}

OperatorSet OperatorSet::Default() {
  const auto& ops = BuiltinOperators();
  return OperatorSet(std::vector<OperatorDescriptor>(ops.begin(), ops.end()));
}

OperatorSet OperatorSet::FromNames(std::span<const std::string> names) {
  const OperatorSet all = Default();
  std::vector<OperatorDescriptor> picked;
  for (const std::string& name : names) {
    const OperatorDescriptor* d = all.Find(name);
    if (d == nullptr) {
      throw Error(ErrorCode::kUnknownToken, "unknown operator " + Quote(name));
    }
    picked.push_back(*d);
  }
  return OperatorSet(std::move(picked));
}

OperatorSet::OperatorSet(std::vector<OperatorDescriptor> operators)
    : operators_(std::move(operators)) {
  std::set<std::string> seen;
  for (const auto& d : operators_) {
    if (d.arity != 1 && d.arity != 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "operator " + Quote(d.name) + " has arity " +
                      std::to_string(d.arity));
    }
    if (!seen.insert(d.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate operator " + Quote(d.name));
    }
  }
}

const OperatorDescriptor* OperatorSet::Find(std::string_view name_or_symbol) const {
  for (const auto& d : operators_) {
    if (d.name == name_or_symbol || d.symbol == name_or_symbol) return &d;
  }
  return nullptr;
}

const OperatorDescriptor* OperatorSet::Find(OpCode code) const {
  for (const auto& d : operators_) {
    if (d.code == code) return &d;
  }
  return nullptr;
}

std::vector<OpCode> OperatorSet::WithArity(int arity) const {
  std::vector<OpCode> out;
  for (const auto& d : operators_) {
    if (d.arity == arity) out.push_back(d.code);
  }
  return out;
}

bool OperatorSet::operator==(const OperatorSet& other) const {
  if (operators_.size() != other.operators_.size()) return false;
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    if (operators_[i].name != other.operators_[i].name) return false;
  }
  return true;
}

std::optional<Diagnostic> CheckStack(const Combination& combination) {
  if (combination.tokens.empty()) {
    return Diagnostic{ErrorCode::kEmptyCombination, -1, "empty combination"};
  }
  int depth = 0;
  for (std::size_t i = 0; i < combination.tokens.size(); ++i) {
    const Token& t = combination.tokens[i];
    if (t.is_feature()) {
      ++depth;
    } else if (t.is_operator()) {
      const int arity = DescriptorOf(t.op).arity;
      if (depth < arity) {
        return Diagnostic{ErrorCode::kStackUnderflow, -1,
                          "operator " + Quote(RenderToken(t)) + " at position " +
                              std::to_string(i + 1) + " needs " +
                              std::to_string(arity) + " operand(s), found " +
                              std::to_string(depth)};
      }
      depth -= arity - 1;
    } else {
      return Diagnostic{ErrorCode::kUnknownToken, -1,
                        "control token " + Quote(RenderToken(t)) +
                            " inside a combination"};
    }
  }
  if (depth != 1) {
    return Diagnostic{ErrorCode::kLeftoverOperands, -1,
                      std::to_string(depth) + " values left on the stack"};
  }
  return std::nullopt;
}

TransformationSequence ParseSequence(std::string_view text,
                                     const OperatorSet& ops, int feature_count,
                                     const SequenceLimits& limits) {
  std::vector<std::string_view> toks = SplitTokens(text);
  std::size_t begin = 0;
  std::size_t end = toks.size();
  if (begin < end && toks[begin] == kSos) ++begin;
  if (begin < end && toks[end - 1] == kEos) --end;
  if (begin == end) {
    throw Error(ErrorCode::kEmptySequence, "no tokens in sequence");
  }

  TransformationSequence seq;
  std::vector<Token> current;
  for (std::size_t i = begin; i < end; ++i) {
    std::string_view tok = toks[i];
    if (tok == kSep) {
      seq.combinations.push_back(FinishCombination(
          std::move(current), static_cast<int>(seq.combinations.size()), limits));
      current.clear();
      continue;
    }
    if (tok == kSos || tok == kEos) {
      throw Error(ErrorCode::kUnknownToken,
                  Quote(tok) + " is only allowed at the sequence boundary");
    }
    if (int f = ParseFeatureToken(tok); f >= 0) {
      if (f >= feature_count) {
        throw Error(ErrorCode::kFeatureOutOfRange,
                    Quote(tok) + " but the dataset has " +
                        std::to_string(feature_count) + " features");
      }
      current.push_back(Token::Feature(f));
      continue;
    }
    if (const OperatorDescriptor* d = ops.Find(tok)) {
      current.push_back(Token::Operator(d->code));
      continue;
    }
    throw Error(ErrorCode::kUnknownToken, Quote(tok));
  }
  seq.combinations.push_back(FinishCombination(
      std::move(current), static_cast<int>(seq.combinations.size()), limits));

  if (static_cast<int>(seq.combinations.size()) > limits.max_combinations) {
    throw Error(ErrorCode::kSequenceTooLong,
                std::to_string(seq.combinations.size()) +
                    " combinations, max " +
                    std::to_string(limits.max_combinations));
  }
  return seq;
}

Combination ParseCombination(std::string_view text, const OperatorSet& ops,
                             int feature_count, const SequenceLimits& limits) {
  TransformationSequence seq = ParseSequence(text, ops, feature_count, limits);
  if (seq.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected a single combination, got " +
                    std::to_string(seq.size()));
  }
  return std::move(seq.combinations.front());
}

std::string RenderToken(const Token& token) {
  switch (token.kind) {
    case Token::Kind::kFeature: return "f" + std::to_string(token.feature + 1);
    case Token::Kind::kOperator: return DescriptorOf(token.op).symbol;
    case Token::Kind::kSos: return std::string(kSos);
    case Token::Kind::kSep: return std::string(kSep);
    case Token::Kind::kEos: return std::string(kEos);
  }
  return "?";
}

std::string RenderCombination(const Combination& combination, RenderStyle style) {
  if (style == RenderStyle::kInfix) return InfixOf(combination);
  std::string out;
  for (std::size_t i = 0; i < combination.tokens.size(); ++i) {
    if (i > 0) out += ',';
    out += RenderToken(combination.tokens[i]);
  }
  return out;
}

std::string RenderSequence(const TransformationSequence& sequence,
                           RenderStyle style) {
  const std::string_view joiner = style == RenderStyle::kPostfix ? ",<SEP>," : "; ";
  std::string out;
  for (std::size_t i = 0; i < sequence.combinations.size(); ++i) {
    if (i > 0) out += joiner;
    out += RenderCombination(sequence.combinations[i], style);
  }
  return out;
}

std::vector<Diagnostic> ValidateStructure(const TransformationSequence& sequence,
                                          const OperatorSet& ops,
                                          int feature_count,
                                          const SequenceLimits& limits) {
  std::vector<Diagnostic> out;
  if (sequence.combinations.empty()) {
    out.push_back({ErrorCode::kEmptySequence, -1, "sequence has no combinations"});
  }
  if (static_cast<int>(sequence.combinations.size()) > limits.max_combinations) {
    out.push_back({ErrorCode::kSequenceTooLong, -1,
                   std::to_string(sequence.combinations.size()) +
                       " combinations, max " +
                       std::to_string(limits.max_combinations)});
  }
  for (std::size_t c = 0; c < sequence.combinations.size(); ++c) {
    const int idx = static_cast<int>(c);
    const Combination& comb = sequence.combinations[c];
    if (static_cast<int>(comb.tokens.size()) > limits.max_tokens_per_combination) {
      out.push_back({ErrorCode::kCombinationTooLong, idx,
                     std::to_string(comb.tokens.size()) + " tokens, max " +
                         std::to_string(limits.max_tokens_per_combination)});
    }
    for (const Token& t : comb.tokens) {
      if (t.is_feature() && (t.feature < 0 || t.feature >= feature_count)) {
        out.push_back({ErrorCode::kFeatureOutOfRange, idx,
                       RenderToken(t) + " but the dataset has " +
                           std::to_string(feature_count) + " features"});
      } else if (t.is_operator() && !ops.Contains(t.op)) {
        out.push_back({ErrorCode::kUnknownToken, idx,
                       "operator " + Quote(DescriptorOf(t.op).name) +
                           " is not in the operator set"});
      }
    }
    if (auto diag = CheckStack(comb)) {
      diag->combination_index = idx;
      out.push_back(std::move(*diag));
    }
  }
  return out;
}

std::size_t VocabularySize(const OperatorSet& ops, int feature_count) {
  return ops.size() + static_cast<std::size_t>(std::max(feature_count, 0)) + 3;
}

}  // namespace ftevolve
