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

#ifndef FTEVOLVE_EXPR_H_
#define FTEVOLVE_EXPR_H_

// Postfix transformation DSL.
//
// A combination is a postfix program over original-feature tokens and
// operator tokens that produces one new column. A transformation sequence is
// an ordered list of combinations. Surface syntax is comma (or whitespace)
// separated tokens, features written `f<i>` with 1-based i, combinations
// separated by `<SEP>`, with optional `<SOS>` / `<EOS>` framing:
//
//   <SOS>,f1,f2,/,<SEP>,f1,sqrt,<EOS>
//
// Internally feature indices are 0-based.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftevolve/error.h"

namespace ftevolve {

enum class OpCode : std::uint8_t {
  kSqrt,
  kSquare,
  kCube,
  kReciprocal,
  kLog,
  kSin,
  kCos,
  kTanh,
  kSigmoid,
  kStandard,
  kNormalize,
  kQuantile,
  kPlus,
  kMinus,
  kMultiply,
  kDivide,
};

inline constexpr int kNumOpCodes = 16;

// "simple" = linear and basic scaling, "complex" = nonlinear and
// distribution-shaping.
enum class OperatorGroup { kSimple, kComplex };

struct OperatorDescriptor {
  OpCode code;
  std::string name;    // e.g. "divide"
  std::string symbol;  // surface token, e.g. "/" (equals name for unary ops)
  int arity;
  OperatorGroup group;
};

// Descriptor for any of the built-in operators.
const OperatorDescriptor& DescriptorOf(OpCode code);

class OperatorSet {
 public:
  // The 12 unary + 4 binary operators.
  static OperatorSet Default();
  // Subset of the built-in operators, looked up by name or symbol. Throws
  // kUnknownToken for names that are not built-in operators.
  static OperatorSet FromNames(std::span<const std::string> names);

  OperatorSet() = default;
  // Throws kInvalidArgument on duplicate names or arity outside {1, 2}.
  explicit OperatorSet(std::vector<OperatorDescriptor> operators);

  const std::vector<OperatorDescriptor>& operators() const {
    return operators_;
  }
  std::size_t size() const { return operators_.size(); }
  bool empty() const { return operators_.empty(); }

  // Matches either the operator name or its surface symbol.
  const OperatorDescriptor* Find(std::string_view name_or_symbol) const;
  const OperatorDescriptor* Find(OpCode code) const;
  bool Contains(OpCode code) const { return Find(code) != nullptr; }

  // Operators of the given arity, in set order.
  std::vector<OpCode> WithArity(int arity) const;

  bool operator==(const OperatorSet& other) const;

 private:
  std::vector<OperatorDescriptor> operators_;
};

struct Token {
  enum class Kind : std::uint8_t { kFeature, kOperator, kSos, kSep, kEos };

  Kind kind = Kind::kFeature;
  int feature = 0;  // 0-based, meaningful for kFeature
  OpCode op = OpCode::kPlus;  // meaningful for kOperator

  static Token Feature(int index) { return {Kind::kFeature, index, OpCode::kPlus}; }
  static Token Operator(OpCode code) { return {Kind::kOperator, 0, code}; }

  bool is_feature() const { return kind == Kind::kFeature; }
  bool is_operator() const { return kind == Kind::kOperator; }

  bool operator==(const Token& other) const {
    if (kind != other.kind) return false;
    if (kind == Kind::kFeature) return feature == other.feature;
    if (kind == Kind::kOperator) return op == other.op;
    return true;
  }
};

struct Combination {
  std::vector<Token> tokens;
  bool operator==(const Combination&) const = default;
};

struct TransformationSequence {
  std::vector<Combination> combinations;
  bool operator==(const TransformationSequence&) const = default;
  std::size_t size() const { return combinations.size(); }
};

struct SequenceLimits {
  int max_tokens_per_combination = 15;
  int max_combinations = 10;
};

enum class RenderStyle { kPostfix, kInfix };

struct Diagnostic {
  ErrorCode code;
  int combination_index;  // -1 when the issue concerns the whole sequence
  std::string message;
};

// Throws Error with kUnknownToken, kFeatureOutOfRange, kStackUnderflow,
// kLeftoverOperands, kEmptySequence, kEmptyCombination, kSequenceTooLong or
// kCombinationTooLong. A successful parse always validates cleanly.
TransformationSequence ParseSequence(std::string_view text,
                                     const OperatorSet& ops, int feature_count,
                                     const SequenceLimits& limits = {});

// Parses a single combination (no <SEP> allowed).
Combination ParseCombination(std::string_view text, const OperatorSet& ops,
                             int feature_count,
                             const SequenceLimits& limits = {});

std::string RenderToken(const Token& token);
std::string RenderCombination(const Combination& combination,
                              RenderStyle style = RenderStyle::kPostfix);
// Never emits <SOS>/<EOS>. Infix combinations are joined with "; ".
std::string RenderSequence(const TransformationSequence& sequence,
                           RenderStyle style = RenderStyle::kPostfix);

// Empty result iff the sequence is structurally valid under the given
// operator set, feature count and limits.
std::vector<Diagnostic> ValidateStructure(const TransformationSequence& sequence,
                                          const OperatorSet& ops,
                                          int feature_count,
                                          const SequenceLimits& limits = {});

// Checks the stack discipline of one combination; nullopt when valid.
std::optional<Diagnostic> CheckStack(const Combination& combination);

// |O| + feature_count + 3 (operators, feature tokens, SOS/SEP/EOS).
std::size_t VocabularySize(const OperatorSet& ops, int feature_count);

}  // namespace ftevolve

#endif  // FTEVOLVE_EXPR_H_
