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

#include "test_support.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace ftevolve::testing {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
using Vec = std::vector<double>;

// Emits a random expression of exactly `size` tokens in postfix order.
void Grow(std::mt19937_64& rng, const std::vector<OpCode>& unary,
          const std::vector<OpCode>& binary, int feature_count, int size,
          std::vector<Token>* out) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  if (size == 1) {
    out->push_back(Token::Feature(pick(feature_count)));
    return;
  }
  const bool can_unary = !unary.empty();
  const bool can_binary = !binary.empty() && size >= 3;
  bool use_binary = can_binary && (!can_unary || pick(2) == 0);
  if (!can_unary && !can_binary) {
    out->push_back(Token::Feature(pick(feature_count)));
    return;
  }
  if (use_binary) {
    const int left = 1 + pick(size - 2);
    Grow(rng, unary, binary, feature_count, left, out);
    Grow(rng, unary, binary, feature_count, size - 1 - left, out);
    out->push_back(Token::Operator(binary[static_cast<std::size_t>(pick(static_cast<int>(binary.size())))]));
  } else {
    Grow(rng, unary, binary, feature_count, size - 1, out);
    out->push_back(Token::Operator(unary[static_cast<std::size_t>(pick(static_cast<int>(unary.size())))]));
  }
}

// Column semantics written from the operator definitions.
Vec Map(const Vec& x, double (*f)(double)) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::isnan(x[i]) ? kNaN : f(x[i]);
  return out;
}

double Clean(double v) { return std::isfinite(v) ? v : kNaN; }

Vec Unary(const std::string& name, const Vec& x) {
  Vec out;
  if (name == "sqrt") out = Map(x, [](double v) { return v < 0 ? kNaN : std::sqrt(v); });
  else if (name == "square") out = Map(x, [](double v) { return v * v; });
  else if (name == "cube") out = Map(x, [](double v) { return v * v * v; });
  else if (name == "reciprocal")
    out = Map(x, [](double v) { return std::fabs(v) < 1e-12 ? kNaN : 1.0 / v; });
  else if (name == "log") out = Map(x, [](double v) { return v <= 0 ? kNaN : std::log(v); });
  else if (name == "sin") out = Map(x, [](double v) { return std::sin(v); });
  else if (name == "cos") out = Map(x, [](double v) { return std::cos(v); });
  else if (name == "tanh") out = Map(x, [](double v) { return std::tanh(v); });
  else if (name == "sigmoid") out = Map(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  else {
    Vec finite;
    for (double v : x) {
      if (std::isfinite(v)) finite.push_back(v);
    }
    out.assign(x.size(), kNaN);
    if (name == "standard") {
      if (finite.empty()) return out;
      double mean = 0;
      for (double v : finite) mean += v;
      mean /= static_cast<double>(finite.size());
      double var = 0;
      for (double v : finite) var += (v - mean) * (v - mean);
      const double sd = std::max(std::sqrt(var / static_cast<double>(finite.size())), 1e-12);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isfinite(x[i])) out[i] = (x[i] - mean) / sd;
      }
    } else if (name == "normalize") {
      if (finite.empty()) return out;
      const auto [lo, hi] = std::minmax_element(finite.begin(), finite.end());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) continue;
        out[i] = *hi == *lo ? 0.0 : (x[i] - *lo) / (*hi - *lo);
      }
    } else if (name == "quantile") {
      // Average 0-based rank by counting: below + (ties - 1) / 2.
      const double n = static_cast<double>(finite.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) continue;
        double below = 0, ties = 0;
        for (double v : finite) {
          below += v < x[i];
          ties += v == x[i];
        }
        const double rank = below + (ties - 1) / 2.0;
        out[i] = n > 1 ? rank / (n - 1) : 0.0;
      }
    } else {
      throw std::runtime_error("oracle: unknown unary '" + name + "'");
    }
  }
  for (double& v : out) v = Clean(v);
  return out;
}

Vec Binary(char op, const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) {
      out[i] = kNaN;
      continue;
    }
    switch (op) {
      case '+': out[i] = a[i] + b[i]; break;
      case '-': out[i] = a[i] - b[i]; break;
      case '*': out[i] = a[i] * b[i]; break;
      case '/': out[i] = std::fabs(b[i]) < 1e-12 ? kNaN : a[i] / b[i]; break;
      default: throw std::runtime_error(std::string("oracle: unknown binary ") + op);
    }
    out[i] = Clean(out[i]);
  }
  return out;
}

struct InfixParser {
  const std::string& s;
  const Dataset& d;
  std::size_t pos = 0;

  // expr := 'f' digits | name '(' expr ')' | '(' expr op expr ')'
  Vec Expr() {
    if (pos >= s.size()) throw std::runtime_error("oracle: unexpected end");
    if (s[pos] == '(') {
      ++pos;
      Vec lhs = Expr();
      const char op = s.at(pos++);
      Vec rhs = Expr();
      Expect(')');
      return Binary(op, lhs, rhs);
    }
    std::size_t start = pos;
    while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
    const std::string word = s.substr(start, pos - start);
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      Vec inner = Expr();
      Expect(')');
      return Unary(word, inner);
    }
    if (word.size() < 2 || word[0] != 'f') throw std::runtime_error("oracle: bad token " + word);
    const int index = std::stoi(word.substr(1)) - 1;
    return d.column(index);
  }

  void Expect(char c) {
    if (pos >= s.size() || s[pos] != c) {
      throw std::runtime_error(std::string("oracle: expected ") + c + " at " + std::to_string(pos));
    }
    ++pos;
  }
};

}  // namespace

Dataset RatioFixture(std::uint64_t seed, int rows, int features, double noise_std) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::normal_distribution<double> noise(0.0, noise_std);
  std::vector<Column> cols(static_cast<std::size_t>(features));
  for (int j = 0; j < features; ++j) cols[static_cast<std::size_t>(j)].name = "x" + std::to_string(j + 1);
  std::vector<double> y;
  for (int i = 0; i < rows; ++i) {
    for (auto& c : cols) c.values.push_back(u(rng));
    y.push_back(cols[0].values.back() / cols[1].values.back() + noise(rng));
  }
  return Dataset("ratio", std::move(cols), std::move(y), TaskKind::kRegression);
}

Dataset RandomTable(std::uint64_t seed, int rows, int features) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::bernoulli_distribution zero(0.05);
  std::vector<Column> cols(static_cast<std::size_t>(features));
  for (int j = 0; j < features; ++j) cols[static_cast<std::size_t>(j)].name = "c" + std::to_string(j + 1);
  std::vector<double> y;
  for (int i = 0; i < rows; ++i) {
    for (auto& c : cols) c.values.push_back(zero(rng) ? 0.0 : u(rng));
    y.push_back(u(rng));
  }
  return Dataset("random", std::move(cols), std::move(y), TaskKind::kRegression);
}

Combination RandomCombination(std::mt19937_64& rng, const OperatorSet& ops,
                              int feature_count, int max_tokens) {
  const std::vector<OpCode> unary = ops.WithArity(1);
  const std::vector<OpCode> binary = ops.WithArity(2);
  const int size = std::uniform_int_distribution<int>(1, max_tokens)(rng);
  Combination c;
  Grow(rng, unary, binary, feature_count, size, &c.tokens);
  return c;
}

TransformationSequence RandomSequence(std::mt19937_64& rng, const OperatorSet& ops,
                                      int feature_count, const SequenceLimits& limits) {
  TransformationSequence s;
  const int n = std::uniform_int_distribution<int>(1, limits.max_combinations)(rng);
  for (int i = 0; i < n; ++i) {
    s.combinations.push_back(
        RandomCombination(rng, ops, feature_count, limits.max_tokens_per_combination));
  }
  return s;
}

std::vector<double> InfixOracle(const std::string& infix, const Dataset& dataset) {
  InfixParser p{infix, dataset};
  Vec out = p.Expr();
  if (p.pos != infix.size()) throw std::runtime_error("oracle: trailing input in " + infix);
  return out;
}

Experience MakeExperience(const std::string& postfix, double score,
                          const DatasetSignature& dataset, int feature_count) {
  Experience e;
  e.sequence = ParseSequence(postfix, OperatorSet::Default(), feature_count, {1 << 10, 1 << 10});
  e.score = Score{score, Metric::kOneMinusRae};
  e.dataset = dataset;
  e.origin = Origin::kRl;
  return e;
}

namespace {

std::vector<std::pair<std::string, int>> OracleSignature(const Experience& e) {
  std::map<std::string, int> counts;
  for (const Combination& c : e.sequence.combinations) {
    for (const Token& t : c.tokens) {
      if (t.is_operator()) ++counts[DescriptorOf(t.op).name];
    }
  }
  std::vector<std::pair<std::string, int>> sig;
  for (const auto& [name, n] : counts) sig.emplace_back(name, std::min(n, 3));
  return sig;
}

double OracleSimilarity(const Experience& a, const Experience& b) {
  std::set<std::string> sa, sb, all;
  for (const Combination& c : a.sequence.combinations) sa.insert(RenderCombination(c));
  for (const Combination& c : b.sequence.combinations) sb.insert(RenderCombination(c));
  int common = 0;
  for (const auto& s : sa) common += sb.count(s) > 0;
  all = sa;
  all.insert(sb.begin(), sb.end());
  return all.empty() ? 1.0 : static_cast<double>(common) / static_cast<double>(all.size());
}

}  // namespace

double OracleEntropy(const std::vector<Experience>& selection) {
  std::map<std::vector<std::pair<std::string, int>>, int> groups;
  for (const auto& e : selection) ++groups[OracleSignature(e)];
  double h = 0;
  for (const auto& [sig, n] : groups) {
    const double p = static_cast<double>(n) / static_cast<double>(selection.size());
    h -= p * std::log(p);
  }
  return h;
}

double OracleRedundancy(const std::vector<Experience>& selection) {
  if (selection.size() < 2) return 0.0;
  double sum = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    for (std::size_t j = i + 1; j < selection.size(); ++j) {
      sum += OracleSimilarity(selection[i], selection[j]);
      ++pairs;
    }
  }
  return sum / pairs;
}

double OracleObjective(const std::vector<Experience>& selection, double lambda, double mu) {
  double mean = 0;
  for (const auto& e : selection) mean += e.score.value;
  mean /= static_cast<double>(selection.size());
  return mean + lambda * OracleEntropy(selection) - mu * OracleRedundancy(selection);
}

ExperienceLibrary SeedLibrary(const Dataset& dataset, std::uint64_t seed, int keep) {
  ExplorerConfig cfg;
  cfg.seed = seed;
  EvaluationConfig eval;
  eval.seed = seed;
  std::vector<Experience> found = RunExploration(dataset, eval, cfg).experiences;
  if (keep >= 0 && static_cast<std::size_t>(keep) < found.size()) found.resize(static_cast<std::size_t>(keep));
  ExperienceLibrary lib;
  lib.WriteBack(found);
  return lib;
}

std::filesystem::path TempDir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("ftevolve_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

}  // namespace ftevolve::testing
