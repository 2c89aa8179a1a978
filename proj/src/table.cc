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

#include "ftevolve/table.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace ftevolve {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double Finite(double v) { return std::isfinite(v) ? v : kNaN; }

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// RFC 4180-ish field splitting: quoted fields may contain commas and "".
std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(Trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.emplace_back(Trim(field));
  return fields;
}

std::optional<double> ParseNumber(std::string_view cell) {
  cell = Trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::vector<double> FiniteEntries(const std::vector<double>& x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) {
    if (std::isfinite(v)) out.push_back(v);
  }
  return out;
}

std::vector<double> Standardize(const std::vector<double>& x) {
  std::vector<double> finite = FiniteEntries(x);
  const double mean = Mean(finite);
  const double sd = std::max(StdDev(finite), kStdFloor);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

std::vector<double> Normalize(const std::vector<double>& x) {
  std::vector<double> finite = FiniteEntries(x);
  std::vector<double> out(x.size(), kNaN);
  if (finite.empty()) return out;
  auto [lo, hi] = std::minmax_element(finite.begin(), finite.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) continue;
    out[i] = range == 0.0 ? 0.0 : (x[i] - min) / range;
  }
  return out;
}

// Average 0-based rank among finite entries, divided by (n_finite - 1).
std::vector<double> Quantile(const std::vector<double>& x) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i])) idx.push_back(i);
  }
  std::vector<double> out(x.size(), kNaN);
  if (idx.empty()) return out;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const double denom = idx.size() > 1 ? static_cast<double>(idx.size() - 1) : 1.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) out[idx[k]] = rank / denom;
    i = j + 1;
  }
  return out;
}

double ApplyUnary(OpCode op, double x) {
  switch (op) {
    case OpCode::kSqrt: return x < 0.0 ? kNaN : std::sqrt(x);
    case OpCode::kSquare: return x * x;
    case OpCode::kCube: return x * x * x;
    case OpCode::kReciprocal: return std::abs(x) < kDivisionGuard ? kNaN : 1.0 / x;
    case OpCode::kLog: return x <= 0.0 ? kNaN : std::log(x);
    case OpCode::kSin: return std::sin(x);
    case OpCode::kCos: return std::cos(x);
    case OpCode::kTanh: return std::tanh(x);
    case OpCode::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    default: return kNaN;
  }
}

double ApplyBinary(OpCode op, double a, double b) {
  switch (op) {
    case OpCode::kPlus: return a + b;
    case OpCode::kMinus: return a - b;
    case OpCode::kMultiply: return a * b;
    case OpCode::kDivide: return std::abs(b) < kDivisionGuard ? kNaN : a / b;
    default: return kNaN;
  }
}

}  // namespace

std::string_view TaskName(TaskKind task) {
  return task == TaskKind::kClassification ? "classification" : "regression";
}

TaskKind ParseTask(std::string_view text) {
  if (text == "classification" || text == "C" || text == "c") {
    return TaskKind::kClassification;
  }
  if (text == "regression" || text == "R" || text == "r") return TaskKind::kRegression;
  throw Error(ErrorCode::kInvalidArgument,
              "task must be classification or regression, got '" +
                  std::string(text) + "'");
}

Dataset::Dataset(std::string name, std::vector<Column> columns,
                 std::vector<double> target, TaskKind task)
    : name_(std::move(name)),
      columns_(std::move(columns)),
      target_(std::move(target)),
      task_(task) {
  if (target_.size() < 2) {
    throw Error(ErrorCode::kTooFewRows,
                "dataset '" + name_ + "' has " + std::to_string(target_.size()) +
                    " rows, need at least 2");
  }
  for (const Column& c : columns_) {
    if (c.values.size() != target_.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "column '" + c.name + "' has " + std::to_string(c.values.size()) +
                      " rows, target has " + std::to_string(target_.size()));
    }
  }
  if (task_ == TaskKind::kClassification) {
    std::set<double> classes;
    for (double y : target_) {
      if (!std::isfinite(y) || y != std::round(y)) {
        throw Error(ErrorCode::kInvalidTarget,
                    "classification target must hold integer labels");
      }
      classes.insert(y);
    }
    if (classes.size() < 2) {
      throw Error(ErrorCode::kInvalidTarget,
                  "classification target needs at least 2 classes");
    }
  }
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const Column& c : columns_) out.push_back(c.name);
  return out;
}

Dataset Dataset::WithColumns(std::vector<Column> columns) const {
  return Dataset(name_, std::move(columns), target_, task_);
}

Dataset ParseCsv(std::string_view content, std::string name,
                 const std::optional<std::string>& target_column, TaskKind task) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    if (!Trim(line).empty()) lines.push_back(line);
    pos = nl + 1;
  }
  if (lines.empty()) {
    throw Error(ErrorCode::kTooFewRows, "'" + name + "' is empty");
  }
  const std::vector<std::string> header = SplitCsvLine(lines[0]);
  std::size_t target_index = header.size() - 1;
  if (target_column && !target_column->empty()) {
    auto it = std::find(header.begin(), header.end(), *target_column);
    if (it == header.end()) {
      throw Error(ErrorCode::kMissingTarget,
                  "no column named '" + *target_column + "' in '" + name + "'");
    }
    target_index = static_cast<std::size_t>(it - header.begin());
  }
  if (lines.size() - 1 < 2) {
    throw Error(ErrorCode::kTooFewRows,
                "'" + name + "' has " + std::to_string(lines.size() - 1) +
                    " data rows, need at least 2");
  }

  std::vector<Column> columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != target_index) columns.push_back({header[c], {}});
  }
  std::vector<double> target;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> cells = SplitCsvLine(lines[r]);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::optional<double> v = ParseNumber(cells[c]);
      if (!v) {
        throw Error(ErrorCode::kNonNumericCell,
                    "row " + std::to_string(r) + ", column '" + header[c] +
                        "': '" + cells[c] + "'");
      }
      if (c == target_index) {
        target.push_back(*v);
      } else {
        columns[out_col++].values.push_back(*v);
      }
    }
  }
  return Dataset(std::move(name), std::move(columns), std::move(target), task);
}

Dataset LoadCsv(const std::filesystem::path& path,
                const std::optional<std::string>& target_column, TaskKind task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseCsv(buf.str(), path.stem().string(), target_column, task);
}

std::vector<double> ApplyOperator(const OperatorDescriptor& op,
                                  std::span<const std::vector<double>> inputs) {
  if (static_cast<int>(inputs.size()) != op.arity) {
    throw Error(ErrorCode::kArityMismatch,
                "'" + op.name + "' takes " + std::to_string(op.arity) +
                    " input(s), got " + std::to_string(inputs.size()));
  }
  if (op.arity == 2 && inputs[0].size() != inputs[1].size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "'" + op.name + "' operands have lengths " +
                    std::to_string(inputs[0].size()) + " and " +
                    std::to_string(inputs[1].size()));
  }
  const std::vector<double>& x = inputs[0];
  std::vector<double> out;
  switch (op.code) {
    case OpCode::kStandard: out = Standardize(x); break;
    case OpCode::kNormalize: out = Normalize(x); break;
    case OpCode::kQuantile: out = Quantile(x); break;
    default:
      out.resize(x.size());
      if (op.arity == 1) {
        for (std::size_t i = 0; i < x.size(); ++i) {
          out[i] = std::isnan(x[i]) ? kNaN : ApplyUnary(op.code, x[i]);
        }
      } else {
        const std::vector<double>& y = inputs[1];
        for (std::size_t i = 0; i < x.size(); ++i) {
          out[i] = std::isnan(x[i]) || std::isnan(y[i])
                       ? kNaN
                       : ApplyBinary(op.code, x[i], y[i]);
        }
      }
  }
  for (double& v : out) v = Finite(v);
  return out;
}

TransformOutcome ExecuteCombination(const Combination& combination,
                                    const Dataset& dataset) {
  if (auto diag = CheckStack(combination)) throw Error(diag->code, diag->message);
  std::vector<std::vector<double>> stack;
  for (const Token& t : combination.tokens) {
    if (t.is_feature()) {
      if (t.feature < 0 || t.feature >= dataset.feature_count()) {
        throw Error(ErrorCode::kFeatureOutOfRange,
                    RenderToken(t) + " but the dataset has " +
                        std::to_string(dataset.feature_count()) + " features");
      }
      stack.push_back(dataset.column(t.feature));
      continue;
    }
    const OperatorDescriptor& op = DescriptorOf(t.op);
    const std::size_t base = stack.size() - static_cast<std::size_t>(op.arity);
    std::vector<double> result = ApplyOperator(
        op, std::span<const std::vector<double>>(stack.data() + base,
                                                 static_cast<std::size_t>(op.arity)));
    stack.resize(base);
    stack.push_back(std::move(result));
  }

  TransformOutcome outcome;
  outcome.values = std::move(stack.back());
  std::size_t nans = 0;
  for (double v : outcome.values) {
    if (std::isnan(v)) {
      ++nans;
    } else if (std::isinf(v)) {
      outcome.has_inf = true;
    }
  }
  outcome.nan_ratio = outcome.values.empty()
                          ? 0.0
                          : static_cast<double>(nans) /
                                static_cast<double>(outcome.values.size());
  return outcome;
}

std::string_view ExecutionModeName(ExecutionMode mode) {
  return mode == ExecutionMode::kAppend ? "append" : "replace";
}

ExecutionMode ParseExecutionMode(std::string_view text) {
  if (text == "append") return ExecutionMode::kAppend;
  if (text == "replace") return ExecutionMode::kReplace;
  throw Error(ErrorCode::kInvalidArgument,
              "execution mode must be append or replace, got '" +
                  std::string(text) + "'");
}

std::optional<std::vector<double>> ImputeMedian(std::vector<double> values) {
  std::vector<double> finite = FiniteEntries(values);
  if (finite.empty()) return std::nullopt;
  if (finite.size() == values.size()) return values;
  std::sort(finite.begin(), finite.end());
  const std::size_t n = finite.size();
  const double median =
      n % 2 == 1 ? finite[n / 2] : 0.5 * (finite[n / 2 - 1] + finite[n / 2]);
  for (double& v : values) {
    if (!std::isfinite(v)) v = median;
  }
  return values;
}

double StdDev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

Dataset ExecuteSequence(const TransformationSequence& sequence,
                        const Dataset& dataset, ExecutionMode mode) {
  std::vector<Column> columns;
  if (mode == ExecutionMode::kAppend) columns = dataset.columns();
  for (std::size_t c = 0; c < sequence.combinations.size(); ++c) {
    const Combination& comb = sequence.combinations[c];
    const std::string label = "combination " + std::to_string(c + 1) + " (" +
                              RenderCombination(comb) + ")";
    TransformOutcome outcome = ExecuteCombination(comb, dataset);
    std::optional<std::vector<double>> imputed = ImputeMedian(std::move(outcome.values));
    if (!imputed) {
      throw Error(ErrorCode::kDegenerateColumn, label + " is all-NaN");
    }
    if (StdDev(*imputed) < kStdFloor) {
      throw Error(ErrorCode::kDegenerateColumn, label + " has zero variance");
    }
    columns.push_back({RenderCombination(comb, RenderStyle::kInfix),
                       std::move(*imputed)});
  }
  return dataset.WithColumns(std::move(columns));
}

}  // namespace ftevolve
