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

#ifndef FTEVOLVE_TABLE_H_
#define FTEVOLVE_TABLE_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftevolve/expr.h"

namespace ftevolve {

enum class TaskKind { kClassification, kRegression };

std::string_view TaskName(TaskKind task);
// Accepts "classification"/"regression" (and the short forms "C"/"R").
TaskKind ParseTask(std::string_view text);

struct Column {
  std::string name;
  std::vector<double> values;
};

// Immutable tabular dataset: named numeric feature columns plus a target.
class Dataset {
 public:
  // Throws kLengthMismatch, kTooFewRows (N < 2) or kInvalidTarget
  // (classification target that is not integer-valued or has < 2 classes).
  Dataset(std::string name, std::vector<Column> columns,
          std::vector<double> target, TaskKind task);

  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<double>& column(int index) const {
    return columns_[static_cast<std::size_t>(index)].values;
  }
  const std::vector<double>& target() const { return target_; }
  TaskKind task() const { return task_; }
  int rows() const { return static_cast<int>(target_.size()); }
  int feature_count() const { return static_cast<int>(columns_.size()); }
  std::vector<std::string> feature_names() const;

  // Same name, target and task with a different set of feature columns.
  Dataset WithColumns(std::vector<Column> columns) const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<double> target_;
  TaskKind task_;
};

// Reads a UTF-8 CSV with a header row. The target is the named column, or
// the last column when `target_column` is empty. The dataset name is the
// file stem. Throws kIoError, kMissingTarget, kLengthMismatch (ragged row),
// kNonNumericCell (with row and column), kTooFewRows.
Dataset LoadCsv(const std::filesystem::path& path,
                const std::optional<std::string>& target_column, TaskKind task);
Dataset ParseCsv(std::string_view content, std::string name,
                 const std::optional<std::string>& target_column, TaskKind task);

inline constexpr double kDivisionGuard = 1e-12;
inline constexpr double kStdFloor = 1e-12;

// Elementwise (or column-statistic) operator application. Never returns
// +/-inf: non-finite results become NaN, and NaN inputs stay NaN.
// Throws kArityMismatch, kLengthMismatch.
std::vector<double> ApplyOperator(const OperatorDescriptor& op,
                                  std::span<const std::vector<double>> inputs);

struct TransformOutcome {
  std::vector<double> values;
  double nan_ratio = 0.0;  // NaN count / N
  bool has_inf = false;
};

// Stack evaluation of one postfix combination. Throws the validate-structure
// error (kFeatureOutOfRange, kStackUnderflow, ...) when `combination` is not
// valid for `dataset`.
TransformOutcome ExecuteCombination(const Combination& combination,
                                    const Dataset& dataset);

enum class ExecutionMode { kAppend, kReplace };

std::string_view ExecutionModeName(ExecutionMode mode);
ExecutionMode ParseExecutionMode(std::string_view text);

// Replaces NaN entries with the median of the finite entries. Returns
// nullopt when no entry is finite.
std::optional<std::vector<double>> ImputeMedian(std::vector<double> values);

// Population standard deviation.
double StdDev(std::span<const double> values);

// Executes every combination; each yields one column named by its infix
// rendering, with NaNs median-imputed. Throws kDegenerateColumn naming the
// offending combination when a column is all-NaN or has std < kStdFloor after
// imputation.
Dataset ExecuteSequence(const TransformationSequence& sequence,
                        const Dataset& dataset,
                        ExecutionMode mode = ExecutionMode::kAppend);

}  // namespace ftevolve

#endif  // FTEVOLVE_TABLE_H_
