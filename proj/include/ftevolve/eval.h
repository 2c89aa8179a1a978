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

#ifndef FTEVOLVE_EVAL_H_
#define FTEVOLVE_EVAL_H_

// Downstream verification: built-in learners, k-fold cross-validation and
// the F1 / macro-F1 / 1-RAE metrics.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftevolve/table.h"

namespace ftevolve {

enum class Metric { kF1, kMacroF1, kOneMinusRae };
std::string_view MetricName(Metric metric);
Metric ParseMetric(std::string_view text);

struct Score {
  double value = 0.0;
  Metric metric = Metric::kOneMinusRae;
  bool operator==(const Score&) const = default;
};

// kAuto picks logistic regression for classification and ridge for
// regression.
enum class Learner { kAuto, kLogistic, kRidge, kKnn };
std::string_view LearnerName(Learner learner);
Learner ParseLearner(std::string_view text);

struct EvaluationConfig {
  int folds = 5;
  std::uint64_t seed = 0;
  Learner learner = Learner::kAuto;
  double ridge_alpha = 0.1;
  double logistic_l2 = 1e-3;
  double logistic_learning_rate = 0.5;
  int logistic_iterations = 300;
  int knn_k = 5;
};

enum class F1Averaging { kBinary, kMacro };

// Classes are the union of labels and predictions. Binary averaging needs
// exactly two classes and treats the larger label as positive.
// Throws kLengthMismatch, kEmptyInput, kInvalidArgument.
Score F1Score(std::span<const double> predictions, std::span<const double> labels,
              F1Averaging averaging);
// As above with an explicit class list (sorted ascending internally).
Score F1Score(std::span<const double> predictions, std::span<const double> labels,
              F1Averaging averaging, std::span<const double> classes);

// One-vs-rest F1 for `positive`; zero denominators give 0 components.
double OneVsRestF1(std::span<const double> predictions,
                   std::span<const double> labels, double positive);

// 1 - |pred - real|_1 / |real - mean(real)|_1.
// Throws kLengthMismatch, kEmptyInput (fewer than 2 values),
// kConstantActuals.
Score OneMinusRae(std::span<const double> predictions,
                  std::span<const double> actuals);

// Fold assignment: stratified round-robin per class for classification,
// contiguous chunks of a seeded shuffle for regression. The result is a
// disjoint cover of [0, rows). Throws kInvalidArgument when folds is outside
// [2, rows] and kTooFewClassSamples when a class has fewer rows than folds.
std::vector<std::vector<int>> MakeFolds(const Dataset& dataset, int folds,
                                        std::uint64_t seed);

struct CvResult {
  Score score;
  std::vector<double> fold_scores;  // in fold order
  std::vector<std::string> diagnostics;
};

// Deterministic in (dataset, config).
CvResult CrossValidate(const Dataset& dataset, const EvaluationConfig& config);
Score CrossValidatedScore(const Dataset& dataset, const EvaluationConfig& config);

}  // namespace ftevolve

#endif  // FTEVOLVE_EVAL_H_
