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

#include "ftevolve/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Dense>

namespace ftevolve {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

std::vector<double> SortedClasses(std::span<const double> a,
                                  std::span<const double> b) {
  std::set<double> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer Fit(const Matrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean(c)).square().mean();
      const double sd = std::sqrt(var);
      s.scale(c) = sd < kStdFloor ? 0.0 : 1.0 / sd;
    }
    return s;
  }

  Matrix Apply(const Matrix& x) const {
    Matrix out = x.rowwise() - mean.transpose();
    return out * scale.asDiagonal();
  }
};

Matrix Gather(const Dataset& d, std::span<const int> rows) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), d.feature_count());
  for (int c = 0; c < d.feature_count(); ++c) {
    const std::vector<double>& col = d.column(c);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x(static_cast<Eigen::Index>(r), c) = col[static_cast<std::size_t>(rows[r])];
    }
  }
  return x;
}

Vector GatherTarget(const Dataset& d, std::span<const int> rows) {
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    y(static_cast<Eigen::Index>(r)) = d.target()[static_cast<std::size_t>(rows[r])];
  }
  return y;
}

// Closed-form ridge on standardized inputs with an unpenalized intercept.
// Escalates alpha tenfold (up to 8 times) when the system is not positive
// definite or is numerically singular.
Vector FitRidge(const Matrix& x, const Vector& y, double alpha, double* intercept,
                std::vector<std::string>* diagnostics) {
  *intercept = y.mean();
  const Vector yc = y.array() - *intercept;
  const Matrix gram = x.transpose() * x;
  const Vector rhs = x.transpose() * yc;
  double a = alpha;
  for (int attempt = 0; attempt < 9; ++attempt) {
    Matrix system = gram;
    system.diagonal().array() += a;
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
      Vector w = llt.solve(rhs);
      if (w.allFinite()) {
        if (a != alpha) {
          diagnostics->push_back("SingularDesign: ridge alpha raised from " +
                                 std::to_string(alpha) + " to " +
                                 std::to_string(a));
        }
        return w;
      }
    }
    a = a > 0.0 ? a * 10.0 : 1e-6;
  }
  throw Error(ErrorCode::kSingularDesign,
              "ridge system not solvable even with alpha " + std::to_string(a));
}

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Batch gradient descent on the L2-regularized log loss.
Vector FitLogistic(const Matrix& x, const Vector& y01, const EvaluationConfig& cfg,
                   double* bias) {
  const double n = static_cast<double>(x.rows());
  Vector w = Vector::Zero(x.cols());
  double b = 0.0;
  for (int it = 0; it < cfg.logistic_iterations; ++it) {
    Vector z = (x * w).array() + b;
    Vector p = z.unaryExpr([](double v) { return Sigmoid(v); });
    Vector err = p - y01;
    Vector grad = x.transpose() * err / n + cfg.logistic_l2 * w;
    const double grad_b = err.mean();
    w -= cfg.logistic_learning_rate * grad;
    b -= cfg.logistic_learning_rate * grad_b;
  }
  *bias = b;
  return w;
}

std::vector<double> PredictLogistic(const Matrix& train, const Vector& y,
                                    const Matrix& test,
                                    const std::vector<double>& classes,
                                    const EvaluationConfig& cfg) {
  std::vector<double> pred(static_cast<std::size_t>(test.rows()));
  if (classes.size() == 2) {
    Vector y01 = (y.array() == classes[1]).cast<double>();
    double b = 0.0;
    Vector w = FitLogistic(train, y01, cfg, &b);
    Vector z = (test * w).array() + b;
    for (Eigen::Index i = 0; i < test.rows(); ++i) {
      pred[static_cast<std::size_t>(i)] = z(i) >= 0.0 ? classes[1] : classes[0];
    }
    return pred;
  }
  // One-vs-rest; highest margin wins, ties to the smaller label.
  Matrix margins(test.rows(), static_cast<Eigen::Index>(classes.size()));
  for (std::size_t k = 0; k < classes.size(); ++k) {
    Vector y01 = (y.array() == classes[k]).cast<double>();
    double b = 0.0;
    Vector w = FitLogistic(train, y01, cfg, &b);
    margins.col(static_cast<Eigen::Index>(k)) = (test * w).array() + b;
  }
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < margins.cols(); ++k) {
      if (margins(i, k) > margins(i, best)) best = k;
    }
    pred[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best)];
  }
  return pred;
}

std::vector<double> PredictKnn(const Matrix& train, const Vector& y,
                               const Matrix& test, int k, TaskKind task) {
  const Eigen::Index n = train.rows();
  const int kk = std::max(1, std::min<int>(k, static_cast<int>(n)));
  std::vector<double> pred(static_cast<std::size_t>(test.rows()));
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      dist[static_cast<std::size_t>(j)] = {(train.row(j) - test.row(i)).squaredNorm(), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
    if (task == TaskKind::kRegression) {
      double s = 0.0;
      for (int m = 0; m < kk; ++m) s += y(dist[static_cast<std::size_t>(m)].second);
      pred[static_cast<std::size_t>(i)] = s / kk;
    } else {
      std::map<double, int> votes;
      for (int m = 0; m < kk; ++m) ++votes[y(dist[static_cast<std::size_t>(m)].second)];
      double best = votes.begin()->first;
      int best_count = 0;
      for (const auto& [label, count] : votes) {
        if (count > best_count) {
          best = label;
          best_count = count;
        }
      }
      pred[static_cast<std::size_t>(i)] = best;
    }
  }
  return pred;
}

Learner Resolve(Learner learner, TaskKind task) {
  if (learner == Learner::kAuto) {
    return task == TaskKind::kClassification ? Learner::kLogistic : Learner::kRidge;
  }
  if (learner == Learner::kLogistic && task == TaskKind::kRegression) {
    throw Error(ErrorCode::kInvalidArgument,
                "logistic learner requires a classification task");
  }
  if (learner == Learner::kRidge && task == TaskKind::kClassification) {
    throw Error(ErrorCode::kInvalidArgument,
                "ridge learner requires a regression task");
  }
  return learner;
}

}  // namespace

std::string_view MetricName(Metric metric) {
  switch (metric) {
    case Metric::kF1: return "f1";
    case Metric::kMacroF1: return "macro_f1";
    case Metric::kOneMinusRae: return "one_minus_rae";
  }
  return "?";
}

Metric ParseMetric(std::string_view text) {
  if (text == "f1") return Metric::kF1;
  if (text == "macro_f1") return Metric::kMacroF1;
  if (text == "one_minus_rae") return Metric::kOneMinusRae;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(text) + "'");
}

std::string_view LearnerName(Learner learner) {
  switch (learner) {
    case Learner::kAuto: return "auto";
    case Learner::kLogistic: return "logistic";
    case Learner::kRidge: return "ridge";
    case Learner::kKnn: return "knn";
  }
  return "?";
}

Learner ParseLearner(std::string_view text) {
  if (text == "auto") return Learner::kAuto;
  if (text == "logistic") return Learner::kLogistic;
  if (text == "ridge") return Learner::kRidge;
  if (text == "knn") return Learner::kKnn;
  throw Error(ErrorCode::kInvalidArgument,
              "learner must be auto, logistic, ridge or knn, got '" +
                  std::string(text) + "'");
}

double OneVsRestF1(std::span<const double> predictions,
                   std::span<const double> labels, double positive) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == positive;
    const bool l = labels[i] == positive;
    if (p && l) ++tp;
    if (p && !l) ++fp;
    if (!p && l) ++fn;
  }
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall)
                                : 0.0;
}

Score F1Score(std::span<const double> predictions, std::span<const double> labels,
              F1Averaging averaging) {
  const std::vector<double> classes = SortedClasses(predictions, labels);
  return F1Score(predictions, labels, averaging, classes);
}

Score F1Score(std::span<const double> predictions, std::span<const double> labels,
              F1Averaging averaging, std::span<const double> classes) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "no labels");
  std::vector<double> sorted(classes.begin(), classes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (averaging == F1Averaging::kBinary) {
    if (sorted.size() != 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "binary F1 needs exactly 2 classes, got " +
                      std::to_string(sorted.size()));
    }
    return {OneVsRestF1(predictions, labels, sorted[1]), Metric::kF1};
  }
  double total = 0.0;
  for (double c : sorted) total += OneVsRestF1(predictions, labels, c);
  return {total / static_cast<double>(sorted.size()), Metric::kMacroF1};
}

Score OneMinusRae(std::span<const double> predictions,
                  std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(actuals.size()) + " actuals");
  }
  if (actuals.size() < 2) {
    throw Error(ErrorCode::kEmptyInput, "1-RAE needs at least 2 values");
  }
  double mean = 0.0;
  for (double a : actuals) mean += a;
  mean /= static_cast<double>(actuals.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    num += std::abs(predictions[i] - actuals[i]);
    den += std::abs(actuals[i] - mean);
  }
  if (den == 0.0) {
    throw Error(ErrorCode::kConstantActuals, "all actual values are identical");
  }
  return {1.0 - num / den, Metric::kOneMinusRae};
}

std::vector<std::vector<int>> MakeFolds(const Dataset& dataset, int folds,
                                        std::uint64_t seed) {
  const int n = dataset.rows();
  if (folds < 2 || folds > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "folds must be in [2, " + std::to_string(n) + "], got " +
                    std::to_string(folds));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  if (dataset.task() == TaskKind::kClassification) {
    std::map<double, std::vector<int>> by_class;
    for (int i = 0; i < n; ++i) by_class[dataset.target()[static_cast<std::size_t>(i)]].push_back(i);
    std::size_t offset = 0;
    for (auto& [label, rows] : by_class) {
      if (static_cast<int>(rows.size()) < folds) {
        throw Error(ErrorCode::kTooFewClassSamples,
                    "class " + std::to_string(label) + " has " +
                        std::to_string(rows.size()) + " rows, need " +
                        std::to_string(folds));
      }
      std::shuffle(rows.begin(), rows.end(), rng);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out[(offset + i) % static_cast<std::size_t>(folds)].push_back(rows[i]);
      }
      offset += rows.size();
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t start = 0;
  for (int f = 0; f < folds; ++f) {
    const std::size_t size = static_cast<std::size_t>(n / folds + (f < n % folds ? 1 : 0));
    out[static_cast<std::size_t>(f)].assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                                            order.begin() + static_cast<std::ptrdiff_t>(start + size));
    std::sort(out[static_cast<std::size_t>(f)].begin(), out[static_cast<std::size_t>(f)].end());
    start += size;
  }
  return out;
}

CvResult CrossValidate(const Dataset& dataset, const EvaluationConfig& config) {
  const Learner learner = Resolve(config.learner, dataset.task());
  const auto folds = MakeFolds(dataset, config.folds, config.seed);
  const bool classification = dataset.task() == TaskKind::kClassification;
  const std::vector<double> classes =
      classification ? SortedClasses(dataset.target(), {}) : std::vector<double>{};

  CvResult result;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    const std::vector<int>& test_rows = folds[f];

    const Matrix train_raw = Gather(dataset, train_rows);
    const Standardizer scaler = Standardizer::Fit(train_raw);
    const Matrix train = scaler.Apply(train_raw);
    const Matrix test = scaler.Apply(Gather(dataset, test_rows));
    const Vector y = GatherTarget(dataset, train_rows);
    const Vector y_test = GatherTarget(dataset, test_rows);
    const std::vector<double> actual(y_test.data(), y_test.data() + y_test.size());

    std::vector<double> pred;
    switch (learner) {
      case Learner::kRidge: {
        double intercept = 0.0;
        Vector w = FitRidge(train, y, config.ridge_alpha, &intercept,
                            &result.diagnostics);
        Vector p = (test * w).array() + intercept;
        pred.assign(p.data(), p.data() + p.size());
        break;
      }
      case Learner::kLogistic:
        pred = PredictLogistic(train, y, test, classes, config);
        break;
      case Learner::kKnn:
        pred = PredictKnn(train, y, test, config.knn_k, dataset.task());
        break;
      case Learner::kAuto:
        break;
    }

    Score fold_score;
    if (!classification) {
      fold_score = OneMinusRae(pred, actual);
    } else if (classes.size() == 2) {
      fold_score = F1Score(pred, actual, F1Averaging::kBinary, classes);
    } else {
      fold_score = F1Score(pred, actual, F1Averaging::kMacro, classes);
    }
    result.score.metric = fold_score.metric;
    result.fold_scores.push_back(fold_score.value);
  }
  double total = 0.0;
  for (double s : result.fold_scores) total += s;
  result.score.value = total / static_cast<double>(result.fold_scores.size());
  return result;
}

Score CrossValidatedScore(const Dataset& dataset, const EvaluationConfig& config) {
  return CrossValidate(dataset, config).score;
}

}  // namespace ftevolve
