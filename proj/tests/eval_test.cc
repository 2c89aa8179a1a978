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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <cstring>
#include <set>

#include "ftevolve/error.h"
#include "test_support.h"

namespace ftevolve {
namespace {

using V = std::vector<double>;

TEST(F1Test, Goldens) {
  const V labels = {1, 1, 0, 0};
  EXPECT_EQ(F1Score(labels, labels, F1Averaging::kBinary).value, 1.0);
  const V pred = {1, 0, 1, 0};
  // TP=1, FP=1, FN=1 -> 2/(2+1+1)
  EXPECT_NEAR(F1Score(pred, labels, F1Averaging::kBinary).value, 0.5, 1e-12);
  const V none = {0, 0, 0, 0};
  EXPECT_NEAR(F1Score(none, labels, F1Averaging::kBinary, V{0, 1}).value, 0.0, 1e-12);
  EXPECT_EQ(F1Score(pred, labels, F1Averaging::kBinary).metric, Metric::kF1);
}

TEST(F1Test, MacroAveragesPerClass) {
  const V labels = {0, 1, 2, 2};
  const V pred = {0, 2, 2, 2};
  // class 0: 1; class 1: 0; class 2: TP 2 FP 1 -> 0.8
  EXPECT_NEAR(F1Score(pred, labels, F1Averaging::kMacro).value, (1.0 + 0.0 + 0.8) / 3, 1e-12);
}

TEST(F1Test, Errors) {
  EXPECT_THROW(F1Score(V{1}, V{1, 0}, F1Averaging::kBinary), Error);
  EXPECT_THROW(F1Score(V{}, V{}, F1Averaging::kBinary), Error);
}

TEST(RaeTest, Goldens) {
  const V a = {1, 2, 3};
  EXPECT_EQ(OneMinusRae(a, a).value, 1.0);
  EXPECT_NEAR(OneMinusRae(V{2, 2, 2}, a).value, 0.0, 1e-12);
  // |err|_1 = 2, |a - mean|_1 = 2
  EXPECT_NEAR(OneMinusRae(V{1, 2, 5}, a).value, 0.0, 1e-12);
  try {
    OneMinusRae(V{1, 2}, V{3, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstantActuals);
  }
}

TEST(FoldsTest, DisjointCoverAndStratified) {
  const Dataset r = testing::RatioFixture(1, 103);
  const auto folds = MakeFolds(r, 5, 9);
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& f : folds) {
    total += f.size();
    seen.insert(f.begin(), f.end());
  }
  EXPECT_EQ(total, 103u);
  EXPECT_EQ(seen.size(), 103u);

  std::vector<double> y(40);
  for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = i < 10 ? 1 : 0;
  const Dataset c("c", {{"a", V(40, 1.0)}}, y, TaskKind::kClassification);
  for (const auto& f : MakeFolds(c, 5, 3)) {
    int pos = 0;
    for (int i : f) pos += y[static_cast<std::size_t>(i)] == 1;
    EXPECT_EQ(pos, 2);
  }
  EXPECT_THROW(MakeFolds(c, 11, 3), Error);  // 10 positives < 11 folds
}

// Two Gaussian blobs 6 sigma apart.
Dataset Blobs(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  V a, b, y;
  for (int i = 0; i < 200; ++i) {
    const int cls = i % 2;
    a.push_back(n(rng) + (cls ? 3.0 : -3.0));
    b.push_back(n(rng) + (cls ? 3.0 : -3.0));
    y.push_back(cls);
  }
  return Dataset("blobs", {{"a", a}, {"b", b}}, y, TaskKind::kClassification);
}

TEST(CrossValidateTest, SeparableBlobs) {
  const Dataset d = Blobs(4);
  // Perceptron oracle: converges to zero training errors iff separable.
  double w0 = 0, w1 = 0, bias = 0;
  int errors = 1;
  for (int epoch = 0; epoch < 1000 && errors > 0; ++epoch) {
    errors = 0;
    for (int i = 0; i < d.rows(); ++i) {
      const double t = d.target()[static_cast<std::size_t>(i)] == 1 ? 1 : -1;
      const double s = w0 * d.column(0)[static_cast<std::size_t>(i)] +
                       w1 * d.column(1)[static_cast<std::size_t>(i)] + bias;
      if (t * s <= 0) {
        w0 += t * d.column(0)[static_cast<std::size_t>(i)];
        w1 += t * d.column(1)[static_cast<std::size_t>(i)];
        bias += t;
        ++errors;
      }
    }
  }
  ASSERT_EQ(errors, 0) << "fixture is not separable";
  const Score s = CrossValidatedScore(d, {});
  EXPECT_EQ(s.metric, Metric::kF1);
  EXPECT_GE(s.value, 0.95);
}

TEST(CrossValidateTest, ExactLinearRegression) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  V x, noise, y;
  for (int i = 0; i < 100; ++i) {
    x.push_back(u(rng));
    noise.push_back(u(rng));
    y.push_back(3 * x.back());
  }
  const Dataset d("lin", {{"x1", x}, {"x2", noise}}, y, TaskKind::kRegression);
  EvaluationConfig cfg;
  cfg.learner = Learner::kRidge;
  cfg.ridge_alpha = 1e-6;

  // Closed-form oracle on the full data (single feature, centered).
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / (sxx + 1e-6);
  V fit;
  for (double v : x) fit.push_back(my + slope * (v - mx));
  ASSERT_GE(OneMinusRae(fit, y).value, 0.99);

  const Score s = CrossValidatedScore(d, cfg);
  EXPECT_EQ(s.metric, Metric::kOneMinusRae);
  EXPECT_GE(s.value, 0.99);
}

TEST(CrossValidateTest, Deterministic) {
  const Dataset d = testing::RatioFixture(3, 200);
  const Score a = CrossValidatedScore(d, {});
  const Score b = CrossValidatedScore(d, {});
  EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
}

TEST(CrossValidateTest, MulticlassUsesMacroF1) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.5);
  V a, y;
  for (int i = 0; i < 150; ++i) {
    const int cls = i % 3;
    a.push_back(cls * 4.0 + n(rng));
    y.push_back(cls);
  }
  const Dataset d("m", {{"a", a}}, y, TaskKind::kClassification);
  const Score s = CrossValidatedScore(d, {});
  EXPECT_EQ(s.metric, Metric::kMacroF1);
  EXPECT_GE(s.value, 0.9);
  EvaluationConfig knn;
  knn.learner = Learner::kKnn;
  EXPECT_GE(CrossValidatedScore(d, knn).value, 0.9);
}

TEST(CrossValidateTest, LearnerTaskMismatch) {
  const Dataset d = testing::RatioFixture(3, 50);
  EvaluationConfig cfg;
  cfg.learner = Learner::kLogistic;
  EXPECT_THROW(CrossValidatedScore(d, cfg), Error);
}

TEST(CrossValidateTest, CollinearFallsBackWithDiagnostic) {
  const Dataset base = testing::RatioFixture(3, 60, 2);
  std::vector<Column> cols = base.columns();
  cols.push_back({"dup", cols[0].values});
  EvaluationConfig cfg;
  cfg.learner = Learner::kRidge;
  cfg.ridge_alpha = 0.0;
  const CvResult r = CrossValidate(base.WithColumns(cols), cfg);
  EXPECT_TRUE(std::isfinite(r.score.value));
  EXPECT_FALSE(r.diagnostics.empty());
}

}  // namespace
}  // namespace ftevolve
