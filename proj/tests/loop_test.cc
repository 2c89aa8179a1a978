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

#include "ftevolve/loop.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ftevolve/error.h"
#include "json.hpp"
#include "test_support.h"

namespace ftevolve {
namespace {

class LoopTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(testing::RatioFixture());
    seed_library_ = new ExperienceLibrary(testing::SeedLibrary(*data_, 1));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete seed_library_;
  }

  LoopConfig Config(int t, int b, LoopMode mode = LoopMode::kClosedLoop) const {
    LoopConfig c;
    c.iterations = t;
    c.candidates = b;
    c.mode = mode;
    c.seed = 5;
    return c;
  }

  static Dataset* data_;
  static ExperienceLibrary* seed_library_;
  MockPolicy mock_;
};

Dataset* LoopTest::data_ = nullptr;
ExperienceLibrary* LoopTest::seed_library_ = nullptr;

TEST_F(LoopTest, CallAccounting) {
  ExperienceLibrary lib = *seed_library_;
  const RunReport r = RunClosedLoop(*data_, lib, mock_, Config(2, 3), {});
  ASSERT_EQ(r.records.size(), 6u);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(r.records[i].iteration, static_cast<int>(i / 3) + 1);
    EXPECT_EQ(r.records[i].call, static_cast<int>(i % 3) + 1);
    EXPECT_EQ(r.records[i].score.has_value(), r.records[i].status == CallStatus::kAccepted);
  }
  EXPECT_EQ(r.library_version_after, r.library_version_before + 2);
}

TEST_F(LoopTest, BestSoFarNeverDrops) {
  ExperienceLibrary lib = *seed_library_;
  const RunReport r = RunClosedLoop(*data_, lib, mock_, Config(10, 10), {});
  const std::vector<double> best = r.BestSoFar();
  EXPECT_GE(best.front(), r.initial_best);
  for (std::size_t i = 1; i < best.size(); ++i) EXPECT_GE(best[i], best[i - 1]);
  EXPECT_GE(r.FinalBestScore(), *seed_library_->BestScore(SignatureOfDataset(*data_)));
  EXPECT_GE(*lib.BestScore(SignatureOfDataset(*data_)), r.initial_best);
  ASSERT_TRUE(r.final_best.has_value());
  EXPECT_EQ(r.final_best->score.value, r.FinalBestScore());
}

TEST_F(LoopTest, WriteBackRespectsKeepTop) {
  ExperienceLibrary lib = *seed_library_;
  LoopConfig c = Config(3, 10);
  c.keep_top = 2;
  const RunReport r = RunClosedLoop(*data_, lib, mock_, c, {});
  std::vector<int> per_iteration(4, 0);
  for (const CallRecord& rec : r.records) {
    if (rec.written_back) {
      EXPECT_EQ(rec.status, CallStatus::kAccepted);
      ++per_iteration[static_cast<std::size_t>(rec.iteration)];
    }
  }
  for (int t = 1; t <= 3; ++t) EXPECT_LE(per_iteration[static_cast<std::size_t>(t)], 2);
  int written = per_iteration[1] + per_iteration[2] + per_iteration[3];
  EXPECT_EQ(lib.size(), seed_library_->size() + static_cast<std::size_t>(written));
  for (std::size_t i = seed_library_->size(); i < lib.size(); ++i) {
    EXPECT_EQ(lib.experiences()[i].origin, Origin::kLlm);
  }
}

TEST_F(LoopTest, OneShotLeavesLibraryAlone) {
  const std::uint64_t hash = seed_library_->ContentHash();
  const std::int64_t version = seed_library_->version();
  for (LoopMode mode : {LoopMode::kOneShotFixed, LoopMode::kOneShotResample}) {
    const RunReport r = RunOneShot(*data_, *seed_library_, mock_, Config(3, 4, mode), {});
    EXPECT_EQ(r.records.size(), 12u);
    EXPECT_EQ(r.library_version_after, version);
    for (const CallRecord& rec : r.records) EXPECT_FALSE(rec.written_back);
  }
  EXPECT_EQ(seed_library_->ContentHash(), hash);
  EXPECT_EQ(seed_library_->version(), version);
}

TEST_F(LoopTest, FixedModeReusesOnePrompt) {
  const RunReport r =
      RunOneShot(*data_, *seed_library_, mock_, Config(4, 2, LoopMode::kOneShotFixed), {});
  std::set<std::string> hashes;
  for (const CallRecord& rec : r.records) hashes.insert(rec.prompt_hash);
  EXPECT_EQ(hashes.size(), 1u);
  const RunReport s =
      RunOneShot(*data_, *seed_library_, mock_, Config(4, 2, LoopMode::kOneShotResample), {});
  hashes.clear();
  for (const CallRecord& rec : s.records) hashes.insert(rec.prompt_hash);
  EXPECT_GT(hashes.size(), 1u);
}

TEST_F(LoopTest, ModeGuards) {
  ExperienceLibrary lib = *seed_library_;
  EXPECT_THROW(RunClosedLoop(*data_, lib, mock_, Config(1, 1, LoopMode::kOneShotFixed), {}),
               Error);
  EXPECT_THROW(RunOneShot(*data_, lib, mock_, Config(1, 1), {}), Error);
  ExperienceLibrary empty;
  try {
    RunClosedLoop(*data_, empty, mock_, Config(1, 1), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientExperiences);
  }
  LoopConfig bad = Config(1, 1);
  bad.candidates = 0;
  EXPECT_THROW(ValidateLoopConfig(bad), Error);
}

TEST_F(LoopTest, SingleExperienceLibrary) {
  ExperienceLibrary lib = testing::SeedLibrary(*data_, 1, 1);
  ASSERT_EQ(lib.size(), 1u);
  const RunReport r = RunClosedLoop(*data_, lib, mock_, Config(2, 5), {});
  EXPECT_EQ(r.records.size(), 10u);
  EXPECT_GT(lib.size(), 1u);
}

TEST_F(LoopTest, JobsDoNotChangeResults) {
  ExperienceLibrary a = *seed_library_, b = *seed_library_;
  LoopConfig serial = Config(3, 6);
  LoopConfig parallel = serial;
  parallel.jobs = 4;
  const RunReport x = RunClosedLoop(*data_, a, mock_, serial, {});
  const RunReport y = RunClosedLoop(*data_, b, mock_, parallel, {});
  EXPECT_EQ(RunReportToJsonl(x), RunReportToJsonl(y));
  EXPECT_EQ(a.ToJson(), b.ToJson());
}

class GarblePolicy final : public Policy {
 public:
  std::string Generate(const PromptBundle&, const SamplingSettings&, std::uint64_t seed) override {
    switch (seed % 3) {
      case 0: return "no idea";
      case 1: return "BEGIN_SEQUENCE f1,f1,- END_SEQUENCE";
      default: return "BEGIN_SEQUENCE f1,f2,/ END_SEQUENCE";
    }
  }
  std::string_view name() const override { return "garble"; }
};

TEST_F(LoopTest, FailuresAreRecorded) {
  ExperienceLibrary lib = *seed_library_;
  GarblePolicy garble;
  const RunReport r = RunClosedLoop(*data_, lib, garble, Config(2, 6), {});
  std::set<CallStatus> statuses;
  for (const CallRecord& rec : r.records) {
    statuses.insert(rec.status);
    if (rec.status != CallStatus::kAccepted) EXPECT_FALSE(rec.reason.empty());
  }
  EXPECT_TRUE(statuses.count(CallStatus::kParseError));
  EXPECT_TRUE(statuses.count(CallStatus::kCheckFailed));
  EXPECT_TRUE(statuses.count(CallStatus::kAccepted));
}

TEST_F(LoopTest, JsonlRoundTrip) {
  ExperienceLibrary lib = *seed_library_;
  const RunReport r = RunClosedLoop(*data_, lib, mock_, Config(2, 4), {});
  const std::string text = RunReportToJsonl(r);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 8);
  const RunReport back = RunReportFromJsonl(text);
  EXPECT_EQ(RunReportToJsonl(back), text);
  EXPECT_EQ(back.baseline_score, r.baseline_score);
  EXPECT_EQ(back.feature_count, 5);
  const auto summary = nlohmann::json::parse(RunReportSummaryJson(r));
  EXPECT_EQ(summary["calls"], 8);
  EXPECT_EQ(summary["best_so_far"].size(), 8u);
}

TEST(JsonlTest, Errors) {
  try {
    RunReportFromJsonl("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyReport);
  }
  try {
    RunReportFromJsonl("{\"mode\": 3}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedReport);
  }
}

TransformationSequence S(const std::string& text) {
  return ParseSequence(text, OperatorSet::Default(), 5);
}

TEST(BehaviorStatsTest, Goldens) {
  const std::vector<TransformationSequence> plus = {S("f1,f2,+"), S("f3,f4,+,f5,+")};
  EXPECT_EQ(ComputeBehaviorStats(plus, 5).simple_ratio, 1.0);
  const std::vector<TransformationSequence> one = {S("f2,sqrt"), S("f2,f2,*")};
  const BehaviorStats o = ComputeBehaviorStats(one, 5);
  EXPECT_EQ(o.feature_usage_entropy, 0.0);
  EXPECT_EQ(o.feature_usage[1], 3);
  const std::vector<TransformationSequence> four = {S("f1,f2,+"), S("f3,f4,*")};
  EXPECT_NEAR(ComputeBehaviorStats(four, 5).feature_usage_entropy, std::log(4.0), 1e-12);
  EXPECT_EQ(ComputeBehaviorStats(four, 5).operator_counts.at("multiply"), 1);
  RunReport empty;
  EXPECT_THROW(ComputeBehaviorStats(empty), Error);
}

}  // namespace
}  // namespace ftevolve
