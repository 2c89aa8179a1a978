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

#include <gtest/gtest.h>

#include <set>

#include "ftevolve/error.h"
#include "ftevolve/refine.h"
#include "test_support.h"

namespace ftevolve {
namespace {

using testing::MakeExperience;

class PromptTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const DatasetSignature sig = SignatureOfDataset(data_);
    trajectory_.steps = {MakeExperience("f3,sqrt", 0.61, sig),
                         MakeExperience("f1,f2,/", 0.98, sig)};
    trajectory_.library_indices = {0, 1};
    rules_.feature_count = 5;
  }

  Dataset data_ = testing::RatioFixture(7, 60);
  CoTTrajectory trajectory_;
  GenerationRules rules_;
};

int CountLines(const std::string& text, const std::string& prefix) {
  int n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    n += text.compare(pos, prefix.size(), prefix) == 0;
    pos = nl + 1;
  }
  return n;
}

TEST_F(PromptTest, DemonstrationsAscend) {
  const PromptBundle p = BuildPrompt(trajectory_, data_, rules_);
  EXPECT_EQ(CountLines(p.demonstration_block, "Step "), 2);
  EXPECT_LT(p.demonstration_block.find("0.6100"), p.demonstration_block.find("0.9800"));
  EXPECT_NE(p.demonstration_block.find("Step 1: Sequence: f3,sqrt; Score: 0.6100"),
            std::string::npos)
      << p.demonstration_block;
  ASSERT_EQ(p.demonstrations.size(), 2u);
  EXPECT_EQ(p.demonstrations[1].score, 0.98);
}

TEST_F(PromptTest, Deterministic) {
  EXPECT_EQ(BuildPrompt(trajectory_, data_, rules_).FullText(),
            BuildPrompt(trajectory_, data_, rules_).FullText());
}

TEST_F(PromptTest, OperatorBlockFollowsRules) {
  rules_.allowed_operators = OperatorSet::FromNames(std::vector<std::string>{"plus"});
  const PromptBundle p = BuildPrompt(trajectory_, data_, rules_);
  EXPECT_EQ(CountLines(p.operator_block, "- "), 1);
  EXPECT_NE(p.operator_block.find("- plus/2 (token: +)"), std::string::npos);
}

TEST_F(PromptTest, SummaryListsFeatures) {
  const PromptBundle p = BuildPrompt(trajectory_, data_, rules_);
  EXPECT_EQ(CountLines(p.dataset_summary, "f"), 5);
  EXPECT_NE(p.dataset_summary.find("f1: x1, mean="), std::string::npos);
  EXPECT_NE(p.FullText().find(p.UserText()), std::string::npos);
  EXPECT_NE(p.instruction_text.find("BEGIN_SEQUENCE"), std::string::npos);
}

TEST(ParseResponseTest, Extraction) {
  GenerationRules rules;
  rules.feature_count = 2;
  const TransformationSequence want = ParseSequence("f1,f2,/", OperatorSet::Default(), 2);
  EXPECT_EQ(ParseResponse("BEGIN_SEQUENCE f1,f2,/ END_SEQUENCE", rules), want);
  EXPECT_EQ(ParseResponse("Sure, here it is.\nBEGIN_SEQUENCE\nf1,f2,/\nEND_SEQUENCE\nHope it helps",
                          rules),
            want);
  EXPECT_EQ(ParseResponse("thinking...\nf1,f2,/\n", rules), want);
  EXPECT_EQ(ParseResponse(WrapInMarkers(want), rules), want);
}

TEST(ParseResponseTest, Errors) {
  GenerationRules rules;
  rules.feature_count = 2;
  rules.allowed_operators = OperatorSet::FromNames(std::vector<std::string>{"plus", "divide"});
  auto code = [&](const std::string& text) {
    try {
      ParseResponse(text, rules);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kOk;
  };
  EXPECT_EQ(code("BEGIN_SEQUENCE f1,log END_SEQUENCE"), ErrorCode::kDisallowedOperator);
  EXPECT_EQ(code("no sequence here"), ErrorCode::kNoSequenceFound);
  EXPECT_EQ(code("BEGIN_SEQUENCE f1,/ END_SEQUENCE"), ErrorCode::kStackUnderflow);
  EXPECT_EQ(code("BEGIN_SEQUENCE f7 END_SEQUENCE"), ErrorCode::kFeatureOutOfRange);
}

TEST_F(PromptTest, MockIsDeterministic) {
  const PromptBundle p = BuildPrompt(trajectory_, data_, rules_);
  MockPolicy mock;
  EXPECT_EQ(mock.Generate(p, {}, 42), mock.Generate(p, {}, 42));
  std::set<std::string> distinct;
  for (std::uint64_t s = 0; s < 20; ++s) distinct.insert(mock.Generate(p, {}, s));
  EXPECT_GT(distinct.size(), 5u);
}

TEST_F(PromptTest, MockOutputAlwaysParses) {
  MockPolicy mock;
  const std::vector<GenerationRules> variants = [&] {
    GenerationRules narrow = rules_;
    narrow.allowed_operators =
        OperatorSet::FromNames(std::vector<std::string>{"plus", "sqrt"});
    GenerationRules tight = rules_;
    tight.limits = {3, 2};
    return std::vector<GenerationRules>{rules_, narrow, tight};
  }();
  for (const GenerationRules& rules : variants) {
    const PromptBundle p = BuildPrompt(trajectory_, data_, rules);
    for (std::uint64_t s = 0; s < 500; ++s) {
      const std::string reply = mock.Generate(p, {}, s);
      ASSERT_NO_THROW(ParseResponse(reply, rules)) << reply;
    }
  }
}

}  // namespace
}  // namespace ftevolve
