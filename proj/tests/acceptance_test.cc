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

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ftevolve/error.h"
#include "ftevolve/eval.h"
#include "ftevolve/explore.h"
#include "ftevolve/expr.h"
#include "ftevolve/library.h"
#include "ftevolve/loop.h"
#include "ftevolve/policy.h"
#include "ftevolve/refine.h"
#include "ftevolve/report.h"
#include "ftevolve/table.h"
#include "test_support.h"

namespace ftevolve {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

const Dataset& Fixture() {
  static const Dataset d = testing::RatioFixture();
  return d;
}

const DatasetSignature& Sig() {
  static const DatasetSignature s = SignatureOfDataset(testing::RatioFixture(1, 20));
  return s;
}

Experience E(const std::string& postfix, double score = 0.5) {
  return testing::MakeExperience(postfix, score, Sig());
}

LoopConfig Loop(LoopMode mode, std::uint64_t seed) {
  LoopConfig c;
  c.iterations = 10;
  c.candidates = 10;
  c.mode = mode;
  c.seed = seed;
  return c;
}

bool NonDecreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) return false;
  }
  return true;
}

Outcome RoundTrip() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  int ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const TransformationSequence s = testing::RandomSequence(rng, OperatorSet::Default(), 6, {});
    if (ParseSequence(RenderSequence(s), OperatorSet::Default(), 6) == s) ++ok;
  }
  const double secs = Seconds(start);
  o.Require(ok == 1000, std::to_string(ok) + "/1000 round-trip");
  o.Require(secs < 1.0, Fmt("took %.3f s", secs));
  o.detail = o.pass ? Fmt("1000/1000 in %.3f s", secs) : o.detail;
  return o;
}

Outcome ExecutorOracle() {
  Outcome o;
  const auto start = Clock::now();
  const Dataset d = testing::RandomTable(17, 50, 5);
  std::mt19937_64 rng(23);
  int ok = 0;
  for (int i = 0; i < 200; ++i) {
    const Combination c = testing::RandomCombination(rng, OperatorSet::Default(), 5, 15);
    const std::vector<double> got = ExecuteCombination(c, d).values;
    const std::vector<double> want =
        testing::InfixOracle(RenderCombination(c, RenderStyle::kInfix), d);
    bool same = got.size() == want.size();
    for (std::size_t r = 0; same && r < got.size(); ++r) {
      if (std::isnan(got[r]) != std::isnan(want[r])) same = false;
      else if (!std::isnan(got[r]) && std::isfinite(got[r]) && std::fabs(got[r] - want[r]) > 1e-9)
        same = false;
      else if (std::isinf(got[r]) && got[r] != want[r]) same = false;
    }
    if (same) ++ok;
    else o.Require(false, "mismatch on " + RenderCombination(c, RenderStyle::kInfix));
  }
  const double secs = Seconds(start);
  o.Require(secs < 5.0, Fmt("took %.3f s", secs));
  if (o.pass) o.detail = Fmt("200/200 in %.3f s", secs);
  return o;
}

Outcome MetricGoldens() {
  using V = std::vector<double>;
  Outcome o;
  auto near = [&](double got, double want, const char* what) {
    o.Require(std::fabs(got - want) <= 1e-12, Fmt("%s: got %.15g want %.15g", 0) + what);
  };
  // TP=1 FP=1 FN=1.
  near(F1Score(V{1, 0, 1, 0}, V{1, 1, 0, 0}, F1Averaging::kBinary).value, 0.5, "binary f1");
  near(F1Score(V{1, 1, 0, 0}, V{1, 1, 0, 0}, F1Averaging::kBinary).value, 1.0, "perfect f1");
  // Per class: 1, 0, 2*2/(2*2+1) = 0.8.
  near(F1Score(V{0, 2, 2, 2}, V{0, 1, 2, 2}, F1Averaging::kMacro).value, 1.8 / 3, "macro f1");
  near(OneMinusRae(V{1, 2, 3}, V{1, 2, 3}).value, 1.0, "perfect rae");
  near(OneMinusRae(V{2, 2, 2}, V{1, 2, 3}).value, 0.0, "mean predictor");
  // |err| = 0 + 0 + 2 over |a - mean| = 1 + 0 + 1.
  near(OneMinusRae(V{1, 2, 5}, V{1, 2, 3}).value, 0.0, "rae 2/2");
  // |err| = 0.5 + 0.5 over 4 deviations of 1.5, 0.5, 0.5, 1.5.
  near(OneMinusRae(V{1.5, 2, 3, 3.5}, V{1, 2, 3, 4}).value, 1.0 - 1.0 / 4.0, "rae 1/4");
  if (o.pass) o.detail = "7 fixtures within 1e-12";
  return o;
}

// Ten high scorers sharing a pattern plus five distinct mid scorers.
std::vector<Experience> AdversarialFixture() {
  std::vector<Experience> out;
  int n = 0;
  for (int a = 1; a <= 5 && n < 10; ++a) {
    for (int b = 1; b <= 5 && n < 10; ++b) {
      if (a == b || (a == 1 && b == 2) || (a == 2 && b == 1)) continue;
      out.push_back(E("f1,f2,/,<SEP>,f2,f1,/,<SEP>,f" + std::to_string(a) + ",f" +
                          std::to_string(b) + ",/",
                      0.90 + 0.001 * n));
      ++n;
    }
  }
  const char* mids[] = {"f1,sqrt", "f2,log", "f3,f4,+", "f1,f5,*", "f5,tanh"};
  for (int i = 0; i < 5; ++i) out.push_back(E(mids[i], 0.80 + 0.01 * i));
  return out;
}

Outcome SelectionObjectiveChecks() {
  Outcome o;
  const std::vector<Experience> four = {E("f1,sqrt"), E("f1,log"), E("f1,sin"), E("f1,cos")};
  o.Require(std::fabs(Entropy(four) - std::log(4.0)) <= 1e-9, "entropy ln 4");
  const std::vector<Experience> aabc = {E("f1,sqrt"), E("f2,sqrt"), E("f1,sin"), E("f1,cos")};
  o.Require(std::fabs(Entropy(aabc) - 1.039721) <= 1e-6 &&
                std::fabs(Entropy(aabc) - testing::OracleEntropy(aabc)) <= 1e-9,
            Fmt("entropy aabc %.9f", Entropy(aabc)));
  const std::vector<Experience> twins = {E("f1,sqrt"), E("f1,sqrt")};
  o.Require(Redundancy(twins) == 1.0, "twins redundancy");
  const std::vector<Experience> three = {E("f1,sqrt,<SEP>,f2,log"), E("f1,sqrt,<SEP>,f2,log"),
                                         E("f1,sqrt,<SEP>,f3,sin")};
  o.Require(std::fabs(Redundancy(three) - 5.0 / 9.0) <= 1e-9 &&
                std::fabs(Redundancy(three) - testing::OracleRedundancy(three)) <= 1e-9,
            Fmt("redundancy %.9f", Redundancy(three)));

  const std::vector<Experience> items = AdversarialFixture();
  ExperienceLibrary lib;
  lib.WriteBack(items);
  std::vector<std::size_t> top = lib.SelectContext(Sig(), {4, 0.0, 0.0});
  std::vector<std::size_t> by_score(items.size());
  for (std::size_t i = 0; i < by_score.size(); ++i) by_score[i] = i;
  std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
    return items[a].score.value > items[b].score.value;
  });
  by_score.resize(4);
  std::sort(top.begin(), top.end());
  std::sort(by_score.begin(), by_score.end());
  o.Require(top == by_score, "zero weights did not return top-K");

  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<Experience> v;
    for (std::size_t i : idx) v.push_back(lib.experiences()[i]);
    return v;
  };
  const auto plain = gather(top);
  const auto diverse = gather(lib.SelectContext(Sig(), {4, 0.5, 0.5}));
  const double h0 = testing::OracleEntropy(plain), h1 = testing::OracleEntropy(diverse);
  const double r0 = testing::OracleRedundancy(plain), r1 = testing::OracleRedundancy(diverse);
  o.Require(h1 > h0 && r1 < r0, Fmt("H %.4f vs %.4f, Red ", h1, h0) + Fmt("%.4f vs %.4f", r1, r0));
  if (o.pass) o.detail = Fmt("top-K H=%.4f Red=%.4f; ", h0, r0) + Fmt("guided H=%.4f Red=%.4f", h1, r1);
  return o;
}

Outcome GreedyVsExhaustive() {
  Outcome o;
  const std::vector<Experience> items = {E("f1,f2,/", 0.95), E("f1,f2,/,<SEP>,f3,sqrt", 0.93),
                                         E("f2,reciprocal", 0.80), E("f4,log", 0.70),
                                         E("f1,f5,*", 0.60)};
  ExperienceLibrary lib;
  lib.WriteBack(items);
  const double lambda = 0.05, mu = 0.10;
  const auto chosen = lib.SelectContext(Sig(), {2, lambda, mu});
  if (chosen.size() != 2) return {false, "selection size " + std::to_string(chosen.size())};
  const double greedy = testing::OracleObjective({items[chosen[0]], items[chosen[1]]}, lambda, mu);
  double best = -1e300;
  int subsets = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j, ++subsets) {
      best = std::max(best, testing::OracleObjective({items[i], items[j]}, lambda, mu));
    }
  }
  o.Require(subsets == 10 && std::fabs(greedy - best) <= 1e-12,
            Fmt("greedy %.12f vs optimum %.12f", greedy, best));
  if (o.pass) o.detail = Fmt("J = %.6f over 10 subsets", best);
  return o;
}

Outcome CheckerRejects() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> a, b, y;
  for (int i = 0; i < 200; ++i) {
    a.push_back(u(rng));
    b.push_back(i % 10 == 0 ? 0.0 : u(rng));  // exactly 10% zeros
    y.push_back(u(rng));
  }
  const Dataset d("z", {{"a", a}, {"b", b}}, y, TaskKind::kRegression);
  const CheckContext ctx;

  struct Case {
    const char* name;
    TransformationSequence seq;
    CheckLevel level;
    const char* tag;
  };
  // Token feature indices are 0-based.
  auto seq = [](std::vector<Token> tokens) {
    TransformationSequence s;
    s.combinations.push_back({std::move(tokens)});
    return s;
  };
  const std::vector<Case> cases = {
      {"unknown feature", seq({Token::Feature(7), Token::Operator(OpCode::kSqrt)}),
       CheckLevel::kSyntactic, "FeatureOutOfRange"},
      {"stack underflow", seq({Token::Feature(0), Token::Operator(OpCode::kDivide)}),
       CheckLevel::kSyntactic, "StackUnderflow"},
      {"division by 10% zeros",
       seq({Token::Feature(0), Token::Feature(1), Token::Operator(OpCode::kDivide)}),
       CheckLevel::kStability, "NaN"},
      {"zero variance",
       seq({Token::Feature(0), Token::Feature(0), Token::Operator(OpCode::kMinus)}),
       CheckLevel::kStability, "std"},
  };
  int rejected = 0;
  std::string seen;
  for (const Case& c : cases) {
    const Verdict v = CheckSequence(c.seq, d, ctx);
    const bool ok = !v.passed() && v.reasons[0].level == c.level &&
                    v.reasons[0].message.find(c.tag) != std::string::npos;
    if (ok) ++rejected;
    o.Require(ok, std::string(c.name) + ": " + (v.passed() ? "accepted" : v.Describe()));
  }
  // The unknown token in text form never reaches the checker.
  try {
    ParseSequence("f1,f9x,+", OperatorSet::Default(), 2);
    o.Require(false, "unknown token parsed");
  } catch (const Error& e) {
    o.Require(e.code() == ErrorCode::kUnknownToken, e.what());
  }
  if (o.pass) o.detail = std::to_string(rejected) + "/4 rejected with expected tags";
  return o;
}

Outcome Telescoping() {
  Outcome o;
  int episodes = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    ExplorerConfig cfg;
    cfg.seed = seed;
    cfg.episodes = 20;
    const ExplorationResult r = RunExploration(Fixture(), {}, cfg);
    for (const EpisodeTrace& ep : r.episodes) {
      double sum = 0.0;
      for (double x : ep.rewards) sum += x;
      ++episodes;
      o.Require(sum == ep.final_score - ep.baseline_score,
                Fmt("seed %.0f episode %.0f off by %.3g", static_cast<double>(seed), ep.episode,
                    sum - (ep.final_score - ep.baseline_score)));
    }
  }
  if (o.pass) o.detail = std::to_string(episodes) + " episodes exact";
  return o;
}

Outcome EndToEnd() {
  Outcome o;
  const auto start = Clock::now();
  const Dataset d = testing::RatioFixture();
  ExperienceLibrary lib = testing::SeedLibrary(d, 1);
  MockPolicy mock;
  const RunReport r = RunClosedLoop(d, lib, mock, Loop(LoopMode::kClosedLoop, 1), {});
  const double secs = Seconds(start);
  const double gain = r.FinalBestScore() - r.baseline_score;
  o.Require(gain >= 0.10, Fmt("gain %.4f", gain));
  o.Require(secs < 120.0, Fmt("took %.1f s", secs));
  o.detail = Fmt("baseline %.4f final %.4f (%.2f s)", r.baseline_score, r.FinalBestScore(), secs) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome ClosedVsOneShot() {
  Outcome o;
  const Dataset& d = Fixture();
  MockPolicy mock;
  int wins = 0;
  std::string pairs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ExperienceLibrary seeded = testing::SeedLibrary(d, seed);
    ExperienceLibrary lib = seeded;
    const RunReport closed = RunClosedLoop(d, lib, mock, Loop(LoopMode::kClosedLoop, seed), {});
    const RunReport once =
        RunOneShot(d, seeded, mock, Loop(LoopMode::kOneShotResample, seed), {});
    if (closed.FinalBestScore() >= once.FinalBestScore()) ++wins;
    o.Require(NonDecreasing(closed.BestSoFar()), "best-so-far dropped, seed " + std::to_string(seed));
    pairs += Fmt(" %.4f/%.4f", closed.FinalBestScore(), once.FinalBestScore());
  }
  o.Require(wins >= 8, std::to_string(wins) + "/10 closed >= one-shot;" + pairs);
  if (o.pass) o.detail = std::to_string(wins) + "/10 closed >= one-shot;" + pairs;
  return o;
}

Outcome LibrarySize() {
  Outcome o;
  const Dataset& d = Fixture();
  MockPolicy mock;
  std::string pairs;
  int holds = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperienceLibrary big = testing::SeedLibrary(d, seed, 20);
    ExperienceLibrary one = testing::SeedLibrary(d, seed, 1);
    const double s20 = RunClosedLoop(d, big, mock, Loop(LoopMode::kClosedLoop, seed), {}).FinalBestScore();
    const double s1 = RunClosedLoop(d, one, mock, Loop(LoopMode::kClosedLoop, seed), {}).FinalBestScore();
    if (s20 >= s1) ++holds;
    pairs += Fmt(" %.4f/%.4f", s20, s1);
  }
  o.Require(holds == 5, std::to_string(holds) + "/5 seeds |E0|=20 >= |E0|=1;" + pairs);
  if (o.pass) o.detail = "5/5 seeds;" + pairs;
  return o;
}

Outcome PurityAndAccounting() {
  Outcome o;
  const Dataset d = testing::RatioFixture(7, 300);
  const ExperienceLibrary seeded = testing::SeedLibrary(d, 4);
  const std::uint64_t hash = seeded.ContentHash();
  MockPolicy mock;
  const std::vector<std::pair<int, int>> shapes = {{1, 1}, {3, 4}, {5, 2}};
  int runs = 0;
  for (auto [t, b] : shapes) {
    for (LoopMode mode : {LoopMode::kOneShotFixed, LoopMode::kOneShotResample, LoopMode::kClosedLoop}) {
      LoopConfig c = Loop(mode, 9);
      c.iterations = t;
      c.candidates = b;
      ExperienceLibrary copy = seeded;
      const RunReport r = mode == LoopMode::kClosedLoop ? RunClosedLoop(d, copy, mock, c, {})
                                                        : RunOneShot(d, seeded, mock, c, {});
      ++runs;
      o.Require(r.records.size() == static_cast<std::size_t>(t * b),
                std::string(LoopModeName(mode)) + " emitted " + std::to_string(r.records.size()));
      const RunReport parsed = RunReportFromJsonl(RunReportToJsonl(r));
      o.Require(parsed.records.size() == static_cast<std::size_t>(t * b), "jsonl record count");
      o.Require(seeded.ContentHash() == hash, "hash changed");
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs, hash unchanged after one-shot";
  return o;
}

Outcome Determinism() {
  Outcome o;
  const Dataset d = testing::RatioFixture(7, 300);
  std::string library[2], jsonl[2], summary[2];
  std::map<std::string, std::string> charts[2];
  for (int k = 0; k < 2; ++k) {
    const auto dir = testing::TempDir("determinism");
    ExperienceLibrary lib = testing::SeedLibrary(d, 12);
    MockPolicy mock;
    LoopConfig c = Loop(LoopMode::kClosedLoop, 12);
    c.iterations = 4;
    c.jobs = k + 1;  // thread count must not matter either
    const RunReport r = RunClosedLoop(d, lib, mock, c, {});
    lib.Save(dir / "library.json");
    WriteReportFiles(r, dir);
    library[k] = testing::ReadFile(dir / "library.json");
    jsonl[k] = RunReportToJsonl(r);
    summary[k] = RunReportSummaryJson(r);
    for (const auto& [name, unused] : RenderReportFiles(r)) {
      charts[k][name] = testing::ReadFile(dir / name);
    }
  }
  o.Require(library[0] == library[1], "library files differ");
  o.Require(jsonl[0] == jsonl[1], "jsonl differs");
  o.Require(summary[0] == summary[1], "summary differs");
  o.Require(charts[0] == charts[1], "report files differ");
  if (o.pass) o.detail = "library, jsonl, summary and " + std::to_string(charts[0].size()) +
                         " report files identical";
  return o;
}

}  // namespace
}  // namespace ftevolve

int main() {
  using ftevolve::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"DSL round-trip", ftevolve::RoundTrip},
      {"executor oracle", ftevolve::ExecutorOracle},
      {"metric goldens", ftevolve::MetricGoldens},
      {"selection objective", ftevolve::SelectionObjectiveChecks},
      {"greedy vs exhaustive", ftevolve::GreedyVsExhaustive},
      {"checker hard rejects", ftevolve::CheckerRejects},
      {"reward telescoping", ftevolve::Telescoping},
      {"synthetic end-to-end", ftevolve::EndToEnd},
      {"closed loop vs one-shot", ftevolve::ClosedVsOneShot},
      {"library-size ablation", ftevolve::LibrarySize},
      {"one-shot purity and call accounting", ftevolve::PurityAndAccounting},
      {"determinism", ftevolve::Determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
