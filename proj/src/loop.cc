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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <thread>

#include "json.hpp"
#include "seed.h"

namespace ftevolve {
namespace {

using json = nlohmann::json;

struct Candidate {
  CallStatus status = CallStatus::kParseError;
  std::string reason;
  std::optional<TransformationSequence> sequence;
  std::optional<Score> score;
};

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Runs fn(0..n-1) on up to `jobs` threads. The first exception (by index)
// is rethrown after all workers finish.
template <typename Fn>
void ParallelFor(int n, int jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto run = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  const int workers = std::clamp(jobs, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Context {
  PromptBundle prompt;
  std::string hash;
};

Context MakeContext(const ExperienceLibrary& library, std::vector<std::size_t> pool,
                    const Dataset& dataset, const LoopConfig& config) {
  if (pool.empty()) {
    throw Error(ErrorCode::kInsufficientExperiences,
                "the library holds no experiences for dataset '" + dataset.name() + "'");
  }
  GenerationRules rules{config.allowed_operators, dataset.feature_count(),
                        config.checks.limits};
  SelectionParams params = config.context;
  params.k = std::min<int>(params.k, static_cast<int>(pool.size()));
  Context ctx;
  if (params.k < 2) {
    // One-step context: the best experience alone.
    const auto& all = library.experiences();
    std::size_t best = pool.front();
    for (std::size_t i : pool) {
      if (all[i].score.value > all[best].score.value) best = i;
    }
    const std::vector<Demonstration> demo = {{all[best].sequence, all[best].score.value}};
    ctx.prompt = BuildPrompt(demo, dataset, rules);
  } else {
    ctx.prompt = BuildPrompt(BuildTrajectoryFrom(library, pool, params), dataset, rules);
  }
  ctx.hash = Hex(Fnv1a64(ctx.prompt.FullText()));
  return ctx;
}

// Seeded random half of the pool (never smaller than the context size).
std::vector<std::size_t> ResamplePool(std::vector<std::size_t> pool, int k,
                                      std::uint64_t seed) {
  const std::size_t want =
      std::max<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), (pool.size() + 1) / 2);
  if (pool.size() <= want) return pool;
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(want);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Candidate EvaluateCall(const Dataset& dataset, Policy& policy, const Context& ctx,
                       const LoopConfig& config, const EvaluationConfig& eval,
                       int iteration, int call) {
  std::string raw;
  try {
    raw = policy.Generate(ctx.prompt, config.sampling,
                          internal::DeriveSeed(config.seed,
                                               static_cast<std::uint64_t>(iteration),
                                               static_cast<std::uint64_t>(call)));
  } catch (const Error& e) {
    throw Error(e.code(), "iteration " + std::to_string(iteration) + ", call " +
                              std::to_string(call) + ": " + e.what());
  }
  Candidate c;
  try {
    c.sequence = ParseResponse(raw, ctx.prompt.rules);
  } catch (const Error& e) {
    c.status = CallStatus::kParseError;
    c.reason = e.what();
    return c;
  }
  const Verdict verdict = CheckSequence(*c.sequence, dataset, config.checks);
  if (!verdict.passed()) {
    c.status = CallStatus::kCheckFailed;
    c.reason = verdict.Describe();
    return c;
  }
  try {
    c.score = CrossValidatedScore(ExecuteSequence(*c.sequence, dataset), eval);
    c.status = CallStatus::kAccepted;
  } catch (const Error& e) {
    c.status = CallStatus::kEvalError;
    c.reason = e.what();
  }
  return c;
}

std::optional<Experience> BestOf(const ExperienceLibrary& library,
                                 const DatasetSignature& signature) {
  std::optional<Experience> best;
  for (std::size_t i : library.IndicesFor(signature)) {
    const Experience& e = library.experiences()[i];
    if (!best || e.score.value > best->score.value) best = e;
  }
  return best;
}

RunReport Run(const Dataset& dataset, ExperienceLibrary* mutable_library,
              const ExperienceLibrary& library, Policy& policy,
              const LoopConfig& config, const EvaluationConfig& eval) {
  ValidateLoopConfig(config);
  const DatasetSignature signature = SignatureOfDataset(dataset);
  const Score baseline = CrossValidatedScore(dataset, eval);

  RunReport report;
  report.mode = config.mode;
  report.dataset = dataset.name();
  report.feature_count = dataset.feature_count();
  report.iterations = config.iterations;
  report.candidates = config.candidates;
  report.metric = baseline.metric;
  report.baseline_score = baseline.value;
  report.library_version_before = library.version();
  report.library_size_before = library.size();
  report.final_best = BestOf(library, signature);
  if (!report.final_best) {
    throw Error(ErrorCode::kInsufficientExperiences,
                "the library holds no experiences for dataset '" + dataset.name() + "'");
  }
  report.initial_best = report.final_best->score.value;
  double best_so_far = report.initial_best;

  std::optional<Context> fixed;
  if (config.mode == LoopMode::kOneShotFixed) {
    fixed = MakeContext(library, TrajectoryPool(library, signature), dataset, config);
  }

  for (int t = 1; t <= config.iterations; ++t) {
    Context ctx;
    switch (config.mode) {
      case LoopMode::kClosedLoop:
        ctx = MakeContext(library, TrajectoryPool(library, signature), dataset, config);
        break;
      case LoopMode::kOneShotFixed:
        ctx = *fixed;
        break;
      case LoopMode::kOneShotResample:
        ctx = MakeContext(
            library,
            ResamplePool(TrajectoryPool(library, signature), config.context.k,
                         internal::DeriveSeed(config.seed, 0x5E1EC7ull,
                                              static_cast<std::uint64_t>(t))),
            dataset, config);
        break;
    }

    std::vector<Candidate> results(static_cast<std::size_t>(config.candidates));
    ParallelFor(config.candidates, config.jobs, [&](int j) {
      results[static_cast<std::size_t>(j)] =
          EvaluateCall(dataset, policy, ctx, config, eval, t, j + 1);
    });

    const std::size_t first_record = report.records.size();
    std::vector<std::size_t> survivors;
    for (std::size_t j = 0; j < results.size(); ++j) {
      const Candidate& c = results[j];
      CallRecord rec;
      rec.iteration = t;
      rec.call = static_cast<int>(j) + 1;
      rec.status = c.status;
      rec.reason = c.reason;
      rec.prompt_hash = ctx.hash;
      if (c.sequence) rec.sequence = RenderSequence(*c.sequence);
      if (c.score) {
        rec.score = c.score->value;
        survivors.push_back(j);
        if (c.score->value > best_so_far) {
          best_so_far = c.score->value;
          report.final_best = Experience{*c.sequence, *c.score, signature,
                                         Origin::kLlm, t};
        }
      }
      rec.best_so_far = best_so_far;
      report.records.push_back(std::move(rec));
    }

    if (mutable_library == nullptr) continue;

    // Rank by score (ties by call order), drop near-duplicates, keep the top.
    std::stable_sort(survivors.begin(), survivors.end(), [&](std::size_t a, std::size_t b) {
      return results[a].score->value > results[b].score->value;
    });
    std::vector<Experience> top;
    std::vector<std::size_t> top_calls;
    for (std::size_t j : survivors) {
      if (static_cast<int>(top.size()) >= config.keep_top) break;
      Experience e{*results[j].sequence, *results[j].score, signature, Origin::kLlm, t};
      const bool near_duplicate =
          std::any_of(top.begin(), top.end(), [&](const Experience& kept) {
            return Similarity(kept, e) > config.dedup_threshold ||
                   kept.sequence == e.sequence;
          });
      if (near_duplicate) continue;
      top.push_back(std::move(e));
      top_calls.push_back(j);
    }
    const WriteBackResult wb = mutable_library->WriteBack(top, config.dedup_threshold);
    for (std::size_t pos : wb.accepted) {
      report.records[first_record + top_calls[pos]].written_back = true;
    }
  }

  report.library_version_after = library.version();
  report.library_size_after = library.size();
  return report;
}

}  // namespace

std::string_view LoopModeName(LoopMode mode) {
  switch (mode) {
    case LoopMode::kClosedLoop: return "closed_loop";
    case LoopMode::kOneShotFixed: return "one_shot_fixed";
    case LoopMode::kOneShotResample: return "one_shot_resample";
  }
  return "?";
}

LoopMode ParseLoopMode(std::string_view text) {
  if (text == "closed_loop") return LoopMode::kClosedLoop;
  if (text == "one_shot_fixed" || text == "fixed") return LoopMode::kOneShotFixed;
  if (text == "one_shot_resample" || text == "resample") return LoopMode::kOneShotResample;
  throw Error(ErrorCode::kInvalidArgument, "unknown loop mode '" + std::string(text) + "'");
}

std::string_view CallStatusName(CallStatus status) {
  switch (status) {
    case CallStatus::kAccepted: return "accepted";
    case CallStatus::kParseError: return "parse_error";
    case CallStatus::kCheckFailed: return "check_failed";
    case CallStatus::kEvalError: return "eval_error";
  }
  return "?";
}

CallStatus ParseCallStatus(std::string_view text) {
  if (text == "accepted") return CallStatus::kAccepted;
  if (text == "parse_error") return CallStatus::kParseError;
  if (text == "check_failed") return CallStatus::kCheckFailed;
  if (text == "eval_error") return CallStatus::kEvalError;
  throw Error(ErrorCode::kMalformedReport, "unknown call status '" + std::string(text) + "'");
}

void ValidateLoopConfig(const LoopConfig& c) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "loop: " + msg);
  };
  if (c.iterations < 1) fail("iterations must be >= 1");
  if (c.candidates < 1) fail("candidates must be >= 1");
  if (c.keep_top < 0) fail("keep_top must be >= 0");
  if (c.context.k < 1) fail("context size must be >= 1");
  if (c.context.lambda < 0 || c.context.mu < 0) fail("lambda and mu must be >= 0");
  if (c.dedup_threshold < 0 || c.dedup_threshold > 1) fail("dedup threshold must be in [0, 1]");
  if (c.jobs < 1) fail("jobs must be >= 1");
}

std::vector<double> RunReport::BestSoFar() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const CallRecord& r : records) out.push_back(r.best_so_far);
  return out;
}

double RunReport::FinalBestScore() const {
  return records.empty() ? initial_best : records.back().best_so_far;
}

RunReport RunClosedLoop(const Dataset& dataset, ExperienceLibrary& library,
                        Policy& policy, const LoopConfig& config,
                        const EvaluationConfig& eval) {
  if (config.mode != LoopMode::kClosedLoop) {
    throw Error(ErrorCode::kInvalidArgument, "RunClosedLoop needs mode closed_loop");
  }
  return Run(dataset, &library, library, policy, config, eval);
}

RunReport RunOneShot(const Dataset& dataset, const ExperienceLibrary& library,
                     Policy& policy, const LoopConfig& config,
                     const EvaluationConfig& eval) {
  if (config.mode == LoopMode::kClosedLoop) {
    throw Error(ErrorCode::kInvalidArgument, "RunOneShot needs a one-shot mode");
  }
  return Run(dataset, nullptr, library, policy, config, eval);
}

BehaviorStats ComputeBehaviorStats(std::span<const TransformationSequence> sequences,
                                   int feature_count) {
  BehaviorStats stats;
  stats.sequences = static_cast<int>(sequences.size());
  stats.feature_usage.assign(static_cast<std::size_t>(std::max(feature_count, 0)), 0);
  for (const TransformationSequence& s : sequences) {
    for (const Combination& c : s.combinations) {
      for (const Token& t : c.tokens) {
        if (t.is_operator()) {
          const OperatorDescriptor& d = DescriptorOf(t.op);
          ++stats.operator_counts[d.name];
          ++(d.group == OperatorGroup::kSimple ? stats.simple_count : stats.complex_count);
        } else if (t.is_feature() && t.feature < feature_count) {
          ++stats.feature_usage[static_cast<std::size_t>(t.feature)];
        }
      }
    }
  }
  const int ops = stats.simple_count + stats.complex_count;
  stats.simple_ratio = ops > 0 ? static_cast<double>(stats.simple_count) / ops : 0.0;
  double total = 0.0;
  for (int u : stats.feature_usage) total += u;
  for (int u : stats.feature_usage) {
    if (u > 0) {
      const double p = u / total;
      stats.feature_usage_entropy -= p * std::log(p);
    }
  }
  return stats;
}

BehaviorStats ComputeBehaviorStats(const RunReport& report) {
  if (report.records.empty()) throw Error(ErrorCode::kEmptyReport, "report has no calls");
  std::vector<TransformationSequence> seqs;
  const SequenceLimits loose{1 << 20, 1 << 20};
  for (const CallRecord& r : report.records) {
    if (r.sequence.empty()) continue;
    seqs.push_back(ParseSequence(r.sequence, OperatorSet::Default(), report.feature_count, loose));
  }
  return ComputeBehaviorStats(seqs, report.feature_count);
}

std::string RunReportToJsonl(const RunReport& report) {
  std::string out;
  for (const CallRecord& r : report.records) {
    json j = {{"mode", std::string(LoopModeName(report.mode))},
              {"dataset", report.dataset},
              {"features", report.feature_count},
              {"metric", std::string(MetricName(report.metric))},
              {"iterations", report.iterations},
              {"candidates", report.candidates},
              {"baseline_score", report.baseline_score},
              {"initial_best", report.initial_best},
              {"iteration", r.iteration},
              {"call", r.call},
              {"status", std::string(CallStatusName(r.status))},
              {"reason", r.reason},
              {"sequence", r.sequence},
              {"score", r.score ? json(*r.score) : json(nullptr)},
              {"best_so_far", r.best_so_far},
              {"written_back", r.written_back},
              {"prompt_hash", r.prompt_hash}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string RunReportSummaryJson(const RunReport& report) {
  json summary = {{"mode", std::string(LoopModeName(report.mode))},
                  {"dataset", report.dataset},
                  {"features", report.feature_count},
                  {"metric", std::string(MetricName(report.metric))},
                  {"iterations", report.iterations},
                  {"candidates", report.candidates},
                  {"calls", report.records.size()},
                  {"baseline_score", report.baseline_score},
                  {"initial_best", report.initial_best},
                  {"final_best_score", report.FinalBestScore()},
                  {"best_so_far", report.BestSoFar()}};
  int accepted = 0, written = 0;
  std::map<std::string, int> by_status;
  for (const CallRecord& r : report.records) {
    accepted += r.status == CallStatus::kAccepted;
    written += r.written_back;
    ++by_status[std::string(CallStatusName(r.status))];
  }
  summary["accepted_calls"] = accepted;
  summary["written_back"] = written;
  summary["status_counts"] = by_status;
  if (report.final_best) {
    summary["final_best"] = {{"sequence", RenderSequence(report.final_best->sequence)},
                             {"infix", RenderSequence(report.final_best->sequence,
                                                      RenderStyle::kInfix)},
                             {"score", report.final_best->score.value},
                             {"origin", std::string(OriginName(report.final_best->origin))},
                             {"iteration", report.final_best->iteration}};
  }
  summary["library"] = {{"version_before", report.library_version_before},
                        {"version_after", report.library_version_after},
                        {"size_before", report.library_size_before},
                        {"size_after", report.library_size_after}};
  if (!report.records.empty()) {
    const BehaviorStats stats = ComputeBehaviorStats(report);
    summary["behavior"] = {{"sequences", stats.sequences},
                           {"operator_counts", stats.operator_counts},
                           {"simple_count", stats.simple_count},
                           {"complex_count", stats.complex_count},
                           {"simple_ratio", stats.simple_ratio},
                           {"feature_usage", stats.feature_usage},
                           {"feature_usage_entropy", stats.feature_usage_entropy}};
  }
  return summary.dump(2) + "\n";
}

RunReport RunReportFromJsonl(std::string_view text) {
  RunReport report;
  std::size_t pos = 0;
  int line_no = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      if (first) {
        report.mode = ParseLoopMode(j.at("mode").get<std::string>());
        report.dataset = j.at("dataset").get<std::string>();
        report.feature_count = j.at("features").get<int>();
        report.metric = ParseMetric(j.at("metric").get<std::string>());
        report.iterations = j.at("iterations").get<int>();
        report.candidates = j.at("candidates").get<int>();
        report.baseline_score = j.at("baseline_score").get<double>();
        report.initial_best = j.at("initial_best").get<double>();
        first = false;
      }
      CallRecord r;
      r.iteration = j.at("iteration").get<int>();
      r.call = j.at("call").get<int>();
      r.status = ParseCallStatus(j.at("status").get<std::string>());
      r.reason = j.at("reason").get<std::string>();
      r.sequence = j.at("sequence").get<std::string>();
      if (!j.at("score").is_null()) r.score = j.at("score").get<double>();
      r.best_so_far = j.at("best_so_far").get<double>();
      r.written_back = j.at("written_back").get<bool>();
      r.prompt_hash = j.at("prompt_hash").get<std::string>();
      report.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedReport,
                  "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedReport,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (report.records.empty()) throw Error(ErrorCode::kEmptyReport, "no call records");
  return report;
}

}  // namespace ftevolve
