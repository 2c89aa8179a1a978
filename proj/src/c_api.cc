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

#include "ftevolve/ftevolve.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "ftevolve/config.h"
#include "ftevolve/error.h"
#include "ftevolve/library.h"
#include "ftevolve/loop.h"
#include "ftevolve/report.h"
#include "json.hpp"

struct fte_dataset {
  ftevolve::Dataset dataset;
};

struct fte_library {
  ftevolve::ExperienceLibrary library;
};

struct fte_policy {
  std::unique_ptr<ftevolve::Policy> policy;
};

namespace {

using ftevolve::Error;
using ftevolve::ErrorCode;
using json = nlohmann::json;

thread_local std::string last_error;

int Fail(ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<int>(code);
}

template <typename Fn>
int Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return FTE_OK;
  } catch (const Error& e) {
    return Fail(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(ErrorCode::kInternal, "out of memory");
  } catch (const std::exception& e) {
    return Fail(ErrorCode::kInternal, e.what());
  } catch (...) {
    return Fail(ErrorCode::kInternal, "unknown exception");
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is null");
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ftevolve::RunConfig ConfigFrom(const char* config_json) {
  if (config_json == nullptr) {
    ftevolve::RunConfig c;
    c.Propagate();
    return c;
  }
  return ftevolve::ParseRunConfig(config_json);
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

json WriteBackJson(const ftevolve::WriteBackResult& r) {
  return {{"added", r.added},
          {"dropped_duplicate", r.dropped_duplicate},
          {"dropped_near_duplicate", r.dropped_near_duplicate}};
}

}  // namespace

extern "C" {

const char* fte_version(void) { return "0.1.0"; }

const char* fte_status_name(int status) {
  // ErrorCodeName returns views over string literals.
  return ftevolve::ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

const char* fte_last_error_message(void) { return last_error.c_str(); }

void fte_free_string(char* s) { std::free(s); }

int fte_dataset_load_csv(const char* path, const char* target, const char* task,
                         fte_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(task, "task");
    Require(out, "out");
    std::optional<std::string> column;
    if (target != nullptr) column = target;
    auto d = std::make_unique<fte_dataset>(
        fte_dataset{ftevolve::LoadCsv(path, column, ftevolve::ParseTask(task))});
    *out = d.release();
  });
}

void fte_dataset_free(fte_dataset* dataset) { delete dataset; }

int fte_dataset_info(const fte_dataset* dataset, char** out_json) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out_json, "out_json");
    const ftevolve::Dataset& d = dataset->dataset;
    json cols = json::array();
    for (const auto& c : d.columns()) cols.push_back(c.name);
    json j = {{"name", d.name()},
              {"rows", d.rows()},
              {"features", d.feature_count()},
              {"task", std::string(ftevolve::TaskName(d.task()))},
              {"columns", cols}};
    *out_json = Dup(j.dump());
  });
}

int fte_library_load(const char* path, fte_library** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto lib = std::make_unique<fte_library>(
        fte_library{ftevolve::ExperienceLibrary::Load(path)});
    *out = lib.release();
  });
}

int fte_library_new(fte_library** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new fte_library();
  });
}

int fte_library_save(const fte_library* library, const char* path) {
  return Guard([&] {
    Require(library, "library");
    Require(path, "path");
    library->library.Save(path);
  });
}

void fte_library_free(fte_library* library) { delete library; }

int fte_library_size(const fte_library* library, size_t* out) {
  return Guard([&] {
    Require(library, "library");
    Require(out, "out");
    *out = library->library.size();
  });
}

int fte_library_version(const fte_library* library, int64_t* out) {
  return Guard([&] {
    Require(library, "library");
    Require(out, "out");
    *out = library->library.version();
  });
}

int fte_library_hash(const fte_library* library, uint64_t* out) {
  return Guard([&] {
    Require(library, "library");
    Require(out, "out");
    *out = library->library.ContentHash();
  });
}

int fte_policy_create(const char* config_json, fte_policy** out) {
  return Guard([&] {
    Require(out, "out");
    auto p = std::make_unique<fte_policy>(fte_policy{ftevolve::MakePolicy(ConfigFrom(config_json))});
    *out = p.release();
  });
}

void fte_policy_free(fte_policy* policy) { delete policy; }

int fte_evaluate(const fte_dataset* dataset, const char* config_json, const char* sequence,
                 char** out_json) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out_json, "out_json");
    const ftevolve::RunConfig config = ConfigFrom(config_json);
    const ftevolve::Dataset& d = dataset->dataset;
    json j;
    ftevolve::CvResult cv;
    if (sequence != nullptr) {
      const ftevolve::TransformationSequence seq = ftevolve::ParseSequence(
          sequence, config.loop.allowed_operators, d.feature_count(), config.loop.checks.limits);
      cv = ftevolve::CrossValidate(ftevolve::ExecuteSequence(seq, d, config.execution_mode),
                                   config.evaluation);
      j["sequence"] = ftevolve::RenderSequence(seq);
      j["infix"] = ftevolve::RenderSequence(seq, ftevolve::RenderStyle::kInfix);
      j["mode"] = std::string(ftevolve::ExecutionModeName(config.execution_mode));
    } else {
      cv = ftevolve::CrossValidate(d, config.evaluation);
    }
    j["dataset"] = d.name();
    j["metric"] = std::string(ftevolve::MetricName(cv.score.metric));
    j["score"] = cv.score.value;
    j["fold_scores"] = cv.fold_scores;
    j["diagnostics"] = cv.diagnostics;
    *out_json = Dup(j.dump());
  });
}

int fte_explore(const fte_dataset* dataset, fte_library* library, const char* config_json,
                char** out_json) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(library, "library");
    Require(out_json, "out_json");
    const ftevolve::RunConfig config = ConfigFrom(config_json);
    const ftevolve::ExplorationResult r = ftevolve::RunExploration(
        dataset->dataset, config.evaluation, config.explorer, config.loop.checks);
    const ftevolve::WriteBackResult wb =
        library->library.WriteBack(r.experiences, config.loop.dedup_threshold);
    json j = {{"dataset", dataset->dataset.name()},
              {"metric", std::string(ftevolve::MetricName(r.metric))},
              {"baseline_score", r.baseline_score},
              {"episodes", r.episodes.size()},
              {"candidates", r.experiences.size()},
              {"best_score", r.experiences.empty() ? json(nullptr)
                                                   : json(r.experiences.front().score.value)},
              {"write_back", WriteBackJson(wb)},
              {"library_size", library->library.size()},
              {"library_version", library->library.version()}};
    *out_json = Dup(j.dump());
  });
}

int fte_refine(const fte_dataset* dataset, fte_library* library, fte_policy* policy,
               const char* config_json, char** out_json) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(library, "library");
    Require(out_json, "out_json");
    const ftevolve::RunConfig config = ConfigFrom(config_json);
    const ftevolve::Dataset& d = dataset->dataset;
    ftevolve::ExperienceLibrary& lib = library->library;
    const ftevolve::DatasetSignature sig = ftevolve::SignatureOfDataset(d);

    // Checks first, then the outlier fence over what survived.
    std::vector<std::size_t> remove;
    std::vector<std::size_t> passed;
    json rejected = json::array();
    for (std::size_t i : lib.IndicesFor(sig)) {
      const ftevolve::Experience& e = lib.experiences()[i];
      const ftevolve::Verdict v =
          ftevolve::CheckSequence(e.sequence, d, config.loop.checks, config.refine.utility);
      if (v.passed()) {
        passed.push_back(i);
      } else {
        remove.push_back(i);
        rejected.push_back({{"sequence", ftevolve::RenderSequence(e.sequence)},
                            {"reason", v.Describe()}});
      }
    }
    const std::size_t failed_checks = remove.size();
    std::vector<ftevolve::Experience> pool;
    for (std::size_t i : passed) pool.push_back(lib.experiences()[i]);
    std::vector<bool> survives(pool.size(), false);
    for (std::size_t k : ftevolve::OutlierSurvivors(pool)) survives[k] = true;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (!survives[k]) remove.push_back(passed[k]);
    }
    const std::size_t outliers = remove.size() - failed_checks;
    lib.Remove(remove);

    json j = {{"dataset", d.name()},
              {"failed_checks", failed_checks},
              {"outliers", outliers},
              {"rejected", rejected}};
    if (config.refine.enhance) {
      Require(policy, "policy");
      const ftevolve::CoTTrajectory traj =
          ftevolve::BuildTrajectory(lib, sig, config.loop.context);
      ftevolve::EnhancementOptions opts;
      opts.variants_per_pair = config.refine.variants_per_pair;
      opts.seed = config.seed;
      const ftevolve::EnhancementResult er = ftevolve::EnhanceTrajectory(
          traj, policy->policy.get(), d, config.evaluation, config.loop.checks,
          config.RulesFor(d.feature_count()), config.loop.sampling, opts);
      const ftevolve::WriteBackResult wb =
          lib.WriteBack(er.kept, config.loop.dedup_threshold);
      j["enhancement"] = {{"trajectory_steps", traj.steps.size()},
                          {"kept", er.kept.size()},
                          {"rejections", er.rejections},
                          {"write_back", WriteBackJson(wb)}};
    }
    j["library_size"] = lib.size();
    j["library_version"] = lib.version();
    *out_json = Dup(j.dump());
  });
}

int fte_run_loop(const fte_dataset* dataset, fte_library* library, fte_policy* policy,
                 const char* config_json, const char* out_dir, char** out_json) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(library, "library");
    Require(policy, "policy");
    Require(out_dir, "out_dir");
    Require(out_json, "out_json");
    const ftevolve::RunConfig config = ConfigFrom(config_json);
    const ftevolve::RunReport report =
        config.loop.mode == ftevolve::LoopMode::kClosedLoop
            ? ftevolve::RunClosedLoop(dataset->dataset, library->library, *policy->policy,
                                      config.loop, config.evaluation)
            : ftevolve::RunOneShot(dataset->dataset, library->library, *policy->policy,
                                   config.loop, config.evaluation);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::kIoError, std::string("cannot create ") + out_dir);
    const std::string summary = ftevolve::RunReportSummaryJson(report);
    WriteText(std::filesystem::path(out_dir) / "run.jsonl", ftevolve::RunReportToJsonl(report));
    WriteText(std::filesystem::path(out_dir) / "summary.json", summary);
    *out_json = Dup(summary);
  });
}

int fte_report(const char* jsonl_path, const char* out_dir, char** out_json) {
  return Guard([&] {
    Require(jsonl_path, "jsonl_path");
    Require(out_dir, "out_dir");
    Require(out_json, "out_json");
    std::ifstream in(jsonl_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, std::string("cannot read ") + jsonl_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const ftevolve::RunReport report = ftevolve::RunReportFromJsonl(buf.str());
    ftevolve::WriteReportFiles(report, out_dir);
    json files = json::array();
    for (const auto& [name, content] : ftevolve::RenderReportFiles(report)) {
      files.push_back(name);
    }
    json j = {{"calls", report.records.size()},
              {"final_best_score", report.FinalBestScore()},
              {"files", files}};
    *out_json = Dup(j.dump());
  });
}

int fte_parse_sequence(const char* text, int feature_count, char** out_json) {
  return Guard([&] {
    Require(text, "text");
    Require(out_json, "out_json");
    const ftevolve::TransformationSequence seq =
        ftevolve::ParseSequence(text, ftevolve::OperatorSet::Default(), feature_count, {});
    json j = {{"postfix", ftevolve::RenderSequence(seq)},
              {"infix", ftevolve::RenderSequence(seq, ftevolve::RenderStyle::kInfix)},
              {"combinations", seq.combinations.size()}};
    *out_json = Dup(j.dump());
  });
}

}  // extern "C"
