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

// ft-evolve: command-line driver over the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ftevolve/ftevolve.h"
#include "json.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::optional<std::string> data, target, task, library, policy, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations, candidates, keep_top, context_size, jobs;
  std::optional<double> lambda, mu;
};

void Check(int status) {
  if (status != FTE_OK) {
    throw RuntimeError(fte_last_error_message());
  }
}

std::string Take(char* s) {
  std::string out = s == nullptr ? "" : s;
  fte_free_string(s);
  return out;
}

void Print(const std::string& text) { std::cout << json::parse(text).dump(2) << "\n"; }

json LoadConfig(const Flags& f) {
  json c = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw UsageError("cannot read config " + f.config);
    try {
      c = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("config " + f.config + ": " + e.what());
    }
    if (!c.is_object()) throw UsageError("config " + f.config + ": expected an object");
  }
  // Flags override the file.
  if (f.data) c["data"]["path"] = *f.data;
  if (f.target) c["data"]["target"] = *f.target;
  if (f.task) c["data"]["task"] = *f.task;
  if (f.library) c["library"] = *f.library;
  if (f.policy) c["policy"]["kind"] = *f.policy;
  if (f.out) c["out"] = *f.out;
  if (f.seed) c["seed"] = *f.seed;
  if (f.iterations) c["loop"]["iterations"] = *f.iterations;
  if (f.candidates) c["loop"]["candidates"] = *f.candidates;
  if (f.keep_top) c["loop"]["keep_top"] = *f.keep_top;
  if (f.jobs) c["loop"]["jobs"] = *f.jobs;
  if (f.context_size) c["selection"]["k"] = *f.context_size;
  if (f.lambda) c["selection"]["lambda"] = *f.lambda;
  if (f.mu) c["selection"]["mu"] = *f.mu;
  return c;
}

std::string Get(const json& c, const char* section, const char* key, std::string fallback) {
  if (c.contains(section) && c[section].is_object() && c[section].contains(key) &&
      c[section][key].is_string()) {
    return c[section][key].get<std::string>();
  }
  return fallback;
}

std::string Top(const json& c, const char* key, std::string fallback) {
  return c.contains(key) && c[key].is_string() ? c[key].get<std::string>() : fallback;
}

// RAII over the opaque handles.
struct Dataset {
  fte_dataset* p = nullptr;
  ~Dataset() { fte_dataset_free(p); }
};
struct Library {
  fte_library* p = nullptr;
  ~Library() { fte_library_free(p); }
};
struct Policy {
  fte_policy* p = nullptr;
  ~Policy() { fte_policy_free(p); }
};

void LoadDataset(const json& c, Dataset* d) {
  const std::string path = Get(c, "data", "path", "");
  const std::string task = Get(c, "data", "task", "");
  if (path.empty()) throw UsageError("--data (or data.path) is required");
  if (task.empty()) throw UsageError("--task (or data.task) is required");
  const std::string target = Get(c, "data", "target", "");
  Check(fte_dataset_load_csv(path.c_str(), target.empty() ? nullptr : target.c_str(),
                             task.c_str(), &d->p));
}

void CmdEval(const json& c, const std::string& sequence, const std::string& sequence_file) {
  Dataset d;
  LoadDataset(c, &d);
  std::string seq = sequence;
  if (!sequence_file.empty()) {
    std::ifstream in(sequence_file);
    if (!in) throw UsageError("cannot read " + sequence_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    seq = buf.str();
  }
  char* out = nullptr;
  Check(fte_evaluate(d.p, c.dump().c_str(), seq.empty() ? nullptr : seq.c_str(), &out));
  Print(Take(out));
}

void CmdExplore(const json& c) {
  Dataset d;
  LoadDataset(c, &d);
  const std::string lib_path = Top(c, "library", "library.json");
  Library lib;
  Check(fte_library_load(lib_path.c_str(), &lib.p));
  char* out = nullptr;
  Check(fte_explore(d.p, lib.p, c.dump().c_str(), &out));
  const std::string result = Take(out);
  Check(fte_library_save(lib.p, lib_path.c_str()));
  Print(result);
}

void CmdRefine(const json& c) {
  Dataset d;
  LoadDataset(c, &d);
  const std::string lib_path = Top(c, "library", "library.json");
  Library lib;
  Check(fte_library_load(lib_path.c_str(), &lib.p));
  Policy policy;
  const bool enhance = c.contains("refine") && c["refine"].value("enhance", false);
  if (enhance) Check(fte_policy_create(c.dump().c_str(), &policy.p));
  char* out = nullptr;
  Check(fte_refine(d.p, lib.p, policy.p, c.dump().c_str(), &out));
  const std::string result = Take(out);
  Check(fte_library_save(lib.p, lib_path.c_str()));
  Print(result);
}

void CmdLoop(json c, const std::string& mode) {
  c["loop"]["mode"] = mode;
  Dataset d;
  LoadDataset(c, &d);
  const std::string lib_path = Top(c, "library", "library.json");
  const std::string out_dir = Top(c, "out", "out");
  Library lib;
  Check(fte_library_load(lib_path.c_str(), &lib.p));
  Policy policy;
  Check(fte_policy_create(c.dump().c_str(), &policy.p));
  char* out = nullptr;
  Check(fte_run_loop(d.p, lib.p, policy.p, c.dump().c_str(), out_dir.c_str(), &out));
  const std::string summary = Take(out);
  if (mode == "closed_loop") Check(fte_library_save(lib.p, lib_path.c_str()));
  Print(summary);
}

void CmdReport(const std::string& run, std::string out_dir) {
  if (run.empty()) throw UsageError("--run is required");
  if (out_dir.empty()) {
    out_dir = std::filesystem::path(run).parent_path().string();
    if (out_dir.empty()) out_dir = ".";
  }
  char* out = nullptr;
  Check(fte_report(run.c_str(), out_dir.c_str(), &out));
  Print(Take(out));
}

void AddCommon(CLI::App* cmd, Flags* f) {
  cmd->add_option("--config", f->config, "Run configuration JSON");
  cmd->add_option("--data", f->data, "CSV dataset");
  cmd->add_option("--target", f->target, "Target column (default: last)");
  cmd->add_option("--task", f->task, "classification | regression");
  cmd->add_option("--library", f->library, "Experience library JSON");
  cmd->add_option("--policy", f->policy, "mock | http")
      ->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--seed", f->seed, "Base seed");
  cmd->add_option("--iterations", f->iterations, "Loop iterations");
  cmd->add_option("--candidates", f->candidates, "Candidates per iteration");
  cmd->add_option("--keep-top", f->keep_top, "Written back per iteration");
  cmd->add_option("--lambda", f->lambda, "Diversity weight");
  cmd->add_option("--mu", f->mu, "Redundancy weight");
  cmd->add_option("--context-size", f->context_size, "Demonstrations per prompt");
  cmd->add_option("--jobs", f->jobs, "Concurrent candidate evaluations");
  cmd->add_option("--out", f->out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop feature transformation"};
  app.require_subcommand(1);
  Flags f;

  auto* explore = app.add_subcommand("explore", "Explore and extend the library");
  auto* refine = app.add_subcommand("refine", "Check, filter and enhance the library");
  auto* loop = app.add_subcommand("loop", "Run the closed loop");
  auto* oneshot = app.add_subcommand("oneshot", "Run a one-shot baseline");
  auto* eval = app.add_subcommand("eval", "Score a dataset or a sequence");
  auto* report = app.add_subcommand("report", "Charts and tables from a run trace");
  for (CLI::App* cmd : {explore, refine, loop, oneshot, eval}) AddCommon(cmd, &f);

  std::string mode;
  oneshot->add_option("--mode", mode, "fixed | resample")
      ->required()
      ->check(CLI::IsMember({"fixed", "resample"}));
  std::string sequence, sequence_file;
  eval->add_option("--sequence", sequence, "Postfix transformation sequence");
  eval->add_option("--sequence-file", sequence_file, "File holding a sequence");
  std::string run, report_out;
  report->add_option("--run", run, "Run JSONL")->required();
  report->add_option("--out", report_out, "Output directory (default: next to --run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*report) {
      CmdReport(run, report_out);
      return kExitOk;
    }
    const json config = LoadConfig(f);
    if (*eval) CmdEval(config, sequence, sequence_file);
    if (*explore) CmdExplore(config);
    if (*refine) CmdRefine(config);
    if (*loop) CmdLoop(config, "closed_loop");
    if (*oneshot) CmdLoop(config, mode == "fixed" ? "one_shot_fixed" : "one_shot_resample");
  } catch (const UsageError& e) {
    std::cerr << "ft-evolve: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ft-evolve: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
