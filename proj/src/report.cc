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

#include "ftevolve/report.h"

#include <cstdio>
#include <fstream>

#include "ftevolve/error.h"
#include "svg.h"

namespace ftevolve {
namespace {

std::string Fixed(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10f", v);
  return buf;
}

}  // namespace

std::map<std::string, std::string> RenderReportFiles(const RunReport& report) {
  if (report.records.empty()) throw Error(ErrorCode::kEmptyReport, "report has no calls");
  std::map<std::string, std::string> files;

  std::string curve = "index,iteration,call,status,score,best_so_far,written_back\n";
  std::vector<double> best;
  int index = 0;
  for (const CallRecord& r : report.records) {
    curve += std::to_string(++index) + "," + std::to_string(r.iteration) + "," +
             std::to_string(r.call) + "," + std::string(CallStatusName(r.status)) + "," +
             (r.score ? Fixed(*r.score) : std::string()) + "," + Fixed(r.best_so_far) + "," +
             (r.written_back ? "1" : "0") + "\n";
    best.push_back(r.best_so_far);
  }
  files["best_so_far.csv"] = curve;
  const std::vector<double> baseline(best.size(), report.baseline_score);
  files["best_so_far.svg"] = svg::LineChart(
      "Best so far (" + std::string(LoopModeName(report.mode)) + ", " + report.dataset + ")",
      "call", std::string(MetricName(report.metric)),
      {{"best so far", best}, {"original features", baseline}});

  const BehaviorStats stats = ComputeBehaviorStats(report);
  std::string ops = "operator,group,count\n";
  std::vector<std::string> op_labels;
  std::vector<double> op_counts;
  const OperatorSet defaults = OperatorSet::Default();
  for (const OperatorDescriptor& d : defaults.operators()) {
    const auto it = stats.operator_counts.find(d.name);
    const int count = it == stats.operator_counts.end() ? 0 : it->second;
    ops += d.name + "," + (d.group == OperatorGroup::kSimple ? "simple" : "complex") + "," +
           std::to_string(count) + "\n";
    op_labels.push_back(d.name);
    op_counts.push_back(count);
  }
  files["operator_usage.csv"] = ops;
  files["operator_usage.svg"] =
      svg::BarChart("Operator usage (" + report.dataset + ")", "count", op_labels, op_counts);

  const int total_ops = stats.simple_count + stats.complex_count;
  const double complex_ratio = total_ops > 0 ? 1.0 - stats.simple_ratio : 0.0;
  files["group_usage.csv"] = "group,count,ratio\nsimple," + std::to_string(stats.simple_count) +
                             "," + Fixed(stats.simple_ratio) + "\ncomplex," +
                             std::to_string(stats.complex_count) + "," +
                             Fixed(complex_ratio) + "\n";

  std::string feats = "feature,count\n";
  std::vector<std::string> f_labels;
  std::vector<double> f_counts;
  for (std::size_t i = 0; i < stats.feature_usage.size(); ++i) {
    const std::string name = "f" + std::to_string(i + 1);
    feats += name + "," + std::to_string(stats.feature_usage[i]) + "\n";
    f_labels.push_back(name);
    f_counts.push_back(stats.feature_usage[i]);
  }
  files["feature_usage.csv"] = feats;
  files["feature_usage.svg"] =
      svg::BarChart("Feature usage (" + report.dataset + ")", "count", f_labels, f_counts);
  return files;
}

void WriteReportFiles(const RunReport& report, const std::filesystem::path& dir) {
  const auto files = RenderReportFiles(report);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, content] : files) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
  }
}

}  // namespace ftevolve
