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

#ifndef FTEVOLVE_REPORT_H_
#define FTEVOLVE_REPORT_H_

// Analysis artifacts derived from a run trace: CSV tables and SVG charts.

#include <filesystem>
#include <map>
#include <string>

#include "ftevolve/loop.h"

namespace ftevolve {

// File name -> contents. Depends only on `report`:
//   best_so_far.csv, best_so_far.svg     one row per call
//   operator_usage.csv, operator_usage.svg
//   group_usage.csv
//   feature_usage.csv, feature_usage.svg
std::map<std::string, std::string> RenderReportFiles(const RunReport& report);

// Writes RenderReportFiles into `dir` (created if needed). Throws kIoError.
void WriteReportFiles(const RunReport& report, const std::filesystem::path& dir);

}  // namespace ftevolve

#endif  // FTEVOLVE_REPORT_H_
