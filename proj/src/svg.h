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

#ifndef FTEVOLVE_SRC_SVG_H_
#define FTEVOLVE_SRC_SVG_H_

// Minimal static SVG charts.

#include <string>
#include <vector>

namespace ftevolve::svg {

struct Series {
  std::string label;
  std::vector<double> y;  // x is the 1-based position
};

std::string LineChart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

std::string BarChart(const std::string& title, const std::string& y_label,
                     const std::vector<std::string>& labels,
                     const std::vector<double>& values);

std::string Escape(const std::string& text);

}  // namespace ftevolve::svg

#endif  // FTEVOLVE_SRC_SVG_H_
