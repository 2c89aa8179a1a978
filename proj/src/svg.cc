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

#include "svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ftevolve::svg {
namespace {

constexpr double kWidth = 720, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 70;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string Header(const std::string& title) {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) +
                    "\" height=\"" + Num(kHeight) + "\" viewBox=\"0 0 " + Num(kWidth) +
                    " " + Num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + Num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         Escape(title) + "</text>\n";
  return out;
}

std::string Axes(const std::string& x_label, const std::string& y_label, double lo,
                 double hi) {
  const double x0 = kLeft, y0 = kHeight - kBottom, x1 = kWidth - kRight, y1 = kTop;
  std::string out;
  out += "<line x1=\"" + Num(x0) + "\" y1=\"" + Num(y0) + "\" x2=\"" + Num(x1) + "\" y2=\"" +
         Num(y0) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + Num(x0) + "\" y1=\"" + Num(y0) + "\" x2=\"" + Num(x0) + "\" y2=\"" +
         Num(y1) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    const double y = y0 - (y0 - y1) * i / 4.0;
    out += "<line x1=\"" + Num(x0 - 4) + "\" y1=\"" + Num(y) + "\" x2=\"" + Num(x0) +
           "\" y2=\"" + Num(y) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + Num(x0 - 7) + "\" y=\"" + Num(y + 4) + "\" text-anchor=\"end\">" +
           Tick(v) + "</text>\n";
  }
  if (!x_label.empty()) {
    out += "<text x=\"" + Num((x0 + x1) / 2) + "\" y=\"" + Num(kHeight - 12) +
           "\" text-anchor=\"middle\">" + Escape(x_label) + "</text>\n";
  }
  out += "<text x=\"16\" y=\"" + Num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         Num((y0 + y1) / 2) + ")\">" + Escape(y_label) + "</text>\n";
  return out;
}

void Range(const std::vector<double>& v, double* lo, double* hi) {
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    *lo = std::min(*lo, x);
    *hi = std::max(*hi, x);
  }
}

}  // namespace

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string LineChart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t n = 0;
  for (const Series& s : series) {
    Range(s.y, &lo, &hi);
    n = std::max(n, s.y.size());
  }
  if (!(lo <= hi)) lo = 0, hi = 1;
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::string out = Header(title) + Axes(x_label, y_label, lo, hi);
  const double x0 = kLeft, y0 = kHeight - kBottom, x1 = kWidth - kRight, y1 = kTop;
  auto px = [&](std::size_t i) {
    return n <= 1 ? (x0 + x1) / 2 : x0 + (x1 - x0) * static_cast<double>(i) / (n - 1);
  };
  auto py = [&](double v) { return y0 - (y0 - y1) * (v - lo) / (hi - lo); };
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % 5];
    std::string points;
    for (std::size_t i = 0; i < series[k].y.size(); ++i) {
      if (!std::isfinite(series[k].y[i])) continue;
      if (!points.empty()) points += ' ';
      points += Num(px(i)) + "," + Num(py(series[k].y[i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    out += "<text x=\"" + Num(x0 + 10) + "\" y=\"" + Num(y1 + 14 + 16.0 * k) + "\" fill=\"" +
           color + "\">" + Escape(series[k].label) + "</text>\n";
  }
  out += "<text x=\"" + Num(x0) + "\" y=\"" + Num(y0 + 18) + "\" text-anchor=\"middle\">1</text>\n";
  out += "<text x=\"" + Num(x1) + "\" y=\"" + Num(y0 + 18) + "\" text-anchor=\"middle\">" +
         std::to_string(n) + "</text>\n";
  out += "</svg>\n";
  return out;
}

std::string BarChart(const std::string& title, const std::string& y_label,
                     const std::vector<std::string>& labels,
                     const std::vector<double>& values) {
  double lo = 0.0, hi = 0.0;
  Range(values, &lo, &hi);
  if (hi <= lo) hi = lo + 1.0;
  std::string out = Header(title) + Axes("", y_label, lo, hi);
  const double x0 = kLeft, y0 = kHeight - kBottom, x1 = kWidth - kRight, y1 = kTop;
  const std::size_t n = std::max<std::size_t>(values.size(), 1);
  const double slot = (x1 - x0) / static_cast<double>(n);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? values[i] : 0.0;
    const double top = y0 - (y0 - y1) * (v - lo) / (hi - lo);
    const double x = x0 + slot * i + slot * 0.15;
    out += "<rect x=\"" + Num(x) + "\" y=\"" + Num(top) + "\" width=\"" + Num(slot * 0.7) +
           "\" height=\"" + Num(y0 - top) + "\" fill=\"" + kPalette[0] + "\"/>\n";
    const double cx = x0 + slot * (i + 0.5);
    out += "<text x=\"" + Num(cx) + "\" y=\"" + Num(y0 + 14) +
           "\" text-anchor=\"end\" transform=\"rotate(-40 " + Num(cx) + " " + Num(y0 + 14) +
           ")\">" + Escape(i < labels.size() ? labels[i] : "") + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ftevolve::svg
