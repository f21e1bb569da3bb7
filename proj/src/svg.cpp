// Copyright 2026 The Microtheory Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtlib/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mt {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 48;
constexpr int kMarginBottom = 56;

const char* kPalette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f",
                          "#956cb4", "#8c613c"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void emit_header(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << escape(title) << "</text>\n";
}

void emit_y_axis(std::ostringstream& out, double y_max) {
  const double inner_h = kHeight - kMarginTop - kMarginBottom;
  for (int tick = 0; tick <= 4; ++tick) {
    const double value = y_max * tick / 4.0;
    const double y = kHeight - kMarginBottom - inner_h * tick / 4.0;
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << y << "\" x2=\""
        << kWidth - kMarginRight << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << value << "</text>\n";
  }
}

}  // namespace

std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::string>& series_names,
                          const std::vector<BarGroup>& groups, double y_max) {
  std::ostringstream out;
  emit_header(out, title);
  if (y_max <= 0.0) {
    for (const auto& g : groups) {
      for (double v : g.values) y_max = std::max(y_max, v);
    }
    if (y_max <= 0.0) y_max = 1.0;
  }
  emit_y_axis(out, y_max);

  const double inner_w = kWidth - kMarginLeft - kMarginRight;
  const double inner_h = kHeight - kMarginTop - kMarginBottom;
  const std::size_t n_groups = std::max<std::size_t>(1, groups.size());
  const std::size_t n_series = std::max<std::size_t>(1, series_names.size());
  const double group_w = inner_w / static_cast<double>(n_groups);
  const double bar_w = group_w * 0.8 / static_cast<double>(n_series);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = kMarginLeft + group_w * static_cast<double>(g);
    for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
      const double v = std::max(0.0, groups[g].values[s]);
      const double h = inner_h * std::min(1.0, v / y_max);
      const double x = gx + group_w * 0.1 + bar_w * static_cast<double>(s);
      const double y = kHeight - kMarginBottom - h;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\""
          << bar_w * 0.92 << "\" height=\"" << h << "\" fill=\""
          << kPalette[s % 6] << "\"/>\n";
    }
    out << "<text x=\"" << gx + group_w / 2 << "\" y=\""
        << kHeight - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << escape(groups[g].label) << "</text>\n";
  }
  for (std::size_t s = 0; s < series_names.size(); ++s) {
    const double x = kMarginLeft + 12 + 130.0 * static_cast<double>(s);
    out << "<rect x=\"" << x << "\" y=\"32\" width=\"10\" height=\"10\" "
           "fill=\"" << kPalette[s % 6] << "\"/>\n";
    out << "<text x=\"" << x + 14 << "\" y=\"41\" font-family=\"sans-serif\" "
           "font-size=\"12\">" << escape(series_names[s]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_line_chart(const std::string& title,
                           const std::vector<LineSeries>& series,
                           bool log_x) {
  std::ostringstream out;
  emit_header(out, title);
  double x_min = 1e300, x_max = -1e300, y_max = 0.0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_max = std::max(y_max, y);
    }
  }
  if (x_min > x_max) {
    x_min = 0;
    x_max = 1;
  }
  if (y_max <= 0) y_max = 1.0;
  emit_y_axis(out, y_max);

  const double inner_w = kWidth - kMarginLeft - kMarginRight;
  const double inner_h = kHeight - kMarginTop - kMarginBottom;
  auto tx = [&](double x) {
    double t;
    if (log_x && x_min > 0) {
      t = (std::log(x) - std::log(x_min)) /
          std::max(1e-12, std::log(x_max) - std::log(x_min));
    } else {
      t = (x - x_min) / std::max(1e-12, x_max - x_min);
    }
    return kMarginLeft + inner_w * t;
  };
  auto ty = [&](double y) {
    return kHeight - kMarginBottom - inner_h * std::min(1.0, y / y_max);
  };

  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 6]
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series[s].points) {
      out << tx(x) << "," << ty(y) << " ";
    }
    out << "\"/>\n";
    for (const auto& [x, y] : series[s].points) {
      out << "<circle cx=\"" << tx(x) << "\" cy=\"" << ty(y)
          << "\" r=\"3\" fill=\"" << kPalette[s % 6] << "\"/>\n";
    }
    const double lx = kMarginLeft + 12 + 150.0 * static_cast<double>(s);
    out << "<rect x=\"" << lx << "\" y=\"32\" width=\"10\" height=\"10\" "
           "fill=\"" << kPalette[s % 6] << "\"/>\n";
    out << "<text x=\"" << lx + 14 << "\" y=\"41\" font-family=\"sans-serif\" "
           "font-size=\"12\">" << escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace mt
