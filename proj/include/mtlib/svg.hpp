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

#ifndef MTLIB_SVG_HPP
#define MTLIB_SVG_HPP

#include <string>
#include <vector>

namespace mt {

// Minimal self-contained SVG chart emitters for coverage/usage/relevance
// reports. No styling knobs; reports are for eyeballing trends.

struct BarGroup {
  std::string label;             // x-axis label (e.g. budget "100")
  std::vector<double> values;    // one per series
};

std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::string>& series_names,
                          const std::vector<BarGroup>& groups,
                          double y_max = 0.0);

struct LineSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

std::string svg_line_chart(const std::string& title,
                           const std::vector<LineSeries>& series,
                           bool log_x = false);

}  // namespace mt

#endif  // MTLIB_SVG_HPP
