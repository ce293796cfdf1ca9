// Copyright 2026 The TAL Authors. All Rights Reserved.
//
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

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tal/data/season.hpp"
#include "tal/models/model.hpp"
#include "tal/transfer/task_set.hpp"

namespace tal {

struct PlotSeries {
    std::string label;
    std::vector<double> values;
};

struct PlotPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Standalone SVG line chart: one polyline per series over day index, plus
/// dots for `points`.
std::string render_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                             const std::vector<PlotPoint>& points);

/// Day index and lte50 of every LTE sample in the season.
std::vector<PlotPoint> lte50_samples(const SeasonSeries& season);

/// Writes <out_dir>/<name>.svg for every named task set: the lte50 curve of
/// each entry on `season` with the season's LTE50 samples as dots. Returns the
/// written paths.
std::vector<std::string> emit_plots(const ModelParams& model, const std::vector<std::pair<std::string, TaskSet>>& sets,
                                    const SeasonSeries& season, const std::string& out_dir);

}  // namespace tal
