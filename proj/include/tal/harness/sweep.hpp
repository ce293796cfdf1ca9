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
#include <string_view>
#include <vector>

#include "tal/harness/experiment.hpp"

namespace tal {

enum class SweepAxis { SetType, NRandom, Tau, Weighting };

std::string to_string(SweepAxis axis);
/// Accepts set_type, n_random, tau and weighting.
SweepAxis parse_sweep_axis(std::string_view text);

/// Default values: set types S, S+CR, S+LR-3, S+LR-all; n_random 17, 34, 68,
/// 136, 272; tau 5, 10, 20, 50; weightings linear, exp (Uniform is always
/// added as the control column).
std::vector<std::string> default_axis_values(SweepAxis axis);

/// One method per axis value, derived from `base`.
std::vector<TalConfig> sweep_methods(SweepAxis axis, const std::vector<std::string>& values, const TalConfig& base,
                                     ModelVariant variant);

struct SweepResult {
    SweepAxis axis;
    std::vector<std::string> values;
    /// Column label of each value's method, aligned with `values`.
    std::vector<std::string> labels;
    /// Every column from one LOCO run; all values share the trained models.
    ExperimentReport combined;
    /// One single-column report per value.
    std::vector<ExperimentReport> reports;
};

/// Runs the LOCO benchmark once with every axis value as a method column.
/// The base method is the config's first averaging method, or
/// Weighted (S+CR) when there is none. Writes combined and per-value reports
/// under config.output_dir when set.
SweepResult sweep(const ExperimentConfig& config, SweepAxis axis, std::vector<std::string> values = {},
                  const ProgressFn& progress = {});

}  // namespace tal
