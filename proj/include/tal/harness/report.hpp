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

#include <span>
#include <string>

#include "tal/harness/experiment.hpp"

namespace tal {

/// "task,<method>,..." header, one row per target, then a "mean" row.
std::string report_csv(const ExperimentReport& report);

/// Fixed-width table with the same rows, RMSE in degrees C to 3 decimals.
std::string report_table(const ExperimentReport& report);

/// Writes report.csv, report.txt and report.json (metadata and audit) into
/// `dir`, creating it if needed.
void write_report(const ExperimentReport& report, const std::string& dir);

/// A report restricted to the given method columns.
ExperimentReport select_columns(const ExperimentReport& report, std::span<const std::string> methods);

}  // namespace tal
