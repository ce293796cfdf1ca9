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

#include <array>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tal/data/season.hpp"

namespace tal {

/// Column order of season CSV files.
inline constexpr std::array<std::string_view, 22> kCsvColumns = {
    "task_id", "season", "date",
    "at_min", "at_max", "at_avg", "rh_min", "rh_max", "rh_avg",
    "dp_min", "dp_max", "dp_avg", "precip", "ws_max", "ws_avg",
    "lte10", "lte50", "lte90",
    "ev_first_swell", "ev_full_swell", "ev_budbreak", "ev_first_leaf"};

struct CsvLoadOptions {
    /// Drop seasons without LTE samples. Disable for target files that carry
    /// phenology only.
    bool require_lte = true;
    /// Maximum fraction of missing weather cells (exclusive).
    double max_missing_fraction = 0.10;
    /// When set, any other task id is an error.
    std::optional<std::set<std::string>> known_tasks;
};

struct CsvLoadResult {
    Dataset dataset;
    /// One line per dropped season or row, and per ordering warning.
    std::vector<std::string> log;
};

/// Reads season data. Rows outside the September 7 - May 15 window are
/// discarded; each retained season spans the whole window, days without a row
/// count as missing weather. Seasons failing the retention rules (missing
/// weather fraction, at least one LTE sample, all four event dates) are
/// dropped and logged. Feature statistics are computed over the retained
/// seasons' observed cells. Malformed rows throw with their line number.
CsvLoadResult load_csv(const std::string& path, const CsvLoadOptions& options = {});
CsvLoadResult read_csv(std::istream& in, const CsvLoadOptions& options = {});

/// Writes one row per task-season-day in kCsvColumns order. Values use the
/// shortest representation that reads back to the same double.
void write_csv(const Dataset& dataset, std::ostream& out);
void save_csv(const Dataset& dataset, const std::string& path);

std::string format_double(double value);

/// FNV-1a digest of the dataset's CSV serialization.
std::string dataset_fingerprint(const Dataset& dataset);

}  // namespace tal
