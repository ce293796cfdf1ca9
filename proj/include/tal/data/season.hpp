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
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tal {

using Date = std::chrono::sys_days;

inline constexpr std::size_t kWeatherFeatures = 12;
inline constexpr std::size_t kPhenologyEvents = 4;
inline constexpr std::size_t kLteChannels = 3;

inline constexpr std::array<std::string_view, kWeatherFeatures> kWeatherNames = {
    "at_min", "at_max", "at_avg", "rh_min", "rh_max", "rh_avg",
    "dp_min", "dp_max", "dp_avg", "precip", "ws_max", "ws_avg"};

inline constexpr std::array<std::string_view, kPhenologyEvents> kEventNames = {
    "first_swell", "full_swell", "budbreak", "first_leaf"};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

Date make_date(int year, unsigned month, unsigned day);
/// Parses YYYY-MM-DD; returns nullopt for anything else or impossible dates.
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(Date date);

/// First and last day of the dormant season starting in autumn of `start_year`
/// (September 7 through May 15 of the following year, inclusive).
Date season_first_day(int start_year);
Date season_last_day(int start_year);
/// Start year of the dormant window containing `date`, if any.
std::optional<int> dormant_start_year(Date date);
std::size_t season_length(int start_year);

struct LteTriple {
    double lte10 = 0.0;
    double lte50 = 0.0;
    double lte90 = 0.0;
    friend bool operator==(const LteTriple&, const LteTriple&) = default;
};

struct DayRecord {
    Date date;
    /// Missing cells are NaN.
    std::array<double, kWeatherFeatures> weather{};
    /// Present only on sampling days; the triple is observed or masked jointly.
    std::optional<LteTriple> lte;
    /// Flag e is 1 iff event e occurred on or before this day.
    std::array<std::uint8_t, kPhenologyEvents> pheno{};
};

bool operator==(const DayRecord& a, const DayRecord& b);

/// One dormant season of one task.
struct SeasonSeries {
    std::string task_id;
    std::string season_label;
    std::array<std::optional<Date>, kPhenologyEvents> events{};
    std::vector<DayRecord> days;

    std::size_t length() const { return days.size(); }
    std::size_t lte_count() const;
    std::size_t missing_weather_cells() const;
    bool has_all_events() const;
    int start_year() const;

    friend bool operator==(const SeasonSeries&, const SeasonSeries&) = default;
};

/// Per-feature population mean and standard deviation.
struct FeatureStats {
    std::array<double, kWeatherFeatures> mean{};
    std::array<double, kWeatherFeatures> stddev{};

    static FeatureStats identity();
    friend bool operator==(const FeatureStats&, const FeatureStats&) = default;
};

struct Dataset {
    std::map<std::string, std::vector<SeasonSeries>> tasks;
    FeatureStats feature_stats = FeatureStats::identity();

    std::vector<std::string> task_ids() const;
    std::size_t season_count() const;
    const std::vector<SeasonSeries>& seasons(const std::string& task_id) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace tal
