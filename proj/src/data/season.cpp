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

#include "tal/data/season.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "tal/common.hpp"

namespace tal {

using namespace std::chrono;

Date make_date(int y, unsigned m, unsigned d) {
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw Error("invalid calendar date");
    return sys_days{ymd};
}

std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse = [](std::string_view s, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size();
    };
    if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

std::string format_iso_date(Date date) {
    const year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date season_first_day(int start_year) { return make_date(start_year, 9, 7); }
Date season_last_day(int start_year) { return make_date(start_year + 1, 5, 15); }

std::optional<int> dormant_start_year(Date date) {
    const year_month_day ymd{date};
    const int y = static_cast<int>(ymd.year());
    const int start = static_cast<unsigned>(ymd.month()) >= 9 ? y : y - 1;
    if (date < season_first_day(start) || date > season_last_day(start)) return std::nullopt;
    return start;
}

std::size_t season_length(int start_year) {
    return static_cast<std::size_t>((season_last_day(start_year) - season_first_day(start_year)).count()) + 1;
}

bool operator==(const DayRecord& a, const DayRecord& b) {
    if (a.date != b.date || a.lte != b.lte || a.pheno != b.pheno) return false;
    for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
        const bool na = std::isnan(a.weather[f]), nb = std::isnan(b.weather[f]);
        if (na != nb || (!na && a.weather[f] != b.weather[f])) return false;
    }
    return true;
}

std::size_t SeasonSeries::lte_count() const {
    return static_cast<std::size_t>(
        std::count_if(days.begin(), days.end(), [](const DayRecord& d) { return d.lte.has_value(); }));
}

std::size_t SeasonSeries::missing_weather_cells() const {
    std::size_t missing = 0;
    for (const auto& d : days) {
        missing += static_cast<std::size_t>(
            std::count_if(d.weather.begin(), d.weather.end(), [](double v) { return std::isnan(v); }));
    }
    return missing;
}

bool SeasonSeries::has_all_events() const {
    return std::all_of(events.begin(), events.end(), [](const auto& e) { return e.has_value(); });
}

int SeasonSeries::start_year() const {
    if (days.empty()) throw Error("season '" + season_label + "' of task '" + task_id + "' has no days");
    return *dormant_start_year(days.front().date);
}

FeatureStats FeatureStats::identity() {
    FeatureStats s;
    s.mean.fill(0.0);
    s.stddev.fill(1.0);
    return s;
}

std::vector<std::string> Dataset::task_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, _] : tasks) ids.push_back(id);
    return ids;
}

std::size_t Dataset::season_count() const {
    std::size_t n = 0;
    for (const auto& [_, seasons] : tasks) n += seasons.size();
    return n;
}

const std::vector<SeasonSeries>& Dataset::seasons(const std::string& task_id) const {
    auto it = tasks.find(task_id);
    if (it == tasks.end()) throw Error("unknown task id '" + task_id + "'");
    return it->second;
}

}  // namespace tal
