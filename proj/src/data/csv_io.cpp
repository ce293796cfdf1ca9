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

#include "tal/data/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tal/common.hpp"
#include "tal/data/preprocess.hpp"

namespace tal {

namespace {

constexpr std::size_t kFirstWeatherColumn = 3;
constexpr std::size_t kFirstLteColumn = 15;
constexpr std::size_t kFirstEventColumn = 18;

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
    throw Error("load_csv: line " + std::to_string(line) + ": " + what);
}

double parse_cell(std::string_view text, std::size_t line, std::string_view column) {
    text = trim(text);
    if (text.empty()) return kMissing;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        row_error(line, "malformed value '" + std::string(text) + "' in column " + std::string(column));
    }
    return value;
}

struct RowData {
    std::array<double, kWeatherFeatures> weather{};
    std::optional<LteTriple> lte;
};

struct SeasonBuilder {
    std::string task_id;
    std::string label;
    int start_year = 0;
    std::size_t first_line = 0;
    std::array<std::optional<Date>, kPhenologyEvents> events{};
    std::map<Date, RowData> rows;
    std::size_t outside_window = 0;
    bool has_rows_in_window = false;
};

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

CsvLoadResult read_csv(std::istream& in, const CsvLoadOptions& options) {
    CsvLoadResult result;
    std::string line;
    if (!std::getline(in, line)) throw Error("load_csv: empty input, expected a header row");
    {
        const auto header = split(trim(line));
        bool ok = header.size() == kCsvColumns.size();
        for (std::size_t i = 0; ok && i < header.size(); ++i) ok = trim(header[i]) == kCsvColumns[i];
        if (!ok) throw Error("load_csv: line 1: columns do not match the season schema");
    }

    std::map<std::pair<std::string, std::string>, SeasonBuilder> builders;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto fields = split(row);
        if (fields.size() != kCsvColumns.size()) {
            row_error(line_no, "expected " + std::to_string(kCsvColumns.size()) + " fields, got " +
                                   std::to_string(fields.size()));
        }
        const std::string task_id(trim(fields[0]));
        const std::string label(trim(fields[1]));
        if (task_id.empty()) row_error(line_no, "empty task_id");
        if (label.empty()) row_error(line_no, "empty season label");
        if (options.known_tasks && !options.known_tasks->contains(task_id)) {
            row_error(line_no, "unknown task id '" + task_id + "'");
        }
        const auto date = parse_iso_date(trim(fields[2]));
        if (!date) row_error(line_no, "unparseable date '" + std::string(fields[2]) + "'");

        RowData data;
        for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
            data.weather[f] = parse_cell(fields[kFirstWeatherColumn + f], line_no,
                                         kCsvColumns[kFirstWeatherColumn + f]);
        }
        std::array<double, kLteChannels> lte{};
        std::size_t lte_present = 0;
        for (std::size_t c = 0; c < kLteChannels; ++c) {
            lte[c] = parse_cell(fields[kFirstLteColumn + c], line_no, kCsvColumns[kFirstLteColumn + c]);
            lte_present += std::isnan(lte[c]) ? 0 : 1;
        }
        if (lte_present == kLteChannels) {
            data.lte = LteTriple{lte[0], lte[1], lte[2]};
        } else if (lte_present > 0) {
            result.log.push_back("line " + std::to_string(line_no) +
                                 ": partial LTE triple treated as missing");
        }
        std::array<std::optional<Date>, kPhenologyEvents> events{};
        for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
            const std::string_view text = trim(fields[kFirstEventColumn + e]);
            if (text.empty()) continue;
            events[e] = parse_iso_date(text);
            if (!events[e]) {
                row_error(line_no, "unparseable event date '" + std::string(text) + "' in column " +
                                       std::string(kCsvColumns[kFirstEventColumn + e]));
            }
        }

        auto [it, inserted] = builders.try_emplace({task_id, label});
        SeasonBuilder& b = it->second;
        if (inserted) {
            b.task_id = task_id;
            b.label = label;
            b.first_line = line_no;
            b.events = events;
        } else if (b.events != events) {
            row_error(line_no, "event dates differ from earlier rows of season '" + label + "'");
        }
        const auto start = dormant_start_year(*date);
        if (!start) {
            ++b.outside_window;
            continue;
        }
        if (b.has_rows_in_window && b.start_year != *start) {
            row_error(line_no, "season '" + label + "' spans more than one dormant window");
        }
        b.has_rows_in_window = true;
        b.start_year = *start;
        if (!b.rows.emplace(*date, data).second) {
            row_error(line_no, "duplicate date " + format_iso_date(*date) + " in season '" + label + "'");
        }
    }

    // Seasons within a task are ordered by window start, then label.
    std::vector<const SeasonBuilder*> ordered;
    for (const auto& [_, b] : builders) ordered.push_back(&b);
    std::stable_sort(ordered.begin(), ordered.end(), [](const SeasonBuilder* a, const SeasonBuilder* b) {
        if (a->task_id != b->task_id) return a->task_id < b->task_id;
        if (a->start_year != b->start_year) return a->start_year < b->start_year;
        return a->label < b->label;
    });

    for (const SeasonBuilder* b : ordered) {
        const std::string where = "task '" + b->task_id + "' season '" + b->label + "'";
        if (b->outside_window > 0) {
            result.log.push_back(where + ": " + std::to_string(b->outside_window) +
                                 " rows outside the dormant window ignored");
        }
        if (!b->has_rows_in_window) {
            result.log.push_back(where + ": dropped, no rows inside the dormant window");
            continue;
        }
        SeasonSeries season;
        season.task_id = b->task_id;
        season.season_label = b->label;
        for (Date d = season_first_day(b->start_year); d <= season_last_day(b->start_year);
             d += std::chrono::days{1}) {
            DayRecord day;
            day.date = d;
            if (auto r = b->rows.find(d); r != b->rows.end()) {
                day.weather = r->second.weather;
                day.lte = r->second.lte;
            } else {
                day.weather.fill(kMissing);
            }
            season.days.push_back(day);
        }
        season = encode_phenology(b->events, std::move(season), &result.log);

        const double missing = static_cast<double>(season.missing_weather_cells()) /
                               static_cast<double>(season.length() * kWeatherFeatures);
        if (!(missing < options.max_missing_fraction)) {
            result.log.push_back(where + ": dropped, " + format_double(100.0 * missing) +
                                 "% of weather cells missing");
            continue;
        }
        if (options.require_lte && season.lte_count() == 0) {
            result.log.push_back(where + ": dropped, no LTE samples");
            continue;
        }
        if (!season.has_all_events()) {
            result.log.push_back(where + ": dropped, missing phenology event dates");
            continue;
        }
        result.dataset.tasks[season.task_id].push_back(std::move(season));
    }
    if (!result.dataset.tasks.empty()) {
        result.dataset.feature_stats = compute_feature_stats(result.dataset);
    }
    return result;
}

CsvLoadResult load_csv(const std::string& path, const CsvLoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error("load_csv: cannot open '" + path + "'");
    return read_csv(in, options);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
    out << '\n';
    for (const auto& [task_id, seasons] : dataset.tasks) {
        for (const auto& s : seasons) {
            std::string event_cells;
            for (const auto& e : s.events) event_cells += "," + (e ? format_iso_date(*e) : std::string());
            for (const auto& d : s.days) {
                out << task_id << ',' << s.season_label << ',' << format_iso_date(d.date);
                for (double w : d.weather) out << ',' << format_double(w);
                if (d.lte) {
                    out << ',' << format_double(d.lte->lte10) << ',' << format_double(d.lte->lte50) << ','
                        << format_double(d.lte->lte90);
                } else {
                    out << ",,,";
                }
                out << event_cells << '\n';
            }
        }
    }
}

void save_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_csv: cannot open '" + path + "' for writing");
    write_csv(dataset, out);
    if (!out) throw Error("save_csv: write to '" + path + "' failed");
}

std::string dataset_fingerprint(const Dataset& dataset) {
    std::ostringstream out;
    write_csv(dataset, out);
    Fnv1a h;
    h.update(out.str());
    return h.hex();
}

}  // namespace tal
