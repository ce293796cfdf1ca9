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

#include "tal/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tal/common.hpp"
#include "tal/data/csv_io.hpp"

namespace tal {

namespace {

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_report: cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error("write_report: write to '" + path.string() + "' failed");
}

nlohmann::json audit_json(const LeakageAudit& audit) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : audit.records) {
        std::size_t training_lte = 0;
        for (std::size_t c : r.training_lte) training_lte += c;
        nlohmann::json methods = nlohmann::json::object();
        for (const auto& [label, keys] : r.method_inputs) {
            nlohmann::json seasons = nlohmann::json::array();
            for (std::size_t k = 0; k < keys.size(); ++k) {
                seasons.push_back({{"task", keys[k].task}, {"season", keys[k].season},
                                   {"lte_values", r.method_input_lte.at(label)[k]}});
            }
            methods[label] = seasons;
        }
        nlohmann::json held = nlohmann::json::array();
        for (const auto& k : r.held_out) held.push_back(k.task + "/" + k.season);
        records.push_back({{"trial", r.trial},
                           {"target", r.target},
                           {"held_out", held},
                           {"training_seasons", r.training.size()},
                           {"training_lte_values", training_lte},
                           {"method_inputs", methods}});
    }
    return {{"leaked_lte_values", audit.leaked_lte_values()}, {"records", records}};
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "task";
    for (const auto& m : report.methods) out << ',' << csv_field(m);
    out << '\n';
    for (std::size_t t = 0; t < report.targets.size(); ++t) {
        out << csv_field(report.targets[t]);
        for (double v : report.rmse[t]) out << ',' << format_double(v);
        out << '\n';
    }
    out << "mean";
    for (double v : report.mean) out << ',' << format_double(v);
    out << '\n';
    return out.str();
}

std::string report_table(const ExperimentReport& report) {
    std::size_t first = 4;
    for (const auto& t : report.targets) first = std::max(first, t.size());
    std::vector<std::size_t> widths;
    for (const auto& m : report.methods) widths.push_back(std::max<std::size_t>(m.size(), 7));
    std::ostringstream out;
    auto pad = [&](const std::string& text, std::size_t width, bool left) {
        const std::string fill(width > text.size() ? width - text.size() : 0, ' ');
        out << (left ? text + fill : fill + text);
    };
    pad("task", first, true);
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        out << " | ";
        pad(report.methods[m], widths[m], false);
    }
    out << '\n';
    std::size_t rule = first;
    for (std::size_t w : widths) rule += w + 3;
    out << std::string(rule, '-') << '\n';
    char cell[32];
    auto row = [&](const std::string& name, const std::vector<double>& values) {
        pad(name, first, true);
        for (std::size_t m = 0; m < values.size(); ++m) {
            std::snprintf(cell, sizeof cell, "%.3f", values[m]);
            out << " | ";
            pad(cell, widths[m], false);
        }
        out << '\n';
    };
    for (std::size_t t = 0; t < report.targets.size(); ++t) row(report.targets[t], report.rmse[t]);
    out << std::string(rule, '-') << '\n';
    row("mean", report.mean);
    return out.str();
}

void write_report(const ExperimentReport& report, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("write_report: cannot create '" + dir + "': " + ec.message());
    const std::filesystem::path root(dir);
    write_file(root / "report.csv", report_csv(report));
    write_file(root / "report.txt", report_table(report));
    nlohmann::json meta = report.metadata;
    meta["evaluations"] = nlohmann::json::object();
    for (std::size_t m = 0; m < report.methods.size(); ++m) meta["evaluations"][report.methods[m]] = report.evaluations[m];
    meta["audit"] = audit_json(report.audit);
    write_file(root / "report.json", meta.dump(2) + "\n");
}

ExperimentReport select_columns(const ExperimentReport& report, std::span<const std::string> methods) {
    ExperimentReport out;
    out.targets = report.targets;
    out.metadata = report.metadata;
    out.audit = report.audit;
    out.rmse.assign(report.targets.size(), {});
    for (const auto& label : methods) {
        const std::size_t m = report.method_index(label);
        out.methods.push_back(label);
        out.mean.push_back(report.mean[m]);
        out.evaluations.push_back(report.evaluations[m]);
        for (std::size_t t = 0; t < report.targets.size(); ++t) out.rmse[t].push_back(report.rmse[t][m]);
    }
    return out;
}

}  // namespace tal
