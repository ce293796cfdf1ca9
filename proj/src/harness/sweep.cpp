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

#include "tal/harness/sweep.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "tal/common.hpp"
#include "tal/harness/report.hpp"

namespace tal {

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::SetType: return "set_type";
        case SweepAxis::NRandom: return "n_random";
        case SweepAxis::Tau: return "tau";
        case SweepAxis::Weighting: return "weighting";
    }
    return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
    if (text == "set_type") return SweepAxis::SetType;
    if (text == "n_random") return SweepAxis::NRandom;
    if (text == "tau") return SweepAxis::Tau;
    if (text == "weighting") return SweepAxis::Weighting;
    throw Error("unknown sweep axis '" + std::string(text) + "' (set_type, n_random, tau, weighting)");
}

std::vector<std::string> default_axis_values(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::SetType: return {"S", "S+CR", "S+LR-3", "S+LR-all"};
        case SweepAxis::NRandom: return {"17", "34", "68", "136", "272"};
        case SweepAxis::Tau: return {"5", "10", "20", "50"};
        case SweepAxis::Weighting: return {"linear", "exp"};
    }
    return {};
}

namespace {

double parse_number(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(std::string("sweep: invalid ") + what + " value '" + text + "'");
    }
}

}  // namespace

std::vector<TalConfig> sweep_methods(SweepAxis axis, const std::vector<std::string>& values, const TalConfig& base,
                                     ModelVariant variant) {
    if (values.empty()) throw Error("sweep: no axis values");
    const bool embedding = variant == ModelVariant::Embedding;
    TalConfig start = base;
    start.name.clear();
    start.scheme = Scheme::Averaging;
    if (!embedding) start.task_set = TaskSetSpec{};
    std::vector<TalConfig> methods;
    for (const auto& value : values) {
        TalConfig m = start;
        switch (axis) {
            case SweepAxis::SetType:
                m.task_set = TaskSetSpec::parse(value);
                m.n_random.reset();
                if (!embedding && m.task_set.random != TaskSetSpec::Random::None) {
                    throw Error("sweep: set type " + value + " requires an Embedding model");
                }
                m.name = to_string(m.weighting) + " (" + value + ")";
                break;
            case SweepAxis::NRandom: {
                if (!embedding) throw Error("sweep: n_random axis requires an Embedding model");
                const double n = parse_number(value, "n_random");
                if (n < 0 || n != static_cast<double>(static_cast<std::size_t>(n))) {
                    throw Error("sweep: n_random must be a nonnegative integer, got '" + value + "'");
                }
                if (m.task_set.random == TaskSetSpec::Random::None) m.task_set = TaskSetSpec::parse("S+CR");
                m.n_random = static_cast<std::size_t>(n);
                m.name = "n_random=" + value;
                break;
            }
            case SweepAxis::Tau:
                m.weighting = Weighting::Exponential;
                m.tau = parse_number(value, "tau");
                m.name = "Ex-" + value;
                break;
            case SweepAxis::Weighting:
                m.weighting = parse_weighting(value);
                m.name = to_string(m.weighting) + " (" + m.task_set.to_string() + ")";
                break;
        }
        m.validate();
        methods.push_back(m);
    }
    if (axis == SweepAxis::Weighting &&
        std::none_of(methods.begin(), methods.end(), [](const TalConfig& m) { return m.weighting == Weighting::Uniform; })) {
        TalConfig control = start;
        control.weighting = Weighting::Uniform;
        control.name = "uniform (" + control.task_set.to_string() + ")";
        methods.insert(methods.begin(), control);
    }
    return methods;
}

SweepResult sweep(const ExperimentConfig& config, SweepAxis axis, std::vector<std::string> values,
                  const ProgressFn& progress) {
    if (values.empty()) values = default_axis_values(axis);
    TalConfig base;
    base.task_set = TaskSetSpec::parse("S+CR");
    for (const auto& m : config.methods) {
        if (m.scheme == Scheme::Averaging) {
            base = m;
            break;
        }
    }
    ExperimentConfig run = config;
    run.methods = sweep_methods(axis, values, base, config.train.variant);
    run.supervised_bound = false;
    run.output_dir.clear();

    SweepResult result;
    result.axis = axis;
    for (const auto& m : run.methods) {
        if (axis == SweepAxis::Weighting) {
            result.values.push_back(to_string(m.weighting));
        }
        result.labels.push_back(m.label());
    }
    if (axis != SweepAxis::Weighting) result.values = values;
    result.combined = run_loco(run, progress);
    result.combined.metadata["sweep_axis"] = to_string(axis);
    for (const auto& label : result.labels) {
        const std::string column[] = {label};
        result.reports.push_back(select_columns(result.combined, column));
    }
    if (!config.output_dir.empty()) {
        const std::filesystem::path root(config.output_dir);
        write_report(result.combined, (root / "combined").string());
        for (std::size_t k = 0; k < result.values.size(); ++k) {
            write_report(result.reports[k], (root / (to_string(axis) + "=" + result.values[k])).string());
        }
    }
    return result;
}

}  // namespace tal
