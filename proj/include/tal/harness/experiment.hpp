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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tal/data/generator.hpp"
#include "tal/data/season.hpp"
#include "tal/training/trainer.hpp"
#include "tal/transfer/config.hpp"

namespace tal {

/// Where the seasons come from: a CSV file, an explicit generator config, or
/// the default synthetic benchmark seeded from the master seed.
struct DatasetSource {
    std::string csv_path;
    std::optional<GeneratorConfig> generator;
    int synthetic_tasks = 6;
    int seasons_per_task = 8;
};

struct ExperimentConfig {
    DatasetSource dataset;
    int trials = 1;
    int holdout_per_task = 2;
    TrainConfig train;
    std::vector<TalConfig> methods;
    /// Also train a model that sees the target's training LTE (oracle column).
    bool supervised_bound = false;
    /// Restrict evaluation to these targets; empty means every task.
    std::vector<std::string> targets;
    std::string output_dir;
    std::uint64_t master_seed = 0;

    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::string& path);

/// The seven columns of the main comparison table.
std::vector<TalConfig> default_methods();

/// Raw (uninterpolated) dataset for an experiment.
Dataset load_experiment_dataset(const ExperimentConfig& config);

/// Season identity used by the holdout audit.
struct SeasonKey {
    std::string task;
    std::string season;
    auto operator<=>(const SeasonKey&) const = default;
};

/// What one (trial, target) pair fed into training and into each method.
struct AuditRecord {
    int trial = 0;
    std::string target;
    std::vector<SeasonKey> held_out;                  // every task's test seasons
    std::vector<SeasonKey> training;                  // seasons the model was fit on
    std::map<std::string, std::vector<SeasonKey>> method_inputs;  // target data per method
    /// LTE samples present in each method's target data, per season.
    std::map<std::string, std::vector<std::size_t>> method_input_lte;
    /// LTE samples present in each training season.
    std::vector<std::size_t> training_lte;
};

struct LeakageAudit {
    std::vector<AuditRecord> records;
    /// Held-out LTE values reachable by training or any TAL method input.
    std::size_t leaked_lte_values() const;
};

struct ExperimentReport {
    std::vector<std::string> targets;
    std::vector<std::string> methods;  // column labels, oracle columns end in '*'
    /// rmse[target][method], averaged over trials.
    std::vector<std::vector<double>> rmse;
    std::vector<double> mean;
    /// Member evaluations summed over all runs, per method.
    std::vector<std::size_t> evaluations;
    nlohmann::json metadata;
    LeakageAudit audit;

    std::size_t method_index(const std::string& label) const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Leave-one-task-out benchmark. For every trial, `holdout_per_task` seasons
/// of each task are sampled as test seasons. For every target, a model is
/// trained on the other tasks' remaining seasons and every method predicts
/// the target's test seasons from the target's remaining seasons with LTE
/// removed (the LTE oracle alone keeps them). All methods of a (trial, target)
/// share that model.
ExperimentReport run_loco(const ExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace tal
