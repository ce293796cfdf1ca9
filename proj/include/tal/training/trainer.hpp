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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tal/data/season.hpp"
#include "tal/models/model.hpp"
#include "tal/training/loss.hpp"

namespace tal {

struct TrainConfig {
    int epochs = 60;
    std::size_t batch_size = 12;
    double lr = 1e-3;
    LossWeights loss;
    std::uint64_t rng_seed = 0;
    ModelVariant variant = ModelVariant::Embedding;
    ModelWidths widths;

    void validate() const;
    /// Hash of every field plus the loss reduction convention.
    std::string fingerprint() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochLog {
    int epoch = 0;
    double joint = 0.0;
    double lte_mse = 0.0;
    double pheno_bce = 0.0;
};

struct TrainResult {
    ModelParams model;
    std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains a multi-task model on every season of `source_tasks` in a
/// preprocessed dataset. Seasons are shuffled each epoch and grouped into
/// batches of `batch_size` seasons; one Adam step per batch. Each log entry is
/// the mean over that epoch's batches of the pre-update losses.
TrainResult train(const Dataset& dataset, const std::vector<std::string>& source_tasks, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Full-data loss of `model` over the given examples, evaluated in chunks.
LossBreakdown dataset_loss(const ModelParams& model, std::span<const TrainingExample> examples,
                           const LossWeights& weights, std::size_t chunk = 24);

void write_training_log(const std::vector<EpochLog>& log, std::ostream& out);

}  // namespace tal
