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
#include <span>
#include <string>
#include <vector>

#include "tal/data/season.hpp"
#include "tal/models/network.hpp"

namespace tal {

/// One training item: a season and the source-task index it belongs to.
struct TrainingExample {
    std::size_t task = 0;
    const SeasonSeries* season = nullptr;
};

struct LossWeights {
    double lte = 1.0;
    double pheno = 1.0;
};

struct LossBreakdown {
    double total = 0.0;
    double lte_mse = 0.0;     // mean over LTE-sampled days x 3 channels
    double pheno_bce = 0.0;   // mean over all days x 4 channels
    std::size_t lte_days = 0;
    std::size_t days = 0;
};

/// Targets aligned with a SequenceBatch. LTE rows are masked jointly (all
/// three channels or none).
struct BatchTargets {
    Tensor lte;                    // [rows, 3]
    std::vector<double> lte_mask;  // [rows]
    Tensor pheno;                  // [rows, 4]
    std::vector<double> day_mask;  // [rows]
    std::size_t lte_days = 0;
    std::size_t days = 0;
};

BatchTargets make_targets(const SequenceBatch& batch, std::span<const SeasonSeries* const> seasons);

/// Joint loss recorded on the network's tape:
///   lte * MSE(lte10/50/90 on sampled days) + pheno * BCE-with-logits(all days).
/// Throws "no supervised signal" when the batch has no LTE day and the
/// phenology weight is zero.
struct JointLoss {
    Var total;
    LossBreakdown parts;
};
JointLoss joint_loss(Network& net, const SequenceBatch& batch, const BatchTargets& targets,
                     std::span<const std::size_t> task_of_season, const LossWeights& weights);

/// Value-only joint loss over a batch of examples.
LossBreakdown joint_loss(const ModelParams& model, std::span<const TrainingExample> batch,
                         const LossWeights& weights = {});

/// Mean BCE with logits over every day x 4 phenology channels of `seasons`
/// for one model member. LTE values in the seasons are ignored.
double aux_loss(const ModelParams& model, const TaskHandle& handle, std::span<const SeasonSeries* const> seasons);
/// Same quantity from precomputed [days, 7] predictions.
double aux_loss(std::span<const Tensor> predictions, std::span<const SeasonSeries* const> seasons);

/// RMSE of the lte50 channel over every LTE-sampled day. `predictions[k]`
/// holds at least 3 columns (lte10, lte50, lte90) for season k.
double eval_rmse(std::span<const Tensor> predictions, std::span<const SeasonSeries* const> seasons);
double eval_rmse(const ModelParams& model, const TaskHandle& handle, std::span<const SeasonSeries* const> seasons);

}  // namespace tal
