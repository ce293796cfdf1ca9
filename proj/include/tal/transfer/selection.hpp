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
#include <vector>

#include "tal/models/model.hpp"
#include "tal/transfer/config.hpp"
#include "tal/transfer/task_set.hpp"

namespace tal {

/// aux_loss of every entry on the target seasons, in entry order.
std::vector<double> entry_losses(const ModelParams& model, const TaskSet& set,
                                 std::span<const SeasonSeries* const> target);

/// Index of the lowest loss; ties go to the lowest index.
std::size_t argmin_loss(std::span<const double> losses);

/// Source task whose member has minimal aux_loss on the target seasons.
std::size_t select_best_source(const ModelParams& model, std::span<const SeasonSeries* const> target);

struct OptimizedEmbedding {
    std::vector<double> embedding;
    double loss = 0.0;          // objective at the returned embedding
    double initial_loss = 0.0;  // objective at the mean source embedding
    int best_step = 0;          // 0 is the initialization
};

/// Adam on a single 12-vector (network frozen) from the mean source
/// embedding. Returns the iterate with the lowest objective seen, including
/// the start and the final point. The Lte objective is the masked LTE MSE and
/// needs LTE samples in `target`.
OptimizedEmbedding optimize_embedding(const ModelParams& model, std::span<const SeasonSeries* const> target,
                                      const OptEmbeddingConfig& config);

}  // namespace tal
