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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tal/models/model.hpp"
#include "tal/transfer/config.hpp"
#include "tal/transfer/selection.hpp"
#include "tal/transfer/task_set.hpp"

namespace tal {

/// Everything a transfer run decided. Predictions are always the mixture of
/// `task_set` under `weights`; selection schemes produce one-hot weights or a
/// single optimized entry.
struct TalRun {
    TalConfig config;
    std::string model_fingerprint;
    TaskSet task_set;
    std::vector<double> losses;   // objective per entry
    std::vector<double> weights;
    std::optional<std::size_t> chosen;  // best_source: selected entry
    std::optional<OptimizedEmbedding> optimized;
    /// Member evaluations spent (entries scored plus embedding objective calls).
    std::size_t evaluations = 0;
};

TalRun run_tal(const ModelParams& model, std::span<const SeasonSeries* const> target, const TalConfig& config);

/// Per-season [length, 3] LTE predictions of a finished run. `model` may
/// differ from the one that produced the weights as long as the roster matches.
std::vector<Tensor> predict_lte(const ModelParams& model, const TalRun& run,
                                std::span<const SeasonSeries* const> seasons);

nlohmann::json manifest(const TalRun& run);
/// Rebuilds a run from its manifest without re-scoring any entry.
TalRun run_from_manifest(const nlohmann::json& manifest);

}  // namespace tal
