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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tal/models/model.hpp"
#include "tal/models/network.hpp"
#include "tal/transfer/config.hpp"

namespace tal {

struct TaskEntry {
    std::string label;
    TaskHandle handle;
    /// LR samples only: the source indices combined and their convex weights.
    std::vector<std::size_t> members;
    std::vector<double> coefficients;
};

struct TaskSet {
    std::vector<TaskEntry> entries;

    std::size_t size() const { return entries.size(); }
    /// Throws unless nonempty with unique labels.
    void validate() const;
};

struct EmbeddingBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Per-dimension min and max over the trained source embeddings.
EmbeddingBounds embedding_bounds(const ModelParams& model);

/// One embedding with each coordinate uniform in [lower[d], upper[d]].
std::vector<double> sample_cr(const EmbeddingBounds& bounds, std::mt19937_64& rng);

struct LrSample {
    std::vector<double> embedding;
    std::vector<std::size_t> members;
    std::vector<double> coefficients;
};

/// Convex combination of source embeddings with flat-Dirichlet coefficients,
/// over every source (`subset` = 0) or a uniformly chosen `subset` of them.
LrSample sample_lr(std::span<const std::vector<double>> sources, std::size_t subset, std::mt19937_64& rng);

std::vector<std::vector<double>> source_embeddings(const ModelParams& model);

/// Source entries (labelled by task id) followed by sampled entries labelled
/// cr000, cr001, ... or lr000, ...; deterministic in config.rng_seed.
TaskSet build_task_set(const ModelParams& model, const TalConfig& config);

}  // namespace tal
