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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tal {

enum class Scheme { BestSource, OptEmbedding, Averaging };
enum class Weighting { Uniform, Linear, LinearLiteral, Exponential };
enum class EmbeddingObjective { Auxiliary, Lte };

std::string to_string(Scheme scheme);
std::string to_string(Weighting weighting);
std::string to_string(EmbeddingObjective objective);
Scheme parse_scheme(std::string_view text);
Weighting parse_weighting(std::string_view text);
EmbeddingObjective parse_objective(std::string_view text);

/// Which entries a task set holds: the source roster, sampled fictitious
/// embeddings, or both. Written as S, CR, LR-3, LR-all, S+CR, S+LR-3, S+LR-all.
struct TaskSetSpec {
    enum class Random { None, CR, LR };
    bool sources = true;
    Random random = Random::None;
    /// LR subset size; 0 means every source.
    std::size_t lr_subset = 0;

    static TaskSetSpec parse(std::string_view text);
    std::string to_string() const;
    friend bool operator==(const TaskSetSpec&, const TaskSetSpec&) = default;
};

struct OptEmbeddingConfig {
    int steps = 500;
    double lr = 0.01;
    /// Auxiliary is the transfer method; Lte uses the target's LTE labels and
    /// only serves as an oracle baseline.
    EmbeddingObjective objective = EmbeddingObjective::Auxiliary;
};

struct TalConfig {
    /// Column label in reports; derived from the other fields when empty.
    std::string name;
    Scheme scheme = Scheme::Averaging;
    TaskSetSpec task_set;
    /// Number of sampled embeddings; defaults to 68 for CR and 17 for LR.
    std::optional<std::size_t> n_random;
    Weighting weighting = Weighting::Exponential;
    double tau = 10.0;
    OptEmbeddingConfig opt;
    std::uint64_t rng_seed = 0;
    /// Optional per-entry prior multiplying the weights; empty means uniform.
    std::vector<double> prior;

    std::size_t random_count() const;
    std::string label() const;
    void validate() const;
};

void to_json(nlohmann::json& j, const TalConfig& c);
void from_json(const nlohmann::json& j, TalConfig& c);

}  // namespace tal
