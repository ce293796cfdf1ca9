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

#include "tal/transfer/task_set.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

#include "tal/common.hpp"

namespace tal {

void TaskSet::validate() const {
    if (entries.empty()) throw Error("TaskSet: empty task set");
    std::set<std::string> labels;
    for (const auto& e : entries) {
        if (!labels.insert(e.label).second) throw Error("TaskSet: duplicate label '" + e.label + "'");
    }
}

std::vector<std::vector<double>> source_embeddings(const ModelParams& model) {
    if (model.variant != ModelVariant::Embedding) throw Error("source_embeddings: model is not an Embedding model");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < model.tasks.size(); ++i) out.push_back(model.source_embedding(i));
    return out;
}

EmbeddingBounds embedding_bounds(const ModelParams& model) {
    const auto sources = source_embeddings(model);
    if (sources.empty()) throw Error("embedding_bounds: model has no source embeddings");
    EmbeddingBounds b{sources[0], sources[0]};
    for (const auto& e : sources) {
        for (std::size_t d = 0; d < e.size(); ++d) {
            b.lower[d] = std::min(b.lower[d], e[d]);
            b.upper[d] = std::max(b.upper[d], e[d]);
        }
    }
    return b;
}

std::vector<double> sample_cr(const EmbeddingBounds& bounds, std::mt19937_64& rng) {
    std::vector<double> e(bounds.lower.size());
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t d = 0; d < e.size(); ++d) {
        const double lo = bounds.lower[d];
        const double hi = bounds.upper[d];
        e[d] = std::clamp(lo + (hi - lo) * u01(rng), lo, hi);
    }
    return e;
}

LrSample sample_lr(std::span<const std::vector<double>> sources, std::size_t subset, std::mt19937_64& rng) {
    if (sources.empty()) throw Error("sample_lr: no source embeddings");
    if (subset > sources.size()) {
        throw Error("sample_lr: subset of " + std::to_string(subset) + " exceeds " + std::to_string(sources.size()) +
                    " sources");
    }
    LrSample s;
    s.members.resize(sources.size());
    std::iota(s.members.begin(), s.members.end(), 0);
    if (subset != 0 && subset < sources.size()) {
        std::shuffle(s.members.begin(), s.members.end(), rng);
        s.members.resize(subset);
        std::sort(s.members.begin(), s.members.end());
    }
    std::exponential_distribution<double> gamma1(1.0);
    s.coefficients.resize(s.members.size());
    for (double& c : s.coefficients) c = gamma1(rng);
    const double total = std::accumulate(s.coefficients.begin(), s.coefficients.end(), 0.0);
    for (double& c : s.coefficients) c /= total;
    s.embedding.assign(sources[0].size(), 0.0);
    for (std::size_t k = 0; k < s.members.size(); ++k) {
        const auto& e = sources[s.members[k]];
        for (std::size_t d = 0; d < e.size(); ++d) s.embedding[d] += s.coefficients[k] * e[d];
    }
    return s;
}

TaskSet build_task_set(const ModelParams& model, const TalConfig& config) {
    config.validate();
    if (model.tasks.empty()) throw Error("build_task_set: model has no source tasks");
    const auto random = config.task_set.random;
    if (random != TaskSetSpec::Random::None && model.variant != ModelVariant::Embedding) {
        throw Error("build_task_set: " + config.task_set.to_string() + " requires an Embedding model");
    }
    TaskSet set;
    if (config.task_set.sources) {
        for (std::size_t i = 0; i < model.tasks.size(); ++i) set.entries.push_back({model.tasks[i], TaskHandle::source(i), {}, {}});
    }
    std::mt19937_64 rng(derive_seed(config.rng_seed, 0x5E7));
    const std::size_t n = config.random_count();
    char label[32];
    if (random == TaskSetSpec::Random::CR) {
        const EmbeddingBounds bounds = embedding_bounds(model);
        for (std::size_t k = 0; k < n; ++k) {
            std::snprintf(label, sizeof label, "cr%03zu", k);
            set.entries.push_back({label, TaskHandle::free_embedding(sample_cr(bounds, rng)), {}, {}});
        }
    } else if (random == TaskSetSpec::Random::LR) {
        const auto sources = source_embeddings(model);
        for (std::size_t k = 0; k < n; ++k) {
            std::snprintf(label, sizeof label, "lr%03zu", k);
            LrSample s = sample_lr(sources, config.task_set.lr_subset, rng);
            set.entries.push_back({label, TaskHandle::free_embedding(std::move(s.embedding)), std::move(s.members),
                                   std::move(s.coefficients)});
        }
    }
    set.validate();
    return set;
}

}  // namespace tal
