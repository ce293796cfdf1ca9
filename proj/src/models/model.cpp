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

#include "tal/models/model.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "tal/common.hpp"

namespace tal {

std::string to_string(ModelVariant variant) {
    return variant == ModelVariant::MultiHead ? "multihead" : "embedding";
}

ModelVariant parse_model_variant(std::string_view text) {
    if (text == "multihead" || text == "MultiHead") return ModelVariant::MultiHead;
    if (text == "embedding" || text == "Embedding") return ModelVariant::Embedding;
    throw Error("unknown model variant '" + std::string(text) + "' (expected multihead|embedding)");
}

std::string ModelParams::head_prefix(std::size_t task) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "head.%03zu", task);
    return buf;
}

namespace {

Tensor xavier(std::size_t fan_in, std::size_t fan_out, std::size_t blocks, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor t = Tensor::matrix(fan_in, fan_out * blocks);
    for (double& v : t.values()) v = u(rng);
    return t;
}

}  // namespace

ModelParams ModelParams::initialize(ModelVariant variant, ModelWidths widths,
                                    std::vector<std::string> tasks, std::uint64_t seed) {
    if (tasks.empty()) throw Error("ModelParams::initialize: empty task roster");
    if (widths.hidden1 == 0 || widths.hidden2 == 0) throw Error("ModelParams::initialize: zero width");
    ModelParams p;
    p.variant = variant;
    p.widths = widths;
    p.tasks = std::move(tasks);
    std::mt19937_64 rng(seed);
    const std::size_t h1 = widths.hidden1, h2 = widths.hidden2;
    auto& t = p.tensors;
    t["fc1.weight"] = xavier(p.input_width(), h1, 1, rng);
    t["fc1.bias"] = Tensor::vector(h1);
    t["fc2.weight"] = xavier(h1, h2, 1, rng);
    t["fc2.bias"] = Tensor::vector(h2);
    t["gru.weight_ih"] = xavier(h2, h2, 3, rng);
    t["gru.bias_ih"] = Tensor::vector(3 * h2);
    t["gru.weight_hh"] = xavier(h2, h2, 3, rng);
    t["gru.bias_hh"] = Tensor::vector(3 * h2);
    t["fc3.weight"] = xavier(h2, h1, 1, rng);
    t["fc3.bias"] = Tensor::vector(h1);
    if (variant == ModelVariant::MultiHead) {
        for (std::size_t i = 0; i < p.tasks.size(); ++i) {
            t[head_prefix(i) + ".weight"] = xavier(h1, kModelOutputs, 1, rng);
            t[head_prefix(i) + ".bias"] = Tensor::vector(kModelOutputs);
        }
    } else {
        t["head.weight"] = xavier(h1, kModelOutputs, 1, rng);
        t["head.bias"] = Tensor::vector(kModelOutputs);
        // Unit scale, comparable to the normalized weather columns.
        std::normal_distribution<double> n01(0.0, 1.0);
        Tensor e = Tensor::matrix(p.tasks.size(), kEmbeddingDim);
        for (double& v : e.values()) v = n01(rng);
        t["embeddings"] = std::move(e);
    }
    return p;
}

std::size_t ModelParams::input_width() const {
    return kWeatherFeatures + (variant == ModelVariant::Embedding ? kEmbeddingDim : 0);
}

std::size_t ModelParams::task_index(const std::string& task_id) const {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i] == task_id) return i;
    }
    throw Error("unknown task '" + task_id + "' (not a source task of this model)");
}

std::vector<double> ModelParams::source_embedding(std::size_t task) const {
    if (variant != ModelVariant::Embedding) throw Error("source_embedding: model is not an Embedding model");
    const Tensor& e = tensor("embeddings");
    if (task >= e.rows()) throw Error("source_embedding: task index out of range");
    auto row = e.row(task);
    return {row.begin(), row.end()};
}

const Tensor& ModelParams::tensor(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw Error("model has no parameter '" + name + "'");
    return it->second;
}

std::string ModelParams::fingerprint() const {
    Fnv1a h;
    h.update(to_string(variant));
    h.update(&widths.hidden1, sizeof widths.hidden1);
    h.update(&widths.hidden2, sizeof widths.hidden2);
    for (const auto& task : tasks) h.update(task + "\n");
    for (const auto& [name, value] : tensors) {
        h.update(name);
        h.update(value.values().data(), value.size() * sizeof(double));
    }
    return h.hex();
}

}  // namespace tal
