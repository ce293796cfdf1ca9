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
#include <string>
#include <string_view>
#include <vector>

#include "tal/data/season.hpp"
#include "tal/numerics/adam.hpp"
#include "tal/numerics/tensor.hpp"

namespace tal {

enum class ModelVariant { MultiHead, Embedding };

std::string to_string(ModelVariant variant);
ModelVariant parse_model_variant(std::string_view text);

inline constexpr std::size_t kEmbeddingDim = 12;
/// Per-day outputs: lte10, lte50, lte90 (degrees C) then 4 phenology logits.
inline constexpr std::size_t kModelOutputs = kLteChannels + kPhenologyEvents;

struct ModelWidths {
    std::size_t hidden1 = 32;  // fc1 and fc3 width
    std::size_t hidden2 = 64;  // fc2 width and GRU state

    /// Full-scale widths; the defaults are the reduced desk setting.
    static ModelWidths full_scale() { return {1024, 2048}; }
    friend bool operator==(const ModelWidths&, const ModelWidths&) = default;
};

/// Every trainable tensor of a multi-task model, keyed by name:
///
///   fc1.weight [in, H1]      fc1.bias [H1]
///   fc2.weight [H1, H2]      fc2.bias [H2]
///   gru.weight_ih [H2, 3H2]  gru.bias_ih [3H2]   gate blocks ordered r | z | n
///   gru.weight_hh [H2, 3H2]  gru.bias_hh [3H2]
///   fc3.weight [H2, H1]      fc3.bias [H1]
///
/// MultiHead adds head.NNN.weight [H1, 7] / head.NNN.bias [7] per source task;
/// Embedding adds one head.weight / head.bias and embeddings [tasks, 12], whose
/// row i is concatenated to every day's weather for task i.
struct ModelParams {
    ModelVariant variant = ModelVariant::Embedding;
    ModelWidths widths;
    std::vector<std::string> tasks;
    ParameterMap tensors;
    /// Weather normalization the model was trained under.
    FeatureStats feature_stats = FeatureStats::identity();
    /// Hash of the training configuration that produced the parameters.
    std::string training_fingerprint;

    /// Xavier-uniform matrices (GRU gates per H2 x H2 block), zero biases,
    /// standard normal embeddings.
    static ModelParams initialize(ModelVariant variant, ModelWidths widths,
                                  std::vector<std::string> tasks, std::uint64_t seed);

    std::size_t input_width() const;
    std::size_t task_index(const std::string& task_id) const;
    std::vector<double> source_embedding(std::size_t task) const;
    const Tensor& tensor(const std::string& name) const;
    /// Hex digest over variant, widths, roster and all parameter bytes.
    std::string fingerprint() const;

    static std::string head_prefix(std::size_t task);

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

}  // namespace tal
