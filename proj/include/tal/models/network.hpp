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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tal/data/season.hpp"
#include "tal/models/model.hpp"
#include "tal/numerics/tape.hpp"

namespace tal {

/// Several seasons laid out time-major for the recurrent encoder: row
/// t * batch + b holds day t of season b. Days past a season's end are zero
/// and flagged invalid; the encoder is causal so padding never reaches valid
/// rows.
struct SequenceBatch {
    std::size_t batch = 0;
    std::size_t steps = 0;
    Tensor inputs;                    // [steps * batch, 12] normalized weather
    std::vector<std::size_t> lengths;
    std::vector<double> valid;        // [steps * batch]

    std::size_t row(std::size_t step, std::size_t season) const { return step * batch + season; }
};

SequenceBatch make_sequence_batch(std::span<const SeasonSeries* const> seasons);
/// Single sequence from a [days, 12] weather matrix.
SequenceBatch make_sequence_batch(const Tensor& weather);

/// Which member of a multi-task model to evaluate: a source task (its head,
/// or its learned embedding) or an arbitrary 12-vector for Embedding models.
struct TaskHandle {
    bool is_source = true;
    std::size_t task = 0;
    std::vector<double> embedding;

    static TaskHandle source(std::size_t task) { return {true, task, {}}; }
    static TaskHandle free_embedding(std::vector<double> e) { return {false, 0, std::move(e)}; }
};

/// Binds a ModelParams onto a tape. With `trainable` every tensor becomes a
/// named parameter leaf (gradients come back from Tape::backward); otherwise
/// they are constants.
class Network {
public:
    Network(Tape& tape, const ModelParams& params, bool trainable);

    /// Backbone: fc1+ReLU, fc2+ReLU, GRU, fc3+ReLU. [steps*batch, in] -> [steps*batch, H1].
    ///
    /// GRU step with gates ordered (r, z, n):
    ///   r = sigmoid(x W_ir + b_ir + h W_hr + b_hr)
    ///   z = sigmoid(x W_iz + b_iz + h W_hz + b_hz)
    ///   n = tanh(x W_in + b_in + r * (h W_hn + b_hn))
    ///   h' = (1 - z) * n + z * h,    h_0 = 0.
    Var encode(Var inputs, std::size_t batch, std::size_t steps);

    /// [steps*batch, 7] outputs with season b conditioned on source task
    /// `task_of_season[b]`.
    Var forward_tasks(const SequenceBatch& batch, std::span<const std::size_t> task_of_season);
    /// Embedding variant conditioned on a [1, 12] embedding variable shared by
    /// every season.
    Var forward_embedding(const SequenceBatch& batch, Var embedding);
    Var forward(const SequenceBatch& batch, const TaskHandle& handle);

    Var param(const std::string& name) const;
    const ModelParams& params() const { return params_; }
    Tape& tape() { return tape_; }

private:
    Var apply_head(Var features, const std::string& prefix);

    Tape& tape_;
    const ModelParams& params_;
    std::map<std::string, Var> vars_;
};

/// Per-day features of the backbone for one weather sequence [days, in].
Tensor encode(const ModelParams& model, const Tensor& inputs);
/// [days, 7] MultiHead prediction for a source task.
Tensor predict_multihead(const ModelParams& model, const std::string& task, const Tensor& weather);
/// [days, 7] Embedding prediction for any 12-vector.
Tensor predict_embedding(const ModelParams& model, std::span<const double> embedding, const Tensor& weather);
/// Predictions for each season, in order, as [length, 7] tensors.
std::vector<Tensor> predict(const ModelParams& model, const TaskHandle& handle,
                            std::span<const SeasonSeries* const> seasons);

/// [days, 12] weather matrix of a (preprocessed) season.
Tensor weather_matrix(const SeasonSeries& season);

}  // namespace tal
