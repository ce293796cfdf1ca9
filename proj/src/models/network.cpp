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

#include "tal/models/network.hpp"

#include <algorithm>
#include <cmath>

#include "tal/common.hpp"

namespace tal {

SequenceBatch make_sequence_batch(std::span<const SeasonSeries* const> seasons) {
    if (seasons.empty()) throw Error("make_sequence_batch: no seasons");
    SequenceBatch b;
    b.batch = seasons.size();
    for (const SeasonSeries* s : seasons) {
        if (s->days.empty()) throw Error("make_sequence_batch: season '" + s->season_label + "' has no days");
        b.lengths.push_back(s->length());
        b.steps = std::max(b.steps, s->length());
    }
    b.inputs = Tensor::matrix(b.steps * b.batch, kWeatherFeatures);
    b.valid.assign(b.steps * b.batch, 0.0);
    for (std::size_t k = 0; k < b.batch; ++k) {
        const SeasonSeries& s = *seasons[k];
        for (std::size_t t = 0; t < s.length(); ++t) {
            const std::size_t r = b.row(t, k);
            for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
                const double v = s.days[t].weather[f];
                if (std::isnan(v)) {
                    throw Error("make_sequence_batch: missing weather in season '" + s.season_label +
                                "' of task '" + s.task_id + "' (interpolate first)");
                }
                b.inputs(r, f) = v;
            }
            b.valid[r] = 1.0;
        }
    }
    return b;
}

SequenceBatch make_sequence_batch(const Tensor& weather) {
    if (weather.rows() == 0) throw Error("make_sequence_batch: empty sequence");
    if (weather.cols() != kWeatherFeatures) {
        throw Error("make_sequence_batch: expected " + std::to_string(kWeatherFeatures) +
                    " weather columns, got " + weather.shape_string());
    }
    SequenceBatch b;
    b.batch = 1;
    b.steps = weather.rows();
    b.inputs = Tensor({weather.rows(), weather.cols()},
                      std::vector<double>(weather.values().begin(), weather.values().end()));
    b.lengths = {b.steps};
    b.valid.assign(b.steps, 1.0);
    return b;
}

Tensor weather_matrix(const SeasonSeries& season) {
    Tensor w = Tensor::matrix(season.length(), kWeatherFeatures);
    for (std::size_t t = 0; t < season.length(); ++t) {
        for (std::size_t f = 0; f < kWeatherFeatures; ++f) w(t, f) = season.days[t].weather[f];
    }
    return w;
}

Network::Network(Tape& tape, const ModelParams& params, bool trainable) : tape_(tape), params_(params) {
    for (const auto& [name, value] : params.tensors) {
        vars_.emplace(name, trainable ? tape.parameter(name, value) : tape.constant(value));
    }
}

Var Network::param(const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw Error("Network: model has no parameter '" + name + "'");
    return it->second;
}

Var Network::encode(Var inputs, std::size_t batch, std::size_t steps) {
    const Tensor& x = inputs.value();
    if (x.cols() != params_.input_width()) {
        throw Error("encode: input width " + std::to_string(x.cols()) + " does not match fc1 input " +
                    std::to_string(params_.input_width()));
    }
    if (x.rows() != batch * steps || steps == 0) throw Error("encode: input rows do not match batch x steps");
    Var a1 = ad::relu(ad::add_bias(ad::matmul(inputs, param("fc1.weight")), param("fc1.bias")));
    Var a2 = ad::relu(ad::add_bias(ad::matmul(a1, param("fc2.weight")), param("fc2.bias")));
    // Input-side gate pre-activations for every step at once.
    Var gates_x = ad::add_bias(ad::matmul(a2, param("gru.weight_ih")), param("gru.bias_ih"));
    Var hidden = ad::gru_sequence(gates_x, param("gru.weight_hh"), param("gru.bias_hh"), batch, steps);
    return ad::relu(ad::add_bias(ad::matmul(hidden, param("fc3.weight")), param("fc3.bias")));
}

Var Network::apply_head(Var features, const std::string& prefix) {
    return ad::add_bias(ad::matmul(features, param(prefix + ".weight")), param(prefix + ".bias"));
}

Var Network::forward_tasks(const SequenceBatch& batch, std::span<const std::size_t> task_of_season) {
    if (task_of_season.size() != batch.batch) throw Error("forward_tasks: one task index per season required");
    for (std::size_t task : task_of_season) {
        if (task >= params_.tasks.size()) throw Error("forward_tasks: task index out of range");
    }
    const std::size_t rows = batch.steps * batch.batch;
    Var x = tape_.constant(batch.inputs);

    if (params_.variant == ModelVariant::Embedding) {
        std::vector<std::size_t> row_task(rows);
        for (std::size_t r = 0; r < rows; ++r) row_task[r] = task_of_season[r % batch.batch];
        Var e = ad::gather_rows(param("embeddings"), row_task);
        const Var parts[] = {x, e};
        Var features = encode(ad::concat_cols(parts), batch.batch, batch.steps);
        return apply_head(features, "head");
    }

    Var features = encode(x, batch.batch, batch.steps);
    std::vector<std::size_t> distinct(task_of_season.begin(), task_of_season.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() == 1) return apply_head(features, ModelParams::head_prefix(distinct[0]));
    // Every row is routed to its own task's head by masking the others out.
    Var out;
    bool first = true;
    for (std::size_t task : distinct) {
        std::vector<double> mask(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) mask[r] = task_of_season[r % batch.batch] == task ? 1.0 : 0.0;
        Var part = ad::scale_rows(apply_head(features, ModelParams::head_prefix(task)), mask);
        out = first ? part : ad::add(out, part);
        first = false;
    }
    return out;
}

Var Network::forward_embedding(const SequenceBatch& batch, Var embedding) {
    if (params_.variant != ModelVariant::Embedding) {
        throw Error("forward_embedding: model is not an Embedding model");
    }
    const Tensor& e = embedding.value();
    if (e.size() != kEmbeddingDim) {
        throw Error("forward_embedding: embedding has " + std::to_string(e.size()) + " values, expected " +
                    std::to_string(kEmbeddingDim));
    }
    const std::size_t rows = batch.steps * batch.batch;
    std::vector<std::size_t> zeros(rows, 0);
    Var x = tape_.constant(batch.inputs);
    const Var parts[] = {x, ad::gather_rows(embedding, zeros)};
    Var features = encode(ad::concat_cols(parts), batch.batch, batch.steps);
    return apply_head(features, "head");
}

Var Network::forward(const SequenceBatch& batch, const TaskHandle& handle) {
    if (handle.is_source) {
        std::vector<std::size_t> tasks(batch.batch, handle.task);
        return forward_tasks(batch, tasks);
    }
    Var e = tape_.constant(Tensor({1, handle.embedding.size()}, handle.embedding));
    return forward_embedding(batch, e);
}

namespace {

Tensor rows_of_season(const Tensor& out, const SequenceBatch& batch, std::size_t season) {
    const std::size_t len = batch.lengths[season];
    Tensor t = Tensor::matrix(len, out.cols());
    for (std::size_t s = 0; s < len; ++s) {
        auto src = out.row(batch.row(s, season));
        std::copy(src.begin(), src.end(), t.row(s).begin());
    }
    return t;
}

}  // namespace

Tensor encode(const ModelParams& model, const Tensor& inputs) {
    Tape tape(false);
    Network net(tape, model, false);
    if (inputs.rows() == 0) throw Error("encode: empty sequence");
    return net.encode(tape.constant(inputs), 1, inputs.rows()).value();
}

Tensor predict_multihead(const ModelParams& model, const std::string& task, const Tensor& weather) {
    if (model.variant != ModelVariant::MultiHead) throw Error("predict_multihead: model is not a MultiHead model");
    const std::size_t index = model.task_index(task);
    Tape tape(false);
    Network net(tape, model, false);
    const SequenceBatch batch = make_sequence_batch(weather);
    return net.forward(batch, TaskHandle::source(index)).value();
}

Tensor predict_embedding(const ModelParams& model, std::span<const double> embedding, const Tensor& weather) {
    if (model.variant != ModelVariant::Embedding) throw Error("predict_embedding: model is not an Embedding model");
    if (embedding.size() != kEmbeddingDim) {
        throw Error("predict_embedding: embedding has " + std::to_string(embedding.size()) + " values, expected " +
                    std::to_string(kEmbeddingDim));
    }
    Tape tape(false);
    Network net(tape, model, false);
    const SequenceBatch batch = make_sequence_batch(weather);
    return net.forward(batch, TaskHandle::free_embedding({embedding.begin(), embedding.end()})).value();
}

std::vector<Tensor> predict(const ModelParams& model, const TaskHandle& handle,
                            std::span<const SeasonSeries* const> seasons) {
    if (!handle.is_source && model.variant != ModelVariant::Embedding) {
        throw Error("predict: free embeddings require an Embedding model");
    }
    if (handle.is_source && handle.task >= model.tasks.size()) throw Error("predict: task index out of range");
    Tape tape(false);
    Network net(tape, model, false);
    const SequenceBatch batch = make_sequence_batch(seasons);
    const Tensor& out = net.forward(batch, handle).value();
    std::vector<Tensor> per_season;
    for (std::size_t k = 0; k < batch.batch; ++k) per_season.push_back(rows_of_season(out, batch, k));
    return per_season;
}

}  // namespace tal
