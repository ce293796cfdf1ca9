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

#include "tal/transfer/selection.hpp"

#include <algorithm>

#include "tal/common.hpp"
#include "tal/numerics/adam.hpp"
#include "tal/training/loss.hpp"

namespace tal {

std::vector<double> entry_losses(const ModelParams& model, const TaskSet& set,
                                 std::span<const SeasonSeries* const> target) {
    if (target.empty()) throw Error("entry_losses: no target seasons");
    std::vector<double> losses;
    losses.reserve(set.size());
    for (const auto& entry : set.entries) losses.push_back(aux_loss(model, entry.handle, target));
    return losses;
}

std::size_t argmin_loss(std::span<const double> losses) {
    if (losses.empty()) throw Error("argmin_loss: no losses");
    return static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
}

std::size_t select_best_source(const ModelParams& model, std::span<const SeasonSeries* const> target) {
    if (model.tasks.empty()) throw Error("select_best_source: model has no source tasks");
    std::vector<double> losses;
    for (std::size_t i = 0; i < model.tasks.size(); ++i) {
        losses.push_back(aux_loss(model, TaskHandle::source(i), target));
    }
    return argmin_loss(losses);
}

namespace {

class EmbeddingObjectiveFn {
public:
    EmbeddingObjectiveFn(const ModelParams& model, std::span<const SeasonSeries* const> target,
                         EmbeddingObjective objective)
        : model_(model), objective_(objective) {
        sequences_ = make_sequence_batch(target);
        targets_ = make_targets(sequences_, target);
        if (objective == EmbeddingObjective::Lte && targets_.lte_days == 0) {
            throw Error("optimize_embedding: LTE objective needs target seasons with LTE samples");
        }
    }

    /// Objective and its gradient with respect to the embedding.
    std::pair<double, Tensor> operator()(const Tensor& embedding) const {
        Tape tape;
        Network net(tape, model_, false);
        Var e = tape.variable(embedding);
        Var out = net.forward_embedding(sequences_, e);
        Var loss;
        if (objective_ == EmbeddingObjective::Auxiliary) {
            Var logits = ad::slice_cols(out, kLteChannels, kPhenologyEvents);
            const double cells = static_cast<double>(targets_.days * kPhenologyEvents);
            loss = ad::scale(ad::masked_bce_with_logits(logits, targets_.pheno, targets_.day_mask), 1.0 / cells);
        } else {
            Var lte = ad::slice_cols(out, 0, kLteChannels);
            const double cells = static_cast<double>(targets_.lte_days * kLteChannels);
            loss = ad::scale(ad::masked_sse(lte, targets_.lte, targets_.lte_mask), 1.0 / cells);
        }
        tape.backward(loss);
        return {loss.value()[0], tape.grad(e)};
    }

private:
    const ModelParams& model_;
    EmbeddingObjective objective_;
    SequenceBatch sequences_;
    BatchTargets targets_;
};

}  // namespace

OptimizedEmbedding optimize_embedding(const ModelParams& model, std::span<const SeasonSeries* const> target,
                                      const OptEmbeddingConfig& config) {
    if (model.variant != ModelVariant::Embedding) throw Error("optimize_embedding: model is not an Embedding model");
    if (model.tasks.empty()) throw Error("optimize_embedding: model has no source embeddings");
    if (target.empty()) throw Error("optimize_embedding: no target seasons");
    if (config.steps < 0) throw Error("optimize_embedding: steps must be >= 0");

    Tensor start = Tensor::matrix(1, kEmbeddingDim);
    for (std::size_t i = 0; i < model.tasks.size(); ++i) {
        const auto e = model.source_embedding(i);
        for (std::size_t d = 0; d < kEmbeddingDim; ++d) start[d] += e[d];
    }
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) start[d] /= static_cast<double>(model.tasks.size());

    const EmbeddingObjectiveFn objective(model, target, config.objective);
    ParameterMap params{{"embedding", start}};
    AdamState adam(AdamConfig{.lr = config.lr});
    OptimizedEmbedding best;
    for (int step = 0; step <= config.steps; ++step) {
        auto [loss, grad] = objective(params.at("embedding"));
        if (step == 0) best.initial_loss = loss;
        if (step == 0 || loss < best.loss) {
            best.loss = loss;
            best.best_step = step;
            const auto v = params.at("embedding").values();
            best.embedding.assign(v.begin(), v.end());
        }
        if (step == config.steps) break;
        GradientMap grads{{"embedding", std::move(grad)}};
        adam.step(params, grads);
    }
    return best;
}

}  // namespace tal
