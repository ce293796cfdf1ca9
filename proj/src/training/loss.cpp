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

#include "tal/training/loss.hpp"

#include <algorithm>
#include <cmath>

#include "tal/common.hpp"

namespace tal {

BatchTargets make_targets(const SequenceBatch& batch, std::span<const SeasonSeries* const> seasons) {
    if (seasons.size() != batch.batch) throw Error("make_targets: season count does not match batch");
    const std::size_t rows = batch.steps * batch.batch;
    BatchTargets t;
    t.lte = Tensor::matrix(rows, kLteChannels);
    t.lte_mask.assign(rows, 0.0);
    t.pheno = Tensor::matrix(rows, kPhenologyEvents);
    t.day_mask = batch.valid;
    for (std::size_t k = 0; k < seasons.size(); ++k) {
        const SeasonSeries& s = *seasons[k];
        for (std::size_t d = 0; d < s.length(); ++d) {
            const std::size_t r = batch.row(d, k);
            const DayRecord& day = s.days[d];
            for (std::size_t e = 0; e < kPhenologyEvents; ++e) t.pheno(r, e) = day.pheno[e];
            ++t.days;
            if (day.lte) {
                t.lte(r, 0) = day.lte->lte10;
                t.lte(r, 1) = day.lte->lte50;
                t.lte(r, 2) = day.lte->lte90;
                t.lte_mask[r] = 1.0;
                ++t.lte_days;
            }
        }
    }
    return t;
}

JointLoss joint_loss(Network& net, const SequenceBatch& batch, const BatchTargets& targets,
                     std::span<const std::size_t> task_of_season, const LossWeights& weights) {
    if (targets.lte_days == 0 && weights.pheno == 0.0) throw Error("joint_loss: no supervised signal");
    if (targets.days == 0) throw Error("joint_loss: empty batch");
    Var out = net.forward_tasks(batch, task_of_season);
    Var lte = ad::slice_cols(out, 0, kLteChannels);
    Var logits = ad::slice_cols(out, kLteChannels, kPhenologyEvents);

    JointLoss result;
    result.parts.days = targets.days;
    result.parts.lte_days = targets.lte_days;
    const double bce_cells = static_cast<double>(targets.days * kPhenologyEvents);
    Var bce = ad::scale(ad::masked_bce_with_logits(logits, targets.pheno, targets.day_mask), 1.0 / bce_cells);
    result.parts.pheno_bce = bce.value()[0];
    result.total = ad::scale(bce, weights.pheno);
    if (targets.lte_days > 0) {
        const double lte_cells = static_cast<double>(targets.lte_days * kLteChannels);
        Var mse = ad::scale(ad::masked_sse(lte, targets.lte, targets.lte_mask), 1.0 / lte_cells);
        result.parts.lte_mse = mse.value()[0];
        result.total = ad::add(ad::scale(mse, weights.lte), result.total);
    }
    result.parts.total = result.total.value()[0];
    return result;
}

LossBreakdown joint_loss(const ModelParams& model, std::span<const TrainingExample> batch,
                         const LossWeights& weights) {
    if (batch.empty()) throw Error("joint_loss: empty batch");
    std::vector<const SeasonSeries*> seasons;
    std::vector<std::size_t> tasks;
    for (const auto& ex : batch) {
        seasons.push_back(ex.season);
        tasks.push_back(ex.task);
    }
    const SequenceBatch sequences = make_sequence_batch(seasons);
    const BatchTargets targets = make_targets(sequences, seasons);
    Tape tape(false);
    Network net(tape, model, false);
    return joint_loss(net, sequences, targets, tasks, weights).parts;
}

double aux_loss(std::span<const Tensor> predictions, std::span<const SeasonSeries* const> seasons) {
    if (seasons.empty()) throw Error("aux_loss: no target seasons");
    if (predictions.size() != seasons.size()) throw Error("aux_loss: one prediction per season required");
    double total = 0.0;
    std::size_t cells = 0;
    for (std::size_t k = 0; k < seasons.size(); ++k) {
        const SeasonSeries& s = *seasons[k];
        const Tensor& p = predictions[k];
        if (p.rows() != s.length() || p.cols() != kModelOutputs) {
            throw Error("aux_loss: prediction shape " + p.shape_string() + " does not match season");
        }
        for (std::size_t d = 0; d < s.length(); ++d) {
            for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
                const double x = p(d, kLteChannels + e);
                const double y = s.days[d].pheno[e];
                total += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
                ++cells;
            }
        }
    }
    return total / static_cast<double>(cells);
}

double aux_loss(const ModelParams& model, const TaskHandle& handle, std::span<const SeasonSeries* const> seasons) {
    if (seasons.empty()) throw Error("aux_loss: no target seasons");
    const auto predictions = predict(model, handle, seasons);
    return aux_loss(predictions, seasons);
}

double eval_rmse(std::span<const Tensor> predictions, std::span<const SeasonSeries* const> seasons) {
    if (predictions.size() != seasons.size()) throw Error("eval_rmse: one prediction per season required");
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < seasons.size(); ++k) {
        const SeasonSeries& s = *seasons[k];
        const Tensor& p = predictions[k];
        if (p.rows() != s.length() || p.cols() < kLteChannels) {
            throw Error("eval_rmse: prediction shape " + p.shape_string() + " does not match season");
        }
        for (std::size_t d = 0; d < s.length(); ++d) {
            if (!s.days[d].lte) continue;
            const double err = p(d, 1) - s.days[d].lte->lte50;
            sq += err * err;
            ++n;
        }
    }
    if (n == 0) throw Error("eval_rmse: no LTE samples");
    return std::sqrt(sq / static_cast<double>(n));
}

double eval_rmse(const ModelParams& model, const TaskHandle& handle, std::span<const SeasonSeries* const> seasons) {
    const auto predictions = predict(model, handle, seasons);
    return eval_rmse(predictions, seasons);
}

}  // namespace tal
