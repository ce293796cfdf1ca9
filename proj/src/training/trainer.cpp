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

#include "tal/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "tal/common.hpp"
#include "tal/data/csv_io.hpp"
#include "tal/numerics/adam.hpp"

namespace tal {

void TrainConfig::validate() const {
    if (epochs < 0) throw Error("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw Error("TrainConfig: batch_size must be >= 1");
    if (!(lr > 0.0)) throw Error("TrainConfig: lr must be positive");
    if (loss.lte < 0.0 || loss.pheno < 0.0) throw Error("TrainConfig: loss weights must be nonnegative");
    if (widths.hidden1 < 1 || widths.hidden2 < 1) throw Error("TrainConfig: widths must be positive");
}

std::string TrainConfig::fingerprint() const {
    nlohmann::json j = *this;
    j["reduction"] = "lte: mean over sampled days x 3; pheno: mean over days x 4";
    Fnv1a h;
    h.update(j.dump());
    return h.hex();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"lr", c.lr},
         {"lambda_lte", c.loss.lte},
         {"lambda_pheno", c.loss.pheno},
         {"rng_seed", c.rng_seed},
         {"variant", to_string(c.variant)},
         {"hidden1", c.widths.hidden1},
         {"hidden2", c.widths.hidden2}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    const TrainConfig d;
    c.epochs = j.value("epochs", d.epochs);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.lr = j.value("lr", d.lr);
    c.loss.lte = j.value("lambda_lte", d.loss.lte);
    c.loss.pheno = j.value("lambda_pheno", d.loss.pheno);
    c.rng_seed = j.value("rng_seed", d.rng_seed);
    c.variant = parse_model_variant(j.value("variant", to_string(d.variant)));
    c.widths.hidden1 = j.value("hidden1", d.widths.hidden1);
    c.widths.hidden2 = j.value("hidden2", d.widths.hidden2);
    c.validate();
}

namespace {

struct PreparedBatch {
    SequenceBatch sequences;
    BatchTargets targets;
    std::vector<std::size_t> tasks;
};

PreparedBatch prepare(std::span<const TrainingExample> examples) {
    std::vector<const SeasonSeries*> seasons;
    PreparedBatch p;
    for (const auto& ex : examples) {
        seasons.push_back(ex.season);
        p.tasks.push_back(ex.task);
    }
    p.sequences = make_sequence_batch(seasons);
    p.targets = make_targets(p.sequences, seasons);
    return p;
}

// Starts every LTE output at the mean training LTE so the first epochs are
// spent on shape rather than on a 10-degree offset.
void center_lte_biases(ModelParams& model, std::span<const TrainingExample> examples) {
    std::array<double, kLteChannels> sum{};
    std::size_t n = 0;
    for (const auto& ex : examples) {
        for (const auto& day : ex.season->days) {
            if (!day.lte) continue;
            sum[0] += day.lte->lte10;
            sum[1] += day.lte->lte50;
            sum[2] += day.lte->lte90;
            ++n;
        }
    }
    if (n == 0) return;
    for (auto& [name, value] : model.tensors) {
        if (!name.starts_with("head") || !name.ends_with(".bias")) continue;
        for (std::size_t c = 0; c < kLteChannels; ++c) value[c] = sum[c] / static_cast<double>(n);
    }
}

}  // namespace

LossBreakdown dataset_loss(const ModelParams& model, std::span<const TrainingExample> examples,
                           const LossWeights& weights, std::size_t chunk) {
    if (examples.empty()) throw Error("dataset_loss: no examples");
    double sse = 0.0;
    double bce = 0.0;
    LossBreakdown out;
    for (std::size_t begin = 0; begin < examples.size(); begin += chunk) {
        const auto part = examples.subspan(begin, std::min(chunk, examples.size() - begin));
        const LossBreakdown b = joint_loss(model, part, LossWeights{1.0, 1.0});
        sse += b.lte_mse * static_cast<double>(b.lte_days * kLteChannels);
        bce += b.pheno_bce * static_cast<double>(b.days * kPhenologyEvents);
        out.lte_days += b.lte_days;
        out.days += b.days;
    }
    if (out.lte_days == 0 && weights.pheno == 0.0) throw Error("dataset_loss: no supervised signal");
    out.lte_mse = out.lte_days > 0 ? sse / static_cast<double>(out.lte_days * kLteChannels) : 0.0;
    out.pheno_bce = bce / static_cast<double>(out.days * kPhenologyEvents);
    out.total = weights.lte * out.lte_mse + weights.pheno * out.pheno_bce;
    return out;
}

TrainResult train(const Dataset& dataset, const std::vector<std::string>& source_tasks, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    if (source_tasks.empty()) throw Error("train: empty source set");
    std::vector<TrainingExample> examples;
    for (std::size_t i = 0; i < source_tasks.size(); ++i) {
        const auto& seasons = dataset.seasons(source_tasks[i]);
        if (seasons.empty()) throw Error("train: source task '" + source_tasks[i] + "' has no training season");
        for (const auto& s : seasons) examples.push_back({i, &s});
    }

    TrainResult result;
    result.model = ModelParams::initialize(config.variant, config.widths, source_tasks,
                                           derive_seed(config.rng_seed, 1));
    result.model.feature_stats = dataset.feature_stats;
    result.model.training_fingerprint = config.fingerprint();
    center_lte_biases(result.model, examples);

    AdamState adam(AdamConfig{.lr = config.lr});
    std::mt19937_64 rng(derive_seed(config.rng_seed, 2));
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(examples.begin(), examples.end(), rng);
        EpochLog log{epoch, 0.0, 0.0, 0.0};
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < examples.size(); begin += config.batch_size) {
            const auto part = std::span<const TrainingExample>(examples).subspan(
                begin, std::min(config.batch_size, examples.size() - begin));
            const PreparedBatch prepared = prepare(part);
            if (prepared.targets.lte_days == 0 && config.loss.pheno == 0.0) continue;
            Tape tape;
            Network net(tape, result.model, true);
            const JointLoss loss = joint_loss(net, prepared.sequences, prepared.targets, prepared.tasks, config.loss);
            const GradientMap grads = tape.backward(loss.total);
            adam.step(result.model.tensors, grads);
            log.joint += loss.parts.total;
            log.lte_mse += loss.parts.lte_mse;
            log.pheno_bce += loss.parts.pheno_bce;
            ++batches;
        }
        if (batches == 0) throw Error("train: no batch carries a supervised signal");
        log.joint /= static_cast<double>(batches);
        log.lte_mse /= static_cast<double>(batches);
        log.pheno_bce /= static_cast<double>(batches);
        if (!std::isfinite(log.joint)) throw Error("train: loss diverged at epoch " + std::to_string(epoch));
        result.log.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    return result;
}

void write_training_log(const std::vector<EpochLog>& log, std::ostream& out) {
    out << "epoch,joint_loss,lte_mse,pheno_bce\n";
    for (const auto& e : log) {
        out << e.epoch << ',' << format_double(e.joint) << ',' << format_double(e.lte_mse) << ','
            << format_double(e.pheno_bce) << '\n';
    }
}

}  // namespace tal
