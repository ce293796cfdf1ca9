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

#include "tal/numerics/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "tal/common.hpp"
#include "tal/data/generator.hpp"
#include "tal/data/preprocess.hpp"

namespace tal {

namespace {

struct Probe {
    double loss;
    std::vector<std::int8_t> signature;
};

class LossProbe {
public:
    LossProbe(std::span<const TrainingExample> batch, const LossWeights& weights) : weights_(weights) {
        for (const auto& ex : batch) {
            seasons_.push_back(ex.season);
            tasks_.push_back(ex.task);
        }
        sequences_ = make_sequence_batch(seasons_);
        targets_ = make_targets(sequences_, seasons_);
    }

    Probe evaluate(const ModelParams& model) const {
        Tape tape(false);
        Network net(tape, model, false);
        const JointLoss loss = joint_loss(net, sequences_, targets_, tasks_, weights_);
        return {loss.parts.total, tape.relu_signature()};
    }

    GradientMap gradient(const ModelParams& model) const {
        Tape tape;
        Network net(tape, model, true);
        const JointLoss loss = joint_loss(net, sequences_, targets_, tasks_, weights_);
        return tape.backward(loss.total);
    }

private:
    LossWeights weights_;
    std::vector<const SeasonSeries*> seasons_;
    std::vector<std::size_t> tasks_;
    SequenceBatch sequences_;
    BatchTargets targets_;
};

}  // namespace

GradcheckResult gradcheck(const ModelParams& model, std::span<const TrainingExample> batch,
                          const GradcheckOptions& options) {
    if (batch.empty()) throw Error("gradcheck: empty batch");
    if (!(options.h > 0.0)) throw Error("gradcheck: step h must be positive");
    if (!(options.floor > 0.0)) throw Error("gradcheck: floor must be positive");
    const LossProbe probe(batch, options.weights);
    const GradientMap analytic = probe.gradient(model);
    const Probe base = probe.evaluate(model);
    const std::vector<std::int8_t>& base_signature = base.signature;
    const double floor = options.floor * std::max(1.0, std::abs(base.loss));

    std::vector<std::pair<std::string, std::size_t>> coords;
    GradcheckResult result;
    double norm2 = 0.0;
    for (const auto& [name, g] : analytic) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            coords.emplace_back(name, i);
            norm2 += g[i] * g[i];
        }
    }
    result.analytic_norm = std::sqrt(norm2);
    if (options.max_coordinates > 0 && options.max_coordinates < coords.size()) {
        std::mt19937_64 rng(options.seed);
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(options.max_coordinates);
        std::sort(coords.begin(), coords.end());
    }

    ModelParams work = model;
    for (const auto& [name, index] : coords) {
        double& theta = work.tensors.at(name)[index];
        const double saved = theta;
        theta = saved + options.h;
        const Probe plus = probe.evaluate(work);
        theta = saved - options.h;
        const Probe minus = probe.evaluate(work);
        theta = saved;
        if (plus.signature != base_signature || minus.signature != base_signature) {
            ++result.skipped;
            continue;
        }
        const double numeric = (plus.loss - minus.loss) / (2.0 * options.h);
        const double a = analytic.at(name)[index];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        ++result.checked;
        result.max_absolute_error = std::max(result.max_absolute_error, std::abs(a - numeric));
        if (rel > result.max_relative_error) {
            result.max_relative_error = rel;
            result.worst_parameter = name;
            result.worst_index = index;
        }
    }
    return result;
}

std::vector<TrainingExample> GradcheckCase::batch() const {
    std::vector<TrainingExample> out;
    for (const auto& s : seasons) out.push_back({model.task_index(s.task_id), &s});
    return out;
}

GradcheckCase make_gradcheck_case(ModelVariant variant, std::uint64_t seed, ModelWidths widths, std::size_t days,
                                  std::size_t n_seasons) {
    if (days < 1 || n_seasons < 1) throw Error("make_gradcheck_case: need at least one day and one season");
    GeneratorConfig config = default_generator_config(2, derive_seed(seed, 11));
    const int seasons_per_task = static_cast<int>((n_seasons + 1) / 2);
    Dataset data = normalize(interpolate_weather(generate_synthetic(config, seasons_per_task)));
    GradcheckCase c;
    std::mt19937_64 rng(derive_seed(seed, 12));
    // One shared window keeps the LTE targets of all seasons close together.
    const std::size_t len = std::min(days, season_length(config.first_year) - 1);
    const std::size_t first = std::uniform_int_distribution<std::size_t>(0, season_length(config.first_year) - 1 - len)(rng);
    for (const auto& [task, seasons] : data.tasks) {
        for (const auto& s : seasons) {
            if (c.seasons.size() == n_seasons) break;
            SeasonSeries cut = s;
            cut.days.assign(s.days.begin() + static_cast<std::ptrdiff_t>(first),
                            s.days.begin() + static_cast<std::ptrdiff_t>(first + len));
            if (cut.lte_count() == 0) cut.days[len / 2].lte = LteTriple{-8.0, -10.0, -12.0};
            c.seasons.push_back(std::move(cut));
        }
    }
    c.model = ModelParams::initialize(variant, widths, data.task_ids(), derive_seed(seed, 13));
    c.model.feature_stats = data.feature_stats;
    std::normal_distribution<double> jitter(0.0, 0.1);
    for (auto& [name, t] : c.model.tensors) {
        if (!name.ends_with(".bias")) continue;
        for (double& v : t.values()) v += jitter(rng);
    }
    // Keep the loss O(1): a large loss buries small gradient coordinates in
    // the rounding error of the central difference.
    std::array<double, kLteChannels> lte_sum{};
    std::size_t lte_n = 0;
    for (const auto& s : c.seasons) {
        for (const auto& day : s.days) {
            if (!day.lte) continue;
            lte_sum[0] += day.lte->lte10;
            lte_sum[1] += day.lte->lte50;
            lte_sum[2] += day.lte->lte90;
            ++lte_n;
        }
    }
    for (auto& [name, t] : c.model.tensors) {
        if (!name.starts_with("head") || !name.ends_with(".bias")) continue;
        for (std::size_t k = 0; k < kLteChannels; ++k) t[k] += lte_sum[k] / static_cast<double>(lte_n);
    }
    return c;
}

}  // namespace tal
