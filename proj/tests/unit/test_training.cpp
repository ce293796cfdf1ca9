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

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "tal/common.hpp"
#include "tal/data/preprocess.hpp"
#include "tal/models/network.hpp"
#include "tal/training/loss.hpp"
#include "tal/training/trainer.hpp"

namespace tal {
namespace {

using testing::blank_season;
using testing::pointers;

// A season with budbreak-style events so the phenology channels carry both labels.
SeasonSeries labelled_season(const std::string& task, int year, std::size_t days) {
    SeasonSeries s = blank_season(task, year, days);
    std::array<std::optional<Date>, kPhenologyEvents> events{};
    for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
        events[e] = s.days.front().date + std::chrono::days(static_cast<long>((e + 1) * days / 6));
    }
    return encode_phenology(events, std::move(s));
}

// [days, 7] predictions: given lte50 per day (lte10/90 at +-1) and a constant logit.
Tensor predictions(std::size_t days, double lte50, double logit) {
    Tensor t = Tensor::matrix(days, kModelOutputs);
    for (std::size_t d = 0; d < days; ++d) {
        t(d, 0) = lte50 + 1.0;
        t(d, 1) = lte50;
        t(d, 2) = lte50 - 1.0;
        for (std::size_t c = 3; c < kModelOutputs; ++c) t(d, c) = logit;
    }
    return t;
}

// Logits of magnitude `scale` whose sign follows the season's phenology flags.
Tensor pheno_logits(const SeasonSeries& s, double scale) {
    Tensor t = Tensor::matrix(s.length(), kModelOutputs);
    for (std::size_t d = 0; d < s.length(); ++d) {
        for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
            t(d, kLteChannels + e) = s.days[d].pheno[e] > 0.5 ? scale : -scale;
        }
    }
    return t;
}

TEST(JointLoss, HandComputedMse) {
    // One LTE day, every channel off by 2: mean squared error 4.
    ModelParams model = ModelParams::initialize(ModelVariant::MultiHead, {4, 4}, {"a", "b"}, 1);
    const std::string p = ModelParams::head_prefix(0);
    for (double& v : model.tensors.at(p + ".weight").values()) v = 0.0;
    model.tensors.at(p + ".bias") = Tensor({7}, std::vector<double>{-10, -12, -14, 0, 0, 0, 0});
    SeasonSeries s = blank_season("a", 2001, 5);
    s.days[2].lte = LteTriple{-8.0, -10.0, -12.0};
    const TrainingExample ex{0, &s};
    const LossBreakdown parts = joint_loss(model, {&ex, 1}, {1.0, 0.0});
    EXPECT_NEAR(parts.lte_mse, 4.0, 1e-12);
    EXPECT_NEAR(parts.total, 4.0, 1e-12);
    EXPECT_EQ(parts.lte_days, 1u);
    EXPECT_EQ(parts.days, 5u);
    // Zero logits against any labels cost ln 2 per cell.
    EXPECT_NEAR(parts.pheno_bce, std::log(2.0), 1e-12);
    const LossBreakdown weighted = joint_loss(model, {&ex, 1}, {0.5, 2.0});
    EXPECT_NEAR(weighted.total, 0.5 * 4.0 + 2.0 * std::log(2.0), 1e-12);
}

TEST(JointLoss, NoSupervisedSignalThrows) {
    const ModelParams model = ModelParams::initialize(ModelVariant::MultiHead, {4, 4}, {"a", "b"}, 1);
    const SeasonSeries s = blank_season("a", 2001, 5);
    const TrainingExample ex{0, &s};
    try {
        joint_loss(model, {&ex, 1}, {1.0, 0.0});
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("no supervised signal"), std::string::npos);
    }
    EXPECT_NO_THROW(joint_loss(model, {&ex, 1}, {1.0, 1.0}));
}

TEST(JointLoss, OrderInvariantAndEmptyLteSeasonOnlyChangesBce) {
    const Dataset data = testing::small_dataset(2, 2, 4);
    const ModelParams model = ModelParams::initialize(ModelVariant::Embedding, {8, 8}, data.task_ids(), 3);
    std::vector<TrainingExample> batch;
    for (std::size_t t = 0; t < 2; ++t) {
        for (const auto& s : data.tasks.at(data.task_ids()[t])) batch.push_back({t, &s});
    }
    const LossBreakdown forward = joint_loss(model, batch);
    std::vector<TrainingExample> reversed(batch.rbegin(), batch.rend());
    const LossBreakdown backward = joint_loss(model, reversed);
    EXPECT_NEAR(forward.total, backward.total, 1e-12);

    const SeasonSeries stripped = strip_lte(*batch[0].season);
    std::vector<TrainingExample> extended = batch;
    extended.push_back({batch[0].task, &stripped});
    const LossBreakdown more = joint_loss(model, extended);
    EXPECT_NEAR(more.lte_mse, forward.lte_mse, 1e-12);
    EXPECT_EQ(more.lte_days, forward.lte_days);
    EXPECT_GT(more.days, forward.days);
}

TEST(AuxLoss, Examples) {
    const SeasonSeries s = labelled_season("a", 2002, 60);
    const SeasonSeries* ptr = &s;
    const Tensor zero = Tensor::matrix(s.length(), kModelOutputs);
    EXPECT_NEAR(aux_loss({&zero, 1}, {&ptr, 1}), std::log(2.0), 1e-12);
    const Tensor right = pheno_logits(s, 30.0);
    EXPECT_LT(aux_loss({&right, 1}, {&ptr, 1}), 1e-3);
    const Tensor wrong = pheno_logits(s, -30.0);
    EXPECT_GT(aux_loss({&wrong, 1}, {&ptr, 1}), aux_loss({&right, 1}, {&ptr, 1}));
}

TEST(AuxLoss, GroundTruthPatternIsOptimal) {
    const SeasonSeries s = labelled_season("a", 2002, 24);
    const SeasonSeries* ptr = &s;
    const Tensor truth = pheno_logits(s, 5.0);
    const double best = aux_loss({&truth, 1}, {&ptr, 1});
    for (std::size_t flip = 0; flip < s.length(); flip += 3) {
        Tensor other = truth;
        other(flip, kLteChannels + flip % kPhenologyEvents) *= -1.0;
        EXPECT_GT(aux_loss({&other, 1}, {&ptr, 1}), best);
    }
}

TEST(AuxLoss, IgnoresLteLabels) {
    const ModelParams& model = testing::tiny_embedding_model();
    const Dataset data = testing::small_dataset(4, 1, 31);
    const auto& seasons = data.tasks.begin()->second;
    std::vector<SeasonSeries> stripped;
    for (const auto& s : seasons) stripped.push_back(strip_lte(s));
    EXPECT_EQ(aux_loss(model, TaskHandle::source(1), pointers(seasons)),
              aux_loss(model, TaskHandle::source(1), pointers(stripped)));
}

TEST(EvalRmse, Examples) {
    SeasonSeries s = blank_season("a", 2001, 10);
    s.days[1].lte = LteTriple{0, -9.0, 0};
    s.days[6].lte = LteTriple{0, -11.0, 0};
    const SeasonSeries* ptr = &s;

    const Tensor at_mean = predictions(10, -10.0, 0.0);
    EXPECT_NEAR(eval_rmse({&at_mean, 1}, {&ptr, 1}), 1.0, 1e-12);

    Tensor exact = predictions(10, 0.0, 0.0);
    exact(1, 1) = -9.0;
    exact(6, 1) = -11.0;
    EXPECT_EQ(eval_rmse({&exact, 1}, {&ptr, 1}), 0.0);

    const SeasonSeries empty = blank_season("a", 2001, 10);
    const SeasonSeries* eptr = &empty;
    EXPECT_THROW(eval_rmse({&at_mean, 1}, {&eptr, 1}), Error);
}

TEST(EvalRmse, ConstantAtMeanGivesPopulationStd) {
    SeasonSeries s = blank_season("a", 2001, 40);
    const std::vector<double> values = {-3.0, -7.5, -12.0, -20.0, -4.25};
    for (std::size_t i = 0; i < values.size(); ++i) s.days[i * 7].lte = LteTriple{0, values[i], 0};
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= values.size();
    const SeasonSeries* ptr = &s;
    const Tensor constant = predictions(40, mean, 0.0);
    EXPECT_NEAR(eval_rmse({&constant, 1}, {&ptr, 1}), std::sqrt(var), 1e-12);

    // Doubling every error doubles the RMSE.
    const Tensor doubled = predictions(40, 2.0 * mean, 0.0);
    SeasonSeries twice = s;
    for (auto& d : twice.days) {
        if (d.lte) d.lte->lte50 = 2.0 * d.lte->lte50;
    }
    const SeasonSeries* tptr = &twice;
    EXPECT_NEAR(eval_rmse({&doubled, 1}, {&tptr, 1}), 2.0 * std::sqrt(var), 1e-12);
}

TEST(TrainConfig, ValidationAndJson) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), Error);
    c = TrainConfig{};
    c.lr = -1.0;
    EXPECT_THROW(c.validate(), Error);

    TrainConfig d;
    d.epochs = 7;
    d.lr = 5e-4;
    d.loss = {2.0, 0.5};
    d.rng_seed = 99;
    d.variant = ModelVariant::MultiHead;
    d.widths = {16, 24};
    nlohmann::json j = d;
    const TrainConfig back = j.get<TrainConfig>();
    EXPECT_EQ(back.fingerprint(), d.fingerprint());
    EXPECT_NE(back.fingerprint(), TrainConfig{}.fingerprint());
}

TEST(Train, EmptySourceSetThrows) {
    const Dataset data = testing::small_dataset(2, 1, 4);
    TrainConfig c;
    c.epochs = 1;
    EXPECT_THROW(train(data, {}, c), Error);
    EXPECT_THROW(train(data, {"nope"}, c), Error);
}

TEST(Train, DeterministicAndLogged) {
    const Dataset data = testing::small_dataset(3, 2, 6);
    TrainConfig c;
    c.epochs = 4;
    c.widths = {8, 16};
    c.rng_seed = 17;
    int calls = 0;
    const TrainResult a = train(data, data.task_ids(), c, [&](const EpochLog&) { ++calls; });
    const TrainResult b = train(data, data.task_ids(), c);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(calls, 4);
    ASSERT_EQ(a.log.size(), 4u);
    EXPECT_EQ(a.model.training_fingerprint, c.fingerprint());
    EXPECT_EQ(a.model.feature_stats, data.feature_stats);

    std::ostringstream out;
    write_training_log(a.log, out);
    const std::string text = out.str();
    EXPECT_EQ(text.rfind("epoch,joint_loss,lte_mse,pheno_bce\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);

    c.rng_seed = 18;
    EXPECT_NE(train(data, data.task_ids(), c).model.fingerprint(), a.model.fingerprint());
}

TEST(Train, LossDecreasesOverFirstEpochs) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset data = testing::small_dataset(3, 3, 100 + seed);
        TrainConfig c;
        c.epochs = 10;
        c.rng_seed = seed;
        const TrainResult r = train(data, data.task_ids(), c);
        EXPECT_LT(r.log.back().joint, r.log.front().joint) << "seed " << seed;
    }
}

class TrainVariant : public ::testing::TestWithParam<ModelVariant> {};

TEST_P(TrainVariant, ReachesUsefulTrainRmse) {
    const Dataset data = testing::small_dataset(3, 4, 21);
    TrainConfig c;
    c.variant = GetParam();
    c.batch_size = 3;
    c.rng_seed = 3;
    const TrainResult r = train(data, data.task_ids(), c);
    EXPECT_LT(r.log.back().joint, r.log.front().joint);
    const auto ids = data.task_ids();
    for (std::size_t t = 0; t < ids.size(); ++t) {
        const auto ptrs = pointers(data.tasks.at(ids[t]));
        EXPECT_LT(eval_rmse(r.model, TaskHandle::source(t), ptrs), 2.0) << ids[t];
    }
}

INSTANTIATE_TEST_SUITE_P(Variants, TrainVariant,
                         ::testing::Values(ModelVariant::MultiHead, ModelVariant::Embedding),
                         [](const auto& info) { return to_string(info.param); });

}  // namespace
}  // namespace tal
