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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "tal/common.hpp"
#include "tal/data/preprocess.hpp"
#include "tal/models/network.hpp"
#include "tal/training/loss.hpp"
#include "tal/transfer/config.hpp"
#include "tal/transfer/selection.hpp"
#include "tal/transfer/tal.hpp"
#include "tal/transfer/task_set.hpp"
#include "tal/transfer/weights.hpp"

namespace tal {
namespace {

using testing::pointers;
using testing::tiny_embedding_model;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

// Phenology-only seasons of task `task` from the data the tiny model saw.
std::vector<SeasonSeries> aux_target(const std::string& task) {
    const Dataset data = testing::small_dataset(4, 2, 31);
    std::vector<SeasonSeries> out;
    for (const auto& s : data.tasks.at(task)) out.push_back(strip_lte(s));
    return out;
}

TEST(Weights, UniformIsExact) {
    const std::vector<double> losses = {0.3, 0.1, 0.9, 0.2};
    const auto w = compute_weights(losses, Weighting::Uniform, 10.0);
    for (double x : w) EXPECT_EQ(x, 0.25);
}

TEST(Weights, ExponentialHandExample) {
    const std::vector<double> losses = {0.1, 0.2};
    const auto w = compute_weights(losses, Weighting::Exponential, 10.0);
    const double expected = 1.0 / (1.0 + std::exp(-1.0));
    EXPECT_NEAR(w[0], expected, 1e-12);
    EXPECT_NEAR(w[1], 1.0 - expected, 1e-12);
    EXPECT_NEAR(w[0], 0.7311, 5e-5);
}

TEST(Weights, ExponentialShiftInvariantAndMonotone) {
    const std::vector<double> losses = {0.31, 0.27, 0.45, 0.27 + 1e-3};
    std::vector<double> shifted = losses;
    for (double& l : shifted) l += 123.0;
    const auto a = compute_weights(losses, Weighting::Exponential, 10.0);
    const auto b = compute_weights(shifted, Weighting::Exponential, 10.0);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    std::vector<double> worse = losses;
    worse[0] += 0.05;
    EXPECT_LT(compute_weights(worse, Weighting::Exponential, 10.0)[0], a[0]);
}

TEST(Weights, SoftmaxLimitPicksMinimum) {
    const std::vector<double> losses = {0.4, 0.21, 0.2101, 0.9};
    const auto w = compute_weights(losses, Weighting::Exponential, 1e6);
    EXPECT_GT(w[1], 0.999);
}

TEST(Weights, LinearForms) {
    const std::vector<double> losses = {0.1, 0.3, 0.2};
    const auto w = compute_weights(losses, Weighting::Linear, 10.0);
    const double eps = 1e-6 * (0.3 - 0.1 + 1.0);
    const double z = (0.2 + eps) + eps + (0.1 + eps);
    EXPECT_NEAR(w[0], (0.2 + eps) / z, 1e-12);
    EXPECT_NEAR(w[1], eps / z, 1e-12);
    EXPECT_NEAR(w[2], (0.1 + eps) / z, 1e-12);

    const std::vector<double> equal = {0.5, 0.5, 0.5};
    for (double x : compute_weights(equal, Weighting::Linear, 10.0)) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);

    const auto literal = compute_weights(losses, Weighting::LinearLiteral, 10.0);
    EXPECT_NEAR(literal[1], 0.5, 1e-12);
}

TEST(Weights, PriorAndErrors) {
    const std::vector<double> losses = {0.2, 0.2};
    const std::vector<double> prior = {3.0, 1.0};
    const auto w = compute_weights(losses, Weighting::Uniform, 10.0, prior);
    EXPECT_NEAR(w[0], 0.75, 1e-15);
    EXPECT_THROW(compute_weights(std::vector<double>{}, Weighting::Uniform, 10.0), Error);
    EXPECT_THROW(compute_weights(losses, Weighting::Exponential, 0.0), Error);
    EXPECT_THROW(compute_weights(losses, Weighting::Uniform, 10.0, std::vector<double>{1.0}), Error);
}

TEST(Weights, AlwaysSimplex) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> losses(1 + trial % 9);
        for (double& l : losses) l = u(rng);
        for (Weighting w : {Weighting::Uniform, Weighting::Linear, Weighting::LinearLiteral, Weighting::Exponential}) {
            const auto weights = compute_weights(losses, w, 0.5 + trial);
            EXPECT_NEAR(sum(weights), 1.0, 1e-9);
            for (double x : weights) EXPECT_GE(x, 0.0);
        }
    }
}

TEST(Mixture, OneHotAndUniform) {
    std::vector<Tensor> members;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(-10.0, 3.0);
    for (int m = 0; m < 4; ++m) {
        Tensor t = Tensor::matrix(15, kModelOutputs);
        for (double& v : t.values()) v = n(rng);
        members.push_back(t);
    }
    for (std::size_t k = 0; k < 4; ++k) {
        std::vector<double> w(4, 0.0);
        w[k] = 1.0;
        const Tensor mixed = mix_members(members, w);
        ASSERT_EQ(mixed.cols(), kLteChannels);
        for (std::size_t d = 0; d < 15; ++d) {
            for (std::size_t c = 0; c < kLteChannels; ++c) ASSERT_EQ(mixed(d, c), members[k](d, c));
        }
    }
    // Uniform over 4 entries is the arithmetic mean (weights of 0.25 make this exact).
    const Tensor mean = mix_members(members, std::vector<double>(4, 0.25));
    for (std::size_t d = 0; d < 15; ++d) {
        for (std::size_t c = 0; c < kLteChannels; ++c) {
            const double expected =
                (members[0](d, c) + members[1](d, c) + members[2](d, c) + members[3](d, c)) / 4.0;
            EXPECT_NEAR(mean(d, c), expected, 1e-13);
        }
    }
    EXPECT_THROW(mix_members(members, std::vector<double>(3, 1.0 / 3.0)), Error);
}

TEST(TaskSetSpec, ParseAndPrint) {
    for (const char* text : {"S", "CR", "LR-3", "LR-all", "S+CR", "S+LR-3", "S+LR-all"}) {
        EXPECT_EQ(TaskSetSpec::parse(text).to_string(), text);
    }
    EXPECT_THROW(TaskSetSpec::parse("S+XY"), Error);
    EXPECT_THROW(TaskSetSpec::parse(""), Error);
}

TEST(TaskSet, CountsAndLabels) {
    const ModelParams& model = tiny_embedding_model();
    TalConfig c;
    c.task_set = TaskSetSpec::parse("S");
    const TaskSet s = build_task_set(model, c);
    ASSERT_EQ(s.size(), model.tasks.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.entries[i].label, model.tasks[i]);

    c.task_set = TaskSetSpec::parse("S+CR");
    const TaskSet scr = build_task_set(model, c);
    ASSERT_EQ(scr.size(), model.tasks.size() + 68);
    EXPECT_EQ(scr.entries[model.tasks.size()].label, "cr000");
    EXPECT_EQ(scr.entries.back().label, "cr067");

    c.task_set = TaskSetSpec::parse("LR-3");
    c.n_random = 5;
    const TaskSet lr = build_task_set(model, c);
    ASSERT_EQ(lr.size(), 5u);
    EXPECT_EQ(lr.entries[0].label, "lr000");
    for (const auto& e : lr.entries) {
        EXPECT_EQ(e.members.size(), 3u);
        EXPECT_EQ(std::set<std::size_t>(e.members.begin(), e.members.end()).size(), 3u);
    }
}

TEST(TaskSet, DeterministicInSeed) {
    const ModelParams& model = tiny_embedding_model();
    TalConfig c;
    c.task_set = TaskSetSpec::parse("CR");
    c.n_random = 10;
    c.rng_seed = 4;
    const TaskSet a = build_task_set(model, c);
    const TaskSet b = build_task_set(model, c);
    c.rng_seed = 5;
    const TaskSet other = build_task_set(model, c);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.entries[i].handle.embedding, b.entries[i].handle.embedding);
    EXPECT_NE(a.entries[0].handle.embedding, other.entries[0].handle.embedding);
}

TEST(TaskSet, RandomEntriesNeedEmbeddingModel) {
    const ModelParams mh = ModelParams::initialize(ModelVariant::MultiHead, {4, 4}, {"a", "b"}, 1);
    TalConfig c;
    c.task_set = TaskSetSpec::parse("S+CR");
    EXPECT_THROW(build_task_set(mh, c), Error);
    c.task_set = TaskSetSpec::parse("S");
    EXPECT_EQ(build_task_set(mh, c).size(), 2u);
}

TEST(Samplers, CrWithinBoundsLrConvex) {
    const ModelParams& model = tiny_embedding_model();
    const EmbeddingBounds bounds = embedding_bounds(model);
    const auto sources = source_embeddings(model);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto e = sample_cr(bounds, rng);
        for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
            EXPECT_GE(e[d], bounds.lower[d]);
            EXPECT_LE(e[d], bounds.upper[d]);
        }
    }
    for (std::size_t subset : {std::size_t{0}, std::size_t{3}}) {
        for (int i = 0; i < 200; ++i) {
            const LrSample s = sample_lr(sources, subset, rng);
            EXPECT_EQ(s.members.size(), subset == 0 ? sources.size() : subset);
            EXPECT_NEAR(sum(s.coefficients), 1.0, 1e-12);
            for (double c : s.coefficients) EXPECT_GE(c, 0.0);
            for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
                double expected = 0.0;
                for (std::size_t m = 0; m < s.members.size(); ++m) {
                    expected += s.coefficients[m] * sources[s.members[m]][d];
                }
                EXPECT_NEAR(s.embedding[d], expected, 1e-12);
            }
        }
    }
    EXPECT_THROW(sample_lr(sources, sources.size() + 1, rng), Error);
}

TEST(SelectBestSource, SingleSource) {
    const Dataset data = testing::small_dataset(2, 1, 3);
    const ModelParams one = ModelParams::initialize(ModelVariant::MultiHead, {4, 8}, {"only"}, 2);
    std::vector<SeasonSeries> target;
    for (const auto& s : data.tasks.begin()->second) target.push_back(strip_lte(s));
    EXPECT_EQ(select_best_source(one, pointers(target)), 0u);
}

TEST(SelectBestSource, TiesGoToLowerIndex) {
    ModelParams mh = ModelParams::initialize(ModelVariant::MultiHead, {4, 8}, {"a", "b", "c"}, 2);
    // Heads 1 and 2 are identical and better than head 0.
    mh.tensors.at(ModelParams::head_prefix(2) + ".weight") = mh.tensor(ModelParams::head_prefix(1) + ".weight");
    mh.tensors.at(ModelParams::head_prefix(2) + ".bias") = mh.tensor(ModelParams::head_prefix(1) + ".bias");
    mh.tensors.at(ModelParams::head_prefix(0) + ".bias").values()[3] = 50.0;
    const SeasonSeries s = testing::blank_season("t", 2001, 30);
    const std::vector<const SeasonSeries*> target = {&s};
    EXPECT_EQ(select_best_source(mh, target), 1u);
    EXPECT_EQ(argmin_loss(std::vector<double>{0.3, 0.1, 0.1}), 1u);
}

TEST(OptimizeEmbedding, ZeroStepsReturnsMean) {
    const ModelParams& model = tiny_embedding_model();
    const auto target = aux_target(model.tasks[1]);
    OptEmbeddingConfig c;
    c.steps = 0;
    const OptimizedEmbedding r = optimize_embedding(model, pointers(target), c);
    const auto sources = source_embeddings(model);
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
        double mean = 0.0;
        for (const auto& e : sources) mean += e[d];
        EXPECT_NEAR(r.embedding[d], mean / sources.size(), 1e-15);
    }
    EXPECT_EQ(r.best_step, 0);
    EXPECT_EQ(r.loss, r.initial_loss);
}

TEST(OptimizeEmbedding, NeverWorseThanStartOrThanOwnEmbedding) {
    const ModelParams& model = tiny_embedding_model();
    const auto target = aux_target(model.tasks[2]);
    const auto ptrs = pointers(target);
    OptEmbeddingConfig c;
    c.steps = 300;
    c.lr = 0.05;
    const OptimizedEmbedding r = optimize_embedding(model, ptrs, c);
    EXPECT_LE(r.loss, r.initial_loss);
    EXPECT_NEAR(aux_loss(model, TaskHandle::free_embedding(r.embedding), ptrs), r.loss, 1e-12);
    const double own = aux_loss(model, TaskHandle::source(2), ptrs);
    EXPECT_LE(r.loss, own + 1e-6);
}

TEST(OptimizeEmbedding, RejectsMultiHead) {
    const ModelParams mh = ModelParams::initialize(ModelVariant::MultiHead, {4, 4}, {"a", "b"}, 1);
    const SeasonSeries s = testing::blank_season("t", 2001, 10);
    const std::vector<const SeasonSeries*> target = {&s};
    EXPECT_THROW(optimize_embedding(mh, target, {}), Error);
}

TEST(RunTal, BestSourceMatchesSoftmaxLimit) {
    const ModelParams& model = tiny_embedding_model();
    const auto target = aux_target(model.tasks[0]);
    const auto ptrs = pointers(target);
    TalConfig best;
    best.scheme = Scheme::BestSource;
    const TalRun b = run_tal(model, ptrs, best);
    ASSERT_TRUE(b.chosen.has_value());
    EXPECT_EQ(*b.chosen, select_best_source(model, ptrs));
    EXPECT_EQ(b.weights[*b.chosen], 1.0);

    TalConfig sharp;
    sharp.task_set = TaskSetSpec::parse("S");
    sharp.tau = 1e6;
    const TalRun s = run_tal(model, ptrs, sharp);
    const auto pb = predict_lte(model, b, ptrs);
    const auto ps = predict_lte(model, s, ptrs);
    for (std::size_t k = 0; k < pb.size(); ++k) {
        for (std::size_t i = 0; i < pb[k].size(); ++i) EXPECT_NEAR(pb[k].values()[i], ps[k].values()[i], 1e-6);
    }
}

TEST(RunTal, ManifestReplaysExactly) {
    const ModelParams& model = tiny_embedding_model();
    const auto target = aux_target(model.tasks[3]);
    const auto ptrs = pointers(target);
    for (const char* set : {"S+CR", "LR-3"}) {
        TalConfig c;
        c.task_set = TaskSetSpec::parse(set);
        c.n_random = 6;
        c.rng_seed = 77;
        const TalRun run = run_tal(model, ptrs, c);
        EXPECT_NEAR(sum(run.weights), 1.0, 1e-9);
        const TalRun replay = run_from_manifest(manifest(run));
        EXPECT_EQ(replay.weights, run.weights);
        const auto a = predict_lte(model, run, ptrs);
        const auto b = predict_lte(model, replay, ptrs);
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(vec(a[k]), vec(b[k]));
    }
    TalConfig opt;
    opt.scheme = Scheme::OptEmbedding;
    opt.opt.steps = 20;
    const TalRun run = run_tal(model, ptrs, opt);
    ASSERT_TRUE(run.optimized.has_value());
    const TalRun replay = run_from_manifest(manifest(run));
    EXPECT_EQ(replay.task_set.entries[0].handle.embedding, run.optimized->embedding);
}

TEST(RunTal, ManifestRejectsForeignModel) {
    const ModelParams& model = tiny_embedding_model();
    const auto target = aux_target(model.tasks[0]);
    const TalRun run = run_tal(model, pointers(target), TalConfig{});
    const ModelParams other = ModelParams::initialize(ModelVariant::Embedding, {8, 16}, {"x", "y"}, 4);
    const auto ptrs = pointers(target);
    EXPECT_THROW(predict_lte(other, run, ptrs), Error);
}

TEST(TalConfig, LabelsAndValidation) {
    TalConfig c;
    c.task_set = TaskSetSpec::parse("S+CR");
    EXPECT_EQ(c.label(), "Weighted (S+CR)");
    c.weighting = Weighting::Uniform;
    c.task_set = TaskSetSpec::parse("S");
    EXPECT_EQ(c.label(), "Uniform (S)");
    c.name = "custom";
    EXPECT_EQ(c.label(), "custom");
    EXPECT_EQ(TalConfig{}.random_count(), 0u);
    TalConfig cr;
    cr.task_set = TaskSetSpec::parse("CR");
    EXPECT_EQ(cr.random_count(), 68u);
    TalConfig lr;
    lr.task_set = TaskSetSpec::parse("LR-all");
    EXPECT_EQ(lr.random_count(), 17u);
    TalConfig bad;
    bad.tau = 0.0;
    EXPECT_THROW(bad.validate(), Error);

    nlohmann::json j = cr;
    const TalConfig back = j.get<TalConfig>();
    EXPECT_EQ(back.task_set, cr.task_set);
    EXPECT_EQ(back.label(), cr.label());
}

}  // namespace
}  // namespace tal
