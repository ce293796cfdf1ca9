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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "tal/common.hpp"
#include "tal/numerics/adam.hpp"
#include "tal/numerics/gradcheck.hpp"
#include "tal/numerics/tape.hpp"
#include "tal/numerics/tensor.hpp"

namespace tal {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> n(0.0, sd);
    Tensor t = Tensor::matrix(r, c);
    for (double& v : t.values()) v = n(rng);
    return t;
}

TEST(Tensor, ShapesAndAccess) {
    Tensor t = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
    EXPECT_EQ(t(1, 2), 6.0);
    EXPECT_EQ(Tensor::vector(4).rows(), 1u);
    EXPECT_EQ(Tensor::vector(4).cols(), 4u);
    EXPECT_EQ(t.shape_string(), "[2x3]");
    EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), Error);
}

TEST(Primitives, MatmulShapeRule) {
    Tape tape(false);
    Var a = tape.constant(Tensor::from_rows({{1, 2, 3}, {4, 5, 6}}));
    Var b = tape.constant(Tensor::from_rows({{1}, {0}, {-1}}));
    Var c = ad::matmul(a, b);
    ASSERT_EQ(c.value().shape(), (std::vector<std::size_t>{2, 1}));
    EXPECT_EQ(c.value()(0, 0), -2.0);
    EXPECT_EQ(c.value()(1, 0), -2.0);
}

TEST(Primitives, ShapeMismatchNamesPrimitive) {
    Tape tape(false);
    Var a = tape.constant(Tensor::matrix(2, 3));
    Var b = tape.constant(Tensor::matrix(2, 3));
    try {
        ad::matmul(a, b);
        FAIL() << "expected a shape error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos);
    }
    EXPECT_THROW(ad::add(a, tape.constant(Tensor::matrix(3, 2))), Error);
}

TEST(Primitives, ReluAndSigmoid) {
    Tape tape(false);
    Var r = ad::relu(tape.constant(Tensor({3}, std::vector<double>{-1, 0, 2})));
    EXPECT_EQ(r.value()[0], 0.0);
    EXPECT_EQ(r.value()[1], 0.0);
    EXPECT_EQ(r.value()[2], 2.0);
    Var s = ad::sigmoid(tape.constant(Tensor::from_rows({{0.0, 800.0, -800.0}})));
    EXPECT_EQ(s.value()[0], 0.5);
    EXPECT_EQ(s.value()[1], 1.0);
    EXPECT_EQ(s.value()[2], 0.0);
}

TEST(Primitives, ConcatAndSliceAreExact) {
    std::mt19937_64 rng(1);
    Tape tape;
    Var a = tape.parameter("a", random_matrix(3, 2, rng));
    Var b = tape.parameter("b", random_matrix(3, 4, rng));
    const Var parts[] = {a, b};
    Var c = ad::concat_cols(parts);
    EXPECT_EQ(ad::slice_cols(c, 0, 2).value(), a.value());
    EXPECT_EQ(ad::slice_cols(c, 2, 4).value(), b.value());
    Var d = ad::concat_rows(std::vector<Var>{ad::slice_rows(c, 0, 1), ad::slice_rows(c, 1, 2)});
    EXPECT_EQ(d.value(), c.value());
    // d(sum of the b block)/db = 1, d/da = 0.
    const GradientMap g = tape.backward(ad::sum(ad::slice_cols(d, 2, 4)));
    for (double v : g.at("a").values()) EXPECT_EQ(v, 0.0);
    for (double v : g.at("b").values()) EXPECT_EQ(v, 1.0);
}

TEST(Primitives, GatherRowsScatterAddsGradient) {
    Tape tape;
    Var table = tape.parameter("t", Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}}));
    const std::size_t rows[] = {2, 0, 2};
    Var g = ad::gather_rows(table, rows);
    EXPECT_EQ(g.value()(0, 1), 6.0);
    EXPECT_EQ(g.value()(1, 0), 1.0);
    const GradientMap grad = tape.backward(ad::sum(g));
    EXPECT_EQ(grad.at("t")(0, 0), 1.0);
    EXPECT_EQ(grad.at("t")(1, 0), 0.0);
    EXPECT_EQ(grad.at("t")(2, 1), 2.0);
}

TEST(Backward, SumGivesOnes) {
    Tape tape;
    Var x = tape.parameter("x", Tensor({5}, std::vector<double>{1, -2, 3, 0.5, 9}));
    const GradientMap g = tape.backward(ad::sum(x));
    ASSERT_EQ(g.at("x").size(), 5u);
    for (double v : g.at("x").values()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, SquareAtThreeGivesSix) {
    Tape tape;
    Var x = tape.parameter("x", Tensor::scalar(3.0));
    const GradientMap g = tape.backward(ad::sum(ad::mul(x, x)));
    EXPECT_EQ(g.at("x")[0], 6.0);
}

TEST(Backward, FanOutAccumulates) {
    // y = x * 2 + x^2 at x = 1.5 -> dy/dx = 2 + 2x = 5.
    Tape tape;
    Var x = tape.parameter("x", Tensor::scalar(1.5));
    Var y = ad::add(ad::scale(x, 2.0), ad::mul(x, x));
    EXPECT_DOUBLE_EQ(tape.backward(ad::sum(y)).at("x")[0], 5.0);
}

TEST(Backward, UnreachedParameterGetsZeros) {
    Tape tape;
    Var x = tape.parameter("x", Tensor::scalar(1.0));
    tape.parameter("unused", Tensor::matrix(2, 2, 1.0));
    const GradientMap g = tape.backward(ad::sum(x));
    ASSERT_TRUE(g.contains("unused"));
    for (double v : g.at("unused").values()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, NonRecordingTapeRefuses) {
    Tape tape(false);
    Var x = tape.constant(Tensor::scalar(1.0));
    EXPECT_THROW(tape.backward(ad::sum(x)), Error);
}

TEST(Backward, NonScalarLossRejected) {
    Tape tape;
    Var x = tape.parameter("x", Tensor::matrix(2, 2, 1.0));
    EXPECT_THROW(tape.backward(x), Error);
}

TEST(Losses, MaskedSseAndBce) {
    Tape tape;
    Var p = tape.parameter("p", Tensor::from_rows({{1, 2}, {3, 4}}));
    const Tensor target = Tensor::from_rows({{0, 0}, {0, 0}});
    const std::vector<double> mask = {1.0, 0.0};
    Var sse = ad::masked_sse(p, target, mask);
    EXPECT_EQ(sse.value()[0], 5.0);
    const GradientMap g = tape.backward(sse);
    EXPECT_EQ(g.at("p")(0, 1), 4.0);
    EXPECT_EQ(g.at("p")(1, 0), 0.0);

    Tape t2(false);
    Var logits = t2.constant(Tensor::from_rows({{0.0, 1000.0, -1000.0}}));
    const Tensor labels = Tensor::from_rows({{1.0, 1.0, 1.0}});
    Var bce = ad::masked_bce_with_logits(logits, labels, std::vector<double>{1.0});
    EXPECT_NEAR(bce.value()[0], std::log(2.0) + 0.0 + 1000.0, 1e-9);
    EXPECT_TRUE(std::isfinite(bce.value()[0]));
}

// Independent GRU: plain loops over the documented gate equations.
std::vector<std::vector<double>> reference_gru(const Tensor& gx, const Tensor& w, const Tensor& b, std::size_t batch,
                                               std::size_t steps) {
    const std::size_t h = w.rows();
    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    std::vector<std::vector<double>> state(batch, std::vector<double>(h, 0.0));
    std::vector<std::vector<double>> out;
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t k = 0; k < batch; ++k) {
            const std::size_t row = t * batch + k;
            std::vector<double> hh(3 * h, 0.0);
            for (std::size_t j = 0; j < 3 * h; ++j) {
                hh[j] = b[j];
                for (std::size_t i = 0; i < h; ++i) hh[j] += state[k][i] * w(i, j);
            }
            std::vector<double> next(h);
            for (std::size_t j = 0; j < h; ++j) {
                const double r = sig(gx(row, j) + hh[j]);
                const double z = sig(gx(row, h + j) + hh[h + j]);
                const double n = std::tanh(gx(row, 2 * h + j) + r * hh[2 * h + j]);
                next[j] = (1 - z) * n + z * state[k][j];
            }
            state[k] = next;
            out.push_back(next);
        }
    }
    return out;
}

// The same recurrence composed from elementary tape primitives.
Var composed_gru(Var gx, Var w, Var b, std::size_t batch, std::size_t steps, std::size_t h) {
    Tape& tape = *gx.tape();
    Var state = tape.constant(Tensor::matrix(batch, h));
    std::vector<Var> rows;
    for (std::size_t t = 0; t < steps; ++t) {
        Var x = ad::slice_rows(gx, t * batch, batch);
        Var hh = ad::add_bias(ad::matmul(state, w), b);
        Var r = ad::sigmoid(ad::add(ad::slice_cols(x, 0, h), ad::slice_cols(hh, 0, h)));
        Var z = ad::sigmoid(ad::add(ad::slice_cols(x, h, h), ad::slice_cols(hh, h, h)));
        Var n = ad::tanh(ad::add(ad::slice_cols(x, 2 * h, h), ad::mul(r, ad::slice_cols(hh, 2 * h, h))));
        state = ad::add(ad::mul(ad::one_minus(z), n), ad::mul(z, state));
        rows.push_back(state);
    }
    return ad::concat_rows(rows);
}

TEST(GruSequence, MatchesReferenceValuesAndComposedGradients) {
    std::mt19937_64 rng(17);
    const std::size_t h = 3, batch = 2, steps = 5;
    const Tensor gx = random_matrix(steps * batch, 3 * h, rng);
    const Tensor w = random_matrix(h, 3 * h, rng, 0.7);
    Tensor b = Tensor::vector(3 * h);
    for (double& v : b.values()) v = std::normal_distribution<double>(0.0, 0.3)(rng);
    const Tensor weights = random_matrix(steps * batch, h, rng);

    Tape fused;
    Var y = ad::gru_sequence(fused.parameter("gx", gx), fused.parameter("w", w), fused.parameter("b", b), batch, steps);
    const auto ref = reference_gru(gx, w, b, batch, steps);
    for (std::size_t r = 0; r < steps * batch; ++r) {
        for (std::size_t j = 0; j < h; ++j) EXPECT_NEAR(y.value()(r, j), ref[r][j], 1e-14);
    }
    const GradientMap g1 = fused.backward(ad::sum(ad::mul(y, fused.constant(weights))));

    Tape composed;
    Var y2 = composed_gru(composed.parameter("gx", gx), composed.parameter("w", w), composed.parameter("b", b), batch,
                          steps, h);
    const GradientMap g2 = composed.backward(ad::sum(ad::mul(y2, composed.constant(weights))));
    for (const char* name : {"gx", "w", "b"}) {
        ASSERT_EQ(g1.at(name).shape(), g2.at(name).shape());
        for (std::size_t i = 0; i < g1.at(name).size(); ++i) {
            EXPECT_NEAR(g1.at(name)[i], g2.at(name)[i], 1e-12) << name << "[" << i << "]";
        }
    }
}

TEST(GruSequence, HiddenStateStaysInsideUnitInterval) {
    std::mt19937_64 rng(3);
    const std::size_t h = 6, steps = 200;
    Tape tape(false);
    Var y = ad::gru_sequence(tape.constant(random_matrix(steps, 3 * h, rng, 20.0)),
                             tape.constant(random_matrix(h, 3 * h, rng, 5.0)), tape.constant(Tensor::vector(3 * h, 2.0)),
                             1, steps);
    for (double v : y.value().values()) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Adam, QuadraticConverges) {
    ParameterMap p{{"x", Tensor::scalar(0.0)}};
    AdamState adam(AdamConfig{.lr = 0.1});
    for (int t = 0; t < 500; ++t) {
        GradientMap g{{"x", Tensor::scalar(2.0 * (p.at("x")[0] - 2.0))}};
        adam.step(p, g);
    }
    EXPECT_LT(std::abs(p.at("x")[0] - 2.0), 1e-3);
    EXPECT_EQ(adam.step_count(), 500);
}

TEST(Adam, ZeroGradientLeavesParametersAndCountsStep) {
    ParameterMap p{{"w", Tensor::from_rows({{1.5, -2.0}})}};
    const ParameterMap before = p;
    AdamState adam;
    adam.step(p, GradientMap{{"w", Tensor::matrix(1, 2)}});
    EXPECT_EQ(p, before);
    EXPECT_EQ(adam.step_count(), 1);
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
    ParameterMap p{{"w", Tensor({3}, std::vector<double>{0.0, 0.0, 0.0})}};
    AdamState adam(AdamConfig{.lr = 0.01});
    adam.step(p, GradientMap{{"w", Tensor({3}, std::vector<double>{3.0, -0.2, 1e-3})}});
    // m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
    EXPECT_NEAR(p.at("w")[0], -0.01, 1e-9);
    EXPECT_NEAR(p.at("w")[1], 0.01, 1e-9);
    EXPECT_NEAR(p.at("w")[2], -0.01 * 1e-3 / (1e-3 + 1e-8), 1e-15);
}

TEST(Adam, MismatchedGradientsRejected) {
    ParameterMap p{{"w", Tensor::matrix(1, 2)}};
    AdamState adam;
    EXPECT_THROW(adam.step(p, GradientMap{{"v", Tensor::matrix(1, 2)}}), Error);
    EXPECT_THROW(adam.step(p, GradientMap{{"w", Tensor::matrix(2, 1)}}), Error);
}

class GradcheckVariants : public ::testing::TestWithParam<ModelVariant> {};

TEST_P(GradcheckVariants, SmoothConfigurationAgrees) {
    const GradcheckCase c = make_gradcheck_case(GetParam(), 21, {6, 8}, 12, 2);
    const GradcheckResult r = gradcheck(c.model, c.batch());
    EXPECT_GT(r.checked, 0u);
    EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
}

TEST_P(GradcheckVariants, LargeStepsReportKinkSkips) {
    const GradcheckCase c = make_gradcheck_case(GetParam(), 4, {6, 8}, 12, 2);
    GradcheckOptions options;
    options.h = 0.5;
    const GradcheckResult r = gradcheck(c.model, c.batch(), options);
    std::size_t total = 0;
    for (const auto& [_, t] : c.model.tensors) total += t.size();
    EXPECT_GT(r.skipped, 0u);
    EXPECT_EQ(r.checked + r.skipped, total);
}

INSTANTIATE_TEST_SUITE_P(Both, GradcheckVariants,
                         ::testing::Values(ModelVariant::MultiHead, ModelVariant::Embedding),
                         [](const auto& info) { return to_string(info.param); });

TEST(Gradcheck, ZeroLossBatchHasZeroGradient) {
    GradcheckCase c = make_gradcheck_case(ModelVariant::MultiHead, 8, {6, 8}, 10, 2);
    // Targets set to the model's own predictions; phenology switched off.
    for (auto& s : c.seasons) {
        const std::vector<const SeasonSeries*> one = {&s};
        const Tensor p = predict(c.model, TaskHandle::source(c.model.task_index(s.task_id)), one)[0];
        for (std::size_t d = 0; d < s.length(); ++d) {
            if (s.days[d].lte) s.days[d].lte = LteTriple{p(d, 0), p(d, 1), p(d, 2)};
        }
    }
    GradcheckOptions options;
    options.weights = LossWeights{1.0, 0.0};
    options.max_coordinates = 50;
    const GradcheckResult r = gradcheck(c.model, c.batch(), options);
    EXPECT_EQ(r.analytic_norm, 0.0);
}

TEST(Gradcheck, CoordinateSamplingIsSeeded) {
    const GradcheckCase c = make_gradcheck_case(ModelVariant::Embedding, 2, {4, 4}, 6, 1);
    GradcheckOptions options;
    options.max_coordinates = 30;
    options.seed = 9;
    const GradcheckResult a = gradcheck(c.model, c.batch(), options);
    const GradcheckResult b = gradcheck(c.model, c.batch(), options);
    EXPECT_EQ(a.checked + a.skipped, 30u);
    EXPECT_EQ(a.max_relative_error, b.max_relative_error);
    EXPECT_THROW(gradcheck(c.model, {}, options), Error);
}

}  // namespace
}  // namespace tal
