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

#include "tal/transfer/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tal/common.hpp"

namespace tal {

std::vector<double> compute_weights(std::span<const double> losses, Weighting weighting, double tau,
                                    std::span<const double> prior) {
    const std::size_t n = losses.size();
    if (n == 0) throw Error("compute_weights: empty task set");
    if (!prior.empty() && prior.size() != n) {
        throw Error("compute_weights: prior has " + std::to_string(prior.size()) + " entries for " +
                    std::to_string(n) + " tasks");
    }
    for (double l : losses) {
        if (!std::isfinite(l)) throw Error("compute_weights: non-finite loss");
    }
    const auto [lo, hi] = std::minmax_element(losses.begin(), losses.end());
    const double l_min = *lo;
    const double l_max = *hi;
    std::vector<double> w(n, 1.0);
    switch (weighting) {
        case Weighting::Uniform: break;
        case Weighting::Exponential:
            if (!(tau > 0.0)) throw Error("compute_weights: tau must be positive");
            for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-tau * (losses[i] - l_min));
            break;
        case Weighting::Linear:
            if (l_max > l_min) {
                const double eps = 1e-6 * (l_max - l_min + 1.0);
                for (std::size_t i = 0; i < n; ++i) w[i] = l_max - losses[i] + eps;
            }
            break;
        case Weighting::LinearLiteral:
            if (l_min < 0.0) throw Error("compute_weights: literal linear weighting needs nonnegative losses");
            if (l_max > 0.0) std::copy(losses.begin(), losses.end(), w.begin());
            break;
    }
    if (!prior.empty()) {
        for (std::size_t i = 0; i < n; ++i) w[i] *= prior[i];
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0)) throw Error("compute_weights: all weights are zero");
    for (double& x : w) x /= total;
    return w;
}

Tensor mix_members(std::span<const Tensor> members, std::span<const double> weights) {
    if (members.empty()) throw Error("mixture_predict: no members");
    if (members.size() != weights.size()) {
        throw Error("mixture_predict: " + std::to_string(weights.size()) + " weights for " +
                    std::to_string(members.size()) + " entries");
    }
    const std::size_t days = members[0].rows();
    for (const auto& m : members) {
        if (m.rows() != days || m.cols() < kLteChannels) {
            throw Error("mixture_predict: member shape " + m.shape_string() + " differs");
        }
    }
    Tensor out = Tensor::matrix(days, kLteChannels);
    for (std::size_t d = 0; d < days; ++d) {
        for (std::size_t c = 0; c < kLteChannels; ++c) {
            double acc = 0.0;
            double lo = members[0](d, c);
            double hi = lo;
            for (std::size_t i = 0; i < members.size(); ++i) {
                const double v = members[i](d, c);
                acc += weights[i] * v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            out(d, c) = std::clamp(acc, lo, hi);
        }
    }
    return out;
}

std::vector<Tensor> mixture_predict(const TaskSet& set, std::span<const double> weights, const ModelParams& model,
                                    std::span<const SeasonSeries* const> seasons) {
    if (set.size() != weights.size()) {
        throw Error("mixture_predict: " + std::to_string(weights.size()) + " weights for " +
                    std::to_string(set.size()) + " entries");
    }
    std::vector<std::vector<Tensor>> per_entry;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < set.size(); ++i) {
        // Zero-weight members contribute nothing, so they are not evaluated.
        if (weights[i] == 0.0) continue;
        active.push_back(i);
        per_entry.push_back(predict(model, set.entries[i].handle, seasons));
    }
    if (active.empty()) throw Error("mixture_predict: all weights are zero");
    std::vector<double> w;
    for (std::size_t i : active) w.push_back(weights[i]);
    std::vector<Tensor> out;
    for (std::size_t k = 0; k < seasons.size(); ++k) {
        std::vector<Tensor> members;
        for (auto& e : per_entry) members.push_back(std::move(e[k]));
        out.push_back(mix_members(members, w));
    }
    return out;
}

}  // namespace tal
