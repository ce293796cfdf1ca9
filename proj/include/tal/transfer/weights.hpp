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

#include <span>
#include <vector>

#include "tal/models/model.hpp"
#include "tal/numerics/tensor.hpp"
#include "tal/transfer/config.hpp"
#include "tal/transfer/task_set.hpp"

namespace tal {

/// Normalized averaging weights from per-entry auxiliary losses.
///   uniform:        w_i = 1 / n
///   exp:            w_i ~ exp(-tau * (L_i - L_min))
///   linear:         w_i ~ L_max - L_i + eps,  eps = 1e-6 * (L_max - L_min + 1)
///   linear_literal: w_i ~ L_i
/// A nonempty `prior` multiplies the unnormalized weights entrywise.
std::vector<double> compute_weights(std::span<const double> losses, Weighting weighting, double tau,
                                    std::span<const double> prior = {});

/// Weighted per-day mean of the members' LTE triples for each season,
/// returned as [length, 3] tensors. Each value is kept inside the members'
/// range so rounding never leaves the convex hull.
std::vector<Tensor> mixture_predict(const TaskSet& set, std::span<const double> weights, const ModelParams& model,
                                    std::span<const SeasonSeries* const> seasons);

/// Same combination over precomputed member outputs ([length, >=3] each).
Tensor mix_members(std::span<const Tensor> members, std::span<const double> weights);

}  // namespace tal
