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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tal/models/model.hpp"
#include "tal/training/loss.hpp"

namespace tal {

struct GradcheckOptions {
    double h = 1e-5;
    /// Smallest denominator of the relative error, per unit of loss (the
    /// effective floor is floor * max(1, |L|)). Coordinates far below it are
    /// compared on an absolute scale: their central difference is dominated
    /// by rounding in L, which grows with |L|.
    double floor = 1e-6;
    /// 0 checks every coordinate; otherwise a seeded random sample of this size.
    std::size_t max_coordinates = 0;
    std::uint64_t seed = 0;
    LossWeights weights;
};

struct GradcheckResult {
    double max_relative_error = 0.0;
    double max_absolute_error = 0.0;
    std::size_t checked = 0;
    /// Coordinates whose +-h perturbation moved some ReLU input across zero.
    std::size_t skipped = 0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double analytic_norm = 0.0;
};

/// Compares the backward() gradient of the joint loss on `batch` with central
/// differences (L(theta+h) - L(theta-h)) / 2h, coordinate by coordinate. The
/// relative error is |a - b| / max(|a|, |b|, floor * max(1, |L|)).
GradcheckResult gradcheck(const ModelParams& model, std::span<const TrainingExample> batch,
                          const GradcheckOptions& options = {});

/// A small random model with a matching batch of preprocessed synthetic
/// seasons truncated to `days` days. All parameters, biases included, get
/// Gaussian jitter on every bias so that no ReLU input sits exactly at zero, and
/// the LTE outputs start at the batch mean.
struct GradcheckCase {
    ModelParams model;
    std::vector<SeasonSeries> seasons;
    std::vector<TrainingExample> batch() const;
};

GradcheckCase make_gradcheck_case(ModelVariant variant, std::uint64_t seed, ModelWidths widths = {8, 16},
                                  std::size_t days = 20, std::size_t n_seasons = 3);

}  // namespace tal
