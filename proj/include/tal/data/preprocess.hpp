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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tal/data/season.hpp"

namespace tal {

/// Fills missing weather cells. Interior gaps get the straight line between
/// the nearest observed neighbours; leading and trailing gaps take the
/// nearest observed value. Observed cells are never modified.
/// Throws if a feature has no observed value in the season.
SeasonSeries interpolate_weather(SeasonSeries series);
Dataset interpolate_weather(Dataset dataset);

/// Population mean/std per feature over every observed cell of `seasons`.
FeatureStats compute_feature_stats(std::span<const SeasonSeries* const> seasons);
FeatureStats compute_feature_stats(const Dataset& dataset);

/// (x - mean) / std per weather feature. LTE targets stay in degrees C.
/// Throws "zero variance" naming the feature when a std is zero.
SeasonSeries normalize(SeasonSeries series, const FeatureStats& stats);
Dataset normalize(Dataset dataset);

/// Rewrites the per-day flags from event dates: flag e at day t is 1 iff
/// date_e <= date_t. Returns any ordering warnings (first swell <= full swell
/// <= budbreak <= first leaf is expected but not enforced).
SeasonSeries encode_phenology(const std::array<std::optional<Date>, kPhenologyEvents>& events,
                              SeasonSeries season, std::vector<std::string>* warnings = nullptr);

/// Copy of `series` with every LTE observation removed.
SeasonSeries strip_lte(SeasonSeries series);

}  // namespace tal
