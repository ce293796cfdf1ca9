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

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "tal/data/generator.hpp"
#include "tal/data/preprocess.hpp"
#include "tal/data/season.hpp"
#include "tal/models/model.hpp"
#include "tal/training/trainer.hpp"

namespace tal::testing {

inline std::vector<const SeasonSeries*> pointers(const std::vector<SeasonSeries>& seasons) {
    std::vector<const SeasonSeries*> out;
    for (const auto& s : seasons) out.push_back(&s);
    return out;
}

/// A season of `days` days starting September 7 of `year` with a smooth
/// weather signal, no LTE samples and no events.
inline SeasonSeries blank_season(const std::string& task, int year, std::size_t days) {
    SeasonSeries s;
    s.task_id = task;
    s.season_label = std::to_string(year) + "-" + std::to_string(year + 1);
    s.days.resize(days);
    for (std::size_t d = 0; d < days; ++d) {
        s.days[d].date = season_first_day(year) + std::chrono::days(d);
        for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
            s.days[d].weather[f] = std::sin(0.1 * static_cast<double>(d) + static_cast<double>(f));
        }
    }
    return s;
}

/// Preprocessed synthetic data from the default generator.
inline Dataset small_dataset(int tasks, int seasons, std::uint64_t seed) {
    Dataset d = interpolate_weather(generate_synthetic(default_generator_config(tasks, seed), seasons));
    d.feature_stats = compute_feature_stats(d);
    return normalize(std::move(d));
}

/// A quickly trained Embedding model on small_dataset(4, 2, seed).
inline const ModelParams& tiny_embedding_model() {
    static const ModelParams model = [] {
        const Dataset data = small_dataset(4, 2, 31);
        TrainConfig tc;
        tc.epochs = 6;
        tc.widths = {8, 16};
        tc.rng_seed = 2;
        return train(data, data.task_ids(), tc).model;
    }();
    return model;
}

}  // namespace tal::testing
