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

#include "tal/data/preprocess.hpp"

#include <cmath>

#include "tal/common.hpp"

namespace tal {

SeasonSeries interpolate_weather(SeasonSeries series) {
    const std::size_t n = series.days.size();
    for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
        std::vector<std::size_t> observed;
        for (std::size_t t = 0; t < n; ++t) {
            if (!std::isnan(series.days[t].weather[f])) observed.push_back(t);
        }
        if (observed.empty()) {
            throw Error("interpolate_weather: feature '" + std::string(kWeatherNames[f]) +
                        "' is fully missing in season '" + series.season_label + "' of task '" +
                        series.task_id + "'");
        }
        auto cell = [&](std::size_t t) -> double& { return series.days[t].weather[f]; };
        for (std::size_t t = 0; t < observed.front(); ++t) cell(t) = cell(observed.front());
        for (std::size_t t = observed.back() + 1; t < n; ++t) cell(t) = cell(observed.back());
        for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
            const std::size_t lo = observed[k], hi = observed[k + 1];
            const double a = cell(lo), b = cell(hi);
            const double span = static_cast<double>(hi - lo);
            for (std::size_t t = lo + 1; t < hi; ++t) {
                const double frac = static_cast<double>(t - lo) / span;
                cell(t) = a + (b - a) * frac;
            }
        }
    }
    return series;
}

Dataset interpolate_weather(Dataset dataset) {
    for (auto& [_, seasons] : dataset.tasks) {
        for (auto& s : seasons) s = interpolate_weather(std::move(s));
    }
    return dataset;
}

FeatureStats compute_feature_stats(std::span<const SeasonSeries* const> seasons) {
    FeatureStats stats;
    for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const SeasonSeries* s : seasons) {
            for (const auto& d : s->days) {
                if (std::isnan(d.weather[f])) continue;
                sum += d.weather[f];
                ++count;
            }
        }
        if (count == 0) {
            throw Error("compute_feature_stats: no observed values for feature '" +
                        std::string(kWeatherNames[f]) + "'");
        }
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (const SeasonSeries* s : seasons) {
            for (const auto& d : s->days) {
                if (std::isnan(d.weather[f])) continue;
                sq += (d.weather[f] - mean) * (d.weather[f] - mean);
            }
        }
        stats.mean[f] = mean;
        stats.stddev[f] = std::sqrt(sq / static_cast<double>(count));
    }
    return stats;
}

FeatureStats compute_feature_stats(const Dataset& dataset) {
    std::vector<const SeasonSeries*> all;
    for (const auto& [_, seasons] : dataset.tasks) {
        for (const auto& s : seasons) all.push_back(&s);
    }
    return compute_feature_stats(all);
}

SeasonSeries normalize(SeasonSeries series, const FeatureStats& stats) {
    for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
        if (!(stats.stddev[f] > 0.0)) {
            throw Error("normalize: zero variance in feature '" + std::string(kWeatherNames[f]) + "'");
        }
    }
    for (auto& d : series.days) {
        for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
            d.weather[f] = (d.weather[f] - stats.mean[f]) / stats.stddev[f];
        }
    }
    return series;
}

Dataset normalize(Dataset dataset) {
    for (auto& [_, seasons] : dataset.tasks) {
        for (auto& s : seasons) s = normalize(std::move(s), dataset.feature_stats);
    }
    return dataset;
}

SeasonSeries encode_phenology(const std::array<std::optional<Date>, kPhenologyEvents>& events,
                              SeasonSeries season, std::vector<std::string>* warnings) {
    if (!season.days.empty()) {
        for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
            if (events[e] && *events[e] < season.days.front().date) {
                throw Error("encode_phenology: " + std::string(kEventNames[e]) + " date " +
                            format_iso_date(*events[e]) + " precedes season '" + season.season_label +
                            "' of task '" + season.task_id + "'");
            }
        }
    }
    for (std::size_t e = 0; e + 1 < kPhenologyEvents; ++e) {
        if (events[e] && events[e + 1] && *events[e] > *events[e + 1] && warnings) {
            warnings->push_back("task '" + season.task_id + "' season '" + season.season_label + "': " +
                                std::string(kEventNames[e]) + " after " +
                                std::string(kEventNames[e + 1]));
        }
    }
    season.events = events;
    for (auto& d : season.days) {
        for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
            d.pheno[e] = events[e] && *events[e] <= d.date ? 1 : 0;
        }
    }
    return season;
}

SeasonSeries strip_lte(SeasonSeries series) {
    for (auto& d : series.days) d.lte.reset();
    return series;
}

}  // namespace tal
