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
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tal/data/season.hpp"

namespace tal {

/// Seasonal sinusoid plus AR(1) perturbation:
///   x_t = mean + amplitude * cos(2 pi (t - peak_day) / 365) + e_t,
///   e_t = ar_coef * e_{t-1} + N(0, noise_sd^2),
/// with t counted in days from September 7.
struct WeatherProcess {
    double mean = 0.0;
    double amplitude = 0.0;
    double peak_day = 0.0;
    double ar_coef = 0.0;
    double noise_sd = 0.0;
};

/// Driver processes from which the 12 station features are derived.
struct WeatherParams {
    WeatherProcess air_temp{9.0, 11.0, 310.0, 0.75, 2.6};
    WeatherProcess temp_range{11.0, 3.0, 320.0, 0.5, 2.0};
    WeatherProcess humidity{72.0, 12.0, 120.0, 0.6, 7.0};
    WeatherProcess humidity_range{30.0, 6.0, 300.0, 0.4, 5.0};
    WeatherProcess precipitation{-1.0, 1.5, 110.0, 0.3, 3.0};
    WeatherProcess wind{2.5, 0.6, 230.0, 0.5, 0.8};
    WeatherProcess gust{1.8, 0.2, 230.0, 0.3, 0.4};
    /// Fraction of weather cells blanked out to exercise interpolation.
    double missing_fraction = 0.02;
};

/// Latent per-task physiology. Cold hardiness follows a daily
/// acclimation/deacclimation balance; phenological events fire when growing
/// degree-days accumulated after dormancy release cross the thresholds.
struct TaskParams {
    std::string task_id;
    double hardiness_min = -3.0;       // least hardy LTE50, degrees C
    double hardiness_max = -24.0;      // deepest attainable LTE50, degrees C
    double acclimation_rate = 0.10;    // per degree-day below the acclimation threshold
    double deacclimation_rate = 0.015; // per degree-day above threshold, before release
    double eco_deacclimation_rate = 0.09;  // per degree-day above threshold, after release
    double acclimation_threshold = 11.0;   // degrees C
    double deacclimation_threshold = 4.0;  // degrees C
    double chill_requirement = 900.0;      // chill degree-days below 10 C
    double gdd_base = 4.0;                 // degrees C
    std::array<double, kPhenologyEvents> gdd_thresholds{60.0, 120.0, 190.0, 260.0};
    double lte_spread = 1.5;           // LTE10 - LTE50 = LTE50 - LTE90, degrees C
    double spread_noise = 0.1;
    double process_noise = 0.05;       // daily latent LTE50 noise sd
    double observation_noise = 0.4;    // LTE sample noise sd
    double gdd_jitter = 0.05;          // per-season relative threshold jitter sd

    /// Throws unless thresholds are strictly increasing and rates positive.
    void validate() const;
};

struct GeneratorConfig {
    WeatherParams weather;
    std::vector<TaskParams> tasks;
    int first_year = 2000;
    /// LTE sampling cadence: first sample within the first `sample_interval`
    /// days, then gaps of sample_interval +/- sample_jitter days.
    int sample_interval = 14;
    int sample_jitter = 3;
    std::uint64_t rng_seed = 0;
};

/// Synthesizes `seasons_per_task` seasons for every task. Weather for season s
/// is shared by all tasks and seeded from (rng_seed, s); label noise is seeded
/// from (rng_seed, s, task parameters), so tasks with identical parameters get
/// identical labels under the same seed. Weather is returned raw (missing cells
/// NaN), phenology already encoded, feature stats computed.
Dataset generate_synthetic(const GeneratorConfig& config, int seasons_per_task);

/// Six-ish tasks spread along an "earliness" axis: earlier tasks need less
/// chill, reach budbreak sooner and deacclimate earlier.
GeneratorConfig default_generator_config(int n_tasks, std::uint64_t rng_seed);

void to_json(nlohmann::json& j, const WeatherProcess& p);
void from_json(const nlohmann::json& j, WeatherProcess& p);
void to_json(nlohmann::json& j, const WeatherParams& p);
void from_json(const nlohmann::json& j, WeatherParams& p);
void to_json(nlohmann::json& j, const TaskParams& p);
void from_json(const nlohmann::json& j, TaskParams& p);
void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

}  // namespace tal
