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

#include "tal/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tal/common.hpp"
#include "tal/data/preprocess.hpp"

namespace tal {

namespace {

// Events and hardiness keep evolving past May 15 so that late events still
// get a (post-window) date.
constexpr int kSimulationDays = 330;

struct Drivers {
    std::vector<double> air_temp, temp_range, humidity, humidity_range, precipitation, wind, gust;
};

std::vector<double> run_process(const WeatherProcess& p, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> out(kSimulationDays);
    double e = p.noise_sd * noise(rng) / std::sqrt(std::max(1e-12, 1.0 - p.ar_coef * p.ar_coef));
    for (int t = 0; t < kSimulationDays; ++t) {
        if (t > 0) e = p.ar_coef * e + p.noise_sd * noise(rng);
        const double phase = 2.0 * std::numbers::pi * (t - p.peak_day) / 365.0;
        out[static_cast<std::size_t>(t)] = p.mean + p.amplitude * std::cos(phase) + e;
    }
    return out;
}

std::vector<std::array<double, kWeatherFeatures>> simulate_weather(const WeatherParams& w,
                                                                   std::mt19937_64& rng) {
    Drivers d;
    d.air_temp = run_process(w.air_temp, rng);
    d.temp_range = run_process(w.temp_range, rng);
    d.humidity = run_process(w.humidity, rng);
    d.humidity_range = run_process(w.humidity_range, rng);
    d.precipitation = run_process(w.precipitation, rng);
    d.wind = run_process(w.wind, rng);
    d.gust = run_process(w.gust, rng);

    std::vector<std::array<double, kWeatherFeatures>> days(kSimulationDays);
    for (std::size_t t = 0; t < days.size(); ++t) {
        auto& x = days[t];
        const double temp_half = 0.5 * std::max(1.0, d.temp_range[t]);
        const double rh = std::clamp(d.humidity[t], 10.0, 100.0);
        const double rh_half = 0.5 * std::max(2.0, d.humidity_range[t]);
        x[0] = d.air_temp[t] - temp_half;
        x[1] = d.air_temp[t] + temp_half;
        x[2] = d.air_temp[t];
        x[3] = std::max(1.0, rh - rh_half);
        x[4] = std::min(100.0, rh + rh_half);
        x[5] = rh;
        // Dew point from the rule of thumb Td ~ T - (100 - RH) / 5.
        x[8] = d.air_temp[t] - (100.0 - rh) / 5.0;
        x[6] = x[8] - 0.5 * temp_half;
        x[7] = std::min(x[1], x[8] + 0.5 * temp_half);
        x[9] = std::max(0.0, d.precipitation[t]);
        x[11] = std::abs(d.wind[t]);
        x[10] = x[11] * (1.0 + std::abs(d.gust[t]));
    }
    return days;
}

std::uint64_t params_fingerprint(const TaskParams& p) {
    TaskParams anonymous = p;
    anonymous.task_id.clear();
    nlohmann::json j = anonymous;
    Fnv1a h;
    h.update(j.dump());
    return h.digest();
}

struct LatentSeason {
    std::vector<double> lte50;
    std::array<std::optional<int>, kPhenologyEvents> event_day{};
};

LatentSeason simulate_task(const TaskParams& p, const std::vector<std::array<double, kWeatherFeatures>>& weather,
                           std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    const double threshold_scale = std::max(0.2, 1.0 + p.gdd_jitter * noise(rng));

    LatentSeason out;
    out.lte50.resize(weather.size());
    double lte = p.hardiness_min;
    double chill = 0.0, gdd = 0.0;
    for (std::size_t t = 0; t < weather.size(); ++t) {
        const double temp = weather[t][2];
        const bool released = chill >= p.chill_requirement;
        chill += std::max(0.0, 10.0 - temp);
        if (released) gdd += std::max(0.0, temp - p.gdd_base);

        const double heat = std::max(0.0, temp - p.deacclimation_threshold);
        const double cold = std::max(0.0, p.acclimation_threshold - temp);
        const double deacc_rate = released ? p.eco_deacclimation_rate : p.deacclimation_rate;
        // Deacclimation pulls toward hardiness_min, acclimation toward
        // hardiness_max; both slow down as the bound is approached.
        lte += 0.1 * heat * deacc_rate * (p.hardiness_min - lte);
        lte -= 0.1 * cold * p.acclimation_rate * (lte - p.hardiness_max);
        lte += p.process_noise * noise(rng);
        lte = std::clamp(lte, p.hardiness_max, p.hardiness_min);
        out.lte50[t] = lte;

        for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
            if (!out.event_day[e] && gdd >= p.gdd_thresholds[e] * threshold_scale) {
                out.event_day[e] = static_cast<int>(t);
            }
        }
    }
    return out;
}

}  // namespace

void TaskParams::validate() const {
    if (task_id.empty()) throw Error("generator: task with empty id");
    for (std::size_t e = 0; e + 1 < kPhenologyEvents; ++e) {
        if (!(gdd_thresholds[e] < gdd_thresholds[e + 1])) {
            throw Error("generator: task '" + task_id + "' GDD thresholds must be strictly increasing");
        }
    }
    if (!(gdd_thresholds[0] > 0.0)) throw Error("generator: task '" + task_id + "' thresholds must be positive");
    if (!(hardiness_max < hardiness_min)) {
        throw Error("generator: task '" + task_id + "' needs hardiness_max < hardiness_min");
    }
    if (!(acclimation_rate > 0.0 && deacclimation_rate >= 0.0 && eco_deacclimation_rate > 0.0)) {
        throw Error("generator: task '" + task_id + "' rates must be positive");
    }
    if (lte_spread < 0.0 || spread_noise < 0.0 || process_noise < 0.0 || observation_noise < 0.0 ||
        gdd_jitter < 0.0) {
        throw Error("generator: task '" + task_id + "' noise scales must be nonnegative");
    }
}

Dataset generate_synthetic(const GeneratorConfig& config, int seasons_per_task) {
    if (config.tasks.size() < 2) throw Error("generate_synthetic: need at least 2 tasks");
    if (seasons_per_task < 1) throw Error("generate_synthetic: seasons_per_task must be >= 1");
    if (config.sample_interval < 1 || config.sample_jitter < 0 ||
        config.sample_jitter >= config.sample_interval) {
        throw Error("generate_synthetic: invalid LTE sampling cadence");
    }
    if (config.weather.missing_fraction < 0.0 || config.weather.missing_fraction >= 0.5) {
        throw Error("generate_synthetic: missing_fraction must lie in [0, 0.5)");
    }
    for (const auto& t : config.tasks) t.validate();
    {
        std::vector<std::string> ids;
        for (const auto& t : config.tasks) ids.push_back(t.task_id);
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
            throw Error("generate_synthetic: duplicate task ids");
        }
    }

    Dataset dataset;
    for (int s = 0; s < seasons_per_task; ++s) {
        const int start_year = config.first_year + s;
        const Date first = season_first_day(start_year);
        const std::size_t length = season_length(start_year);
        const std::uint64_t season_seed = derive_seed(config.rng_seed, static_cast<std::uint64_t>(s));

        std::mt19937_64 weather_rng(season_seed);
        const auto weather = simulate_weather(config.weather, weather_rng);
        std::vector<std::array<double, kWeatherFeatures>> observed(weather.begin(),
                                                                   weather.begin() + static_cast<long>(length));
        {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t t = 0; t < length; ++t) {
                for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
                    // Day 0 stays observed so no feature is ever fully blank.
                    if (t > 0 && u(weather_rng) < config.weather.missing_fraction) observed[t][f] = kMissing;
                }
            }
        }

        for (const auto& task : config.tasks) {
            std::mt19937_64 rng(derive_seed(season_seed, params_fingerprint(task)));
            const LatentSeason latent = simulate_task(task, weather, rng);

            SeasonSeries season;
            season.task_id = task.task_id;
            season.season_label = std::to_string(start_year) + "-" + std::to_string(start_year + 1);
            for (std::size_t t = 0; t < length; ++t) {
                DayRecord day;
                day.date = first + std::chrono::days{static_cast<long>(t)};
                day.weather = observed[t];
                season.days.push_back(day);
            }

            std::normal_distribution<double> noise(0.0, 1.0);
            std::uniform_int_distribution<int> first_sample(0, config.sample_interval - 1);
            std::uniform_int_distribution<int> gap(config.sample_interval - config.sample_jitter,
                                                   config.sample_interval + config.sample_jitter);
            for (int t = first_sample(rng); t < static_cast<int>(length); t += gap(rng)) {
                const double lte50 = latent.lte50[static_cast<std::size_t>(t)] + task.observation_noise * noise(rng);
                const double spread = std::max(0.0, task.lte_spread + task.spread_noise * noise(rng));
                season.days[static_cast<std::size_t>(t)].lte = LteTriple{lte50 + spread, lte50, lte50 - spread};
            }

            std::array<std::optional<Date>, kPhenologyEvents> events{};
            for (std::size_t e = 0; e < kPhenologyEvents; ++e) {
                if (latent.event_day[e]) events[e] = first + std::chrono::days{*latent.event_day[e]};
            }
            season = encode_phenology(events, std::move(season));
            dataset.tasks[task.task_id].push_back(std::move(season));
        }
    }
    dataset.feature_stats = compute_feature_stats(dataset);
    return dataset;
}

GeneratorConfig default_generator_config(int n_tasks, std::uint64_t rng_seed) {
    if (n_tasks < 2) throw Error("default_generator_config: need at least 2 tasks");
    GeneratorConfig config;
    config.rng_seed = rng_seed;
    std::mt19937_64 rng(derive_seed(rng_seed, 0xC0FFEE));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < n_tasks; ++i) {
        // Earliness is evenly spaced over (0, 1).
        const double early = (i + 0.5) / n_tasks;
        const double depth = 0.6 * (1.0 - early) + 0.4 * u01(rng);
        TaskParams t;
        char id[32];
        std::snprintf(id, sizeof id, "task%02d", i);
        t.task_id = id;
        t.chill_requirement = 1300.0 - 900.0 * early;
        // GDD accumulates faster as spring warms, so thresholds are spaced
        // geometrically to keep event dates roughly evenly apart.
        const double scale = 2.5 * std::exp(-2.3 * early);
        for (auto& g : t.gdd_thresholds) g *= scale;
        t.eco_deacclimation_rate = 0.06 + 0.06 * early;
        t.deacclimation_threshold = 5.0 - 2.0 * early;
        t.hardiness_max = -21.0 - 6.0 * depth;
        t.hardiness_min = -2.5 - 1.0 * u01(rng);
        t.acclimation_rate = 0.08 + 0.04 * u01(rng);
        t.lte_spread = 1.2 + 0.8 * u01(rng);
        config.tasks.push_back(t);
    }
    return config;
}

void to_json(nlohmann::json& j, const WeatherProcess& p) {
    j = {{"mean", p.mean}, {"amplitude", p.amplitude}, {"peak_day", p.peak_day},
         {"ar_coef", p.ar_coef}, {"noise_sd", p.noise_sd}};
}

void from_json(const nlohmann::json& j, WeatherProcess& p) {
    p.mean = j.value("mean", p.mean);
    p.amplitude = j.value("amplitude", p.amplitude);
    p.peak_day = j.value("peak_day", p.peak_day);
    p.ar_coef = j.value("ar_coef", p.ar_coef);
    p.noise_sd = j.value("noise_sd", p.noise_sd);
}

void to_json(nlohmann::json& j, const WeatherParams& p) {
    j = {{"air_temp", p.air_temp},         {"temp_range", p.temp_range},
         {"humidity", p.humidity},         {"humidity_range", p.humidity_range},
         {"precipitation", p.precipitation}, {"wind", p.wind},
         {"gust", p.gust},                 {"missing_fraction", p.missing_fraction}};
}

void from_json(const nlohmann::json& j, WeatherParams& p) {
    auto read = [&j](const char* key, WeatherProcess& out) {
        if (j.contains(key)) out = j.at(key).get<WeatherProcess>();
    };
    read("air_temp", p.air_temp);
    read("temp_range", p.temp_range);
    read("humidity", p.humidity);
    read("humidity_range", p.humidity_range);
    read("precipitation", p.precipitation);
    read("wind", p.wind);
    read("gust", p.gust);
    p.missing_fraction = j.value("missing_fraction", p.missing_fraction);
}

void to_json(nlohmann::json& j, const TaskParams& p) {
    j = {{"task_id", p.task_id},
         {"hardiness_min", p.hardiness_min},
         {"hardiness_max", p.hardiness_max},
         {"acclimation_rate", p.acclimation_rate},
         {"deacclimation_rate", p.deacclimation_rate},
         {"eco_deacclimation_rate", p.eco_deacclimation_rate},
         {"acclimation_threshold", p.acclimation_threshold},
         {"deacclimation_threshold", p.deacclimation_threshold},
         {"chill_requirement", p.chill_requirement},
         {"gdd_base", p.gdd_base},
         {"gdd_thresholds", p.gdd_thresholds},
         {"lte_spread", p.lte_spread},
         {"spread_noise", p.spread_noise},
         {"process_noise", p.process_noise},
         {"observation_noise", p.observation_noise},
         {"gdd_jitter", p.gdd_jitter}};
}

void from_json(const nlohmann::json& j, TaskParams& p) {
    p.task_id = j.at("task_id").get<std::string>();
    p.hardiness_min = j.value("hardiness_min", p.hardiness_min);
    p.hardiness_max = j.value("hardiness_max", p.hardiness_max);
    p.acclimation_rate = j.value("acclimation_rate", p.acclimation_rate);
    p.deacclimation_rate = j.value("deacclimation_rate", p.deacclimation_rate);
    p.eco_deacclimation_rate = j.value("eco_deacclimation_rate", p.eco_deacclimation_rate);
    p.acclimation_threshold = j.value("acclimation_threshold", p.acclimation_threshold);
    p.deacclimation_threshold = j.value("deacclimation_threshold", p.deacclimation_threshold);
    p.chill_requirement = j.value("chill_requirement", p.chill_requirement);
    p.gdd_base = j.value("gdd_base", p.gdd_base);
    if (j.contains("gdd_thresholds")) {
        p.gdd_thresholds = j.at("gdd_thresholds").get<std::array<double, kPhenologyEvents>>();
    }
    p.lte_spread = j.value("lte_spread", p.lte_spread);
    p.spread_noise = j.value("spread_noise", p.spread_noise);
    p.process_noise = j.value("process_noise", p.process_noise);
    p.observation_noise = j.value("observation_noise", p.observation_noise);
    p.gdd_jitter = j.value("gdd_jitter", p.gdd_jitter);
}

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
    j = {{"weather", c.weather},
         {"tasks", c.tasks},
         {"first_year", c.first_year},
         {"sample_interval", c.sample_interval},
         {"sample_jitter", c.sample_jitter},
         {"rng_seed", c.rng_seed}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
    if (j.contains("weather")) c.weather = j.at("weather").get<WeatherParams>();
    c.tasks = j.at("tasks").get<std::vector<TaskParams>>();
    c.first_year = j.value("first_year", c.first_year);
    c.sample_interval = j.value("sample_interval", c.sample_interval);
    c.sample_jitter = j.value("sample_jitter", c.sample_jitter);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
}

}  // namespace tal
