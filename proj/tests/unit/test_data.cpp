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
#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "tal/common.hpp"
#include "tal/data/csv_io.hpp"
#include "tal/data/generator.hpp"
#include "tal/data/preprocess.hpp"

namespace tal {
namespace {

using testing::blank_season;

SeasonSeries one_feature_series(std::vector<double> values) {
    SeasonSeries s = blank_season("t", 2010, values.size());
    for (std::size_t d = 0; d < values.size(); ++d) {
        for (std::size_t f = 0; f < kWeatherFeatures; ++f) s.days[d].weather[f] = values[d];
    }
    return s;
}

std::vector<double> feature0(const SeasonSeries& s) {
    std::vector<double> out;
    for (const auto& d : s.days) out.push_back(d.weather[0]);
    return out;
}

TEST(Calendar, SeasonLengths) {
    EXPECT_EQ(season_length(2018), 251u);  // May 2019, not leap
    EXPECT_EQ(season_length(2019), 252u);  // Feb 2020 has 29 days
    EXPECT_EQ(season_length(1999), 252u);  // 2000 is a leap year
    EXPECT_EQ(season_length(2099), 251u);  // 2100 is not
    EXPECT_EQ(format_iso_date(season_first_day(2019)), "2019-09-07");
    EXPECT_EQ(format_iso_date(season_last_day(2019)), "2020-05-15");
}

TEST(Calendar, DatesParseStrictly) {
    EXPECT_TRUE(parse_iso_date("2020-02-29"));
    EXPECT_FALSE(parse_iso_date("2019-02-29"));
    EXPECT_FALSE(parse_iso_date("2019-13-01"));
    EXPECT_FALSE(parse_iso_date("2019-1-01"));
    EXPECT_FALSE(parse_iso_date("yesterday"));
    EXPECT_EQ(dormant_start_year(make_date(2020, 1, 10)), 2019);
    EXPECT_EQ(dormant_start_year(make_date(2020, 9, 7)), 2020);
    EXPECT_EQ(dormant_start_year(make_date(2020, 5, 15)), 2019);
    EXPECT_FALSE(dormant_start_year(make_date(2020, 7, 1)));
}

TEST(Interpolate, Midpoint) {
    EXPECT_EQ(feature0(interpolate_weather(one_feature_series({2.0, kMissing, 4.0}))),
              (std::vector<double>{2.0, 3.0, 4.0}));
}

TEST(Interpolate, TwoInteriorGaps) {
    const auto v = feature0(interpolate_weather(one_feature_series({1.0, kMissing, kMissing, 4.0})));
    ASSERT_EQ(v.size(), 4u);
    EXPECT_NEAR(v[1], 2.0, 1e-15);
    EXPECT_NEAR(v[2], 3.0, 1e-15);
}

TEST(Interpolate, EdgesTakeNearestObserved) {
    EXPECT_EQ(feature0(interpolate_weather(one_feature_series({kMissing, 5.0}))), (std::vector<double>{5.0, 5.0}));
    EXPECT_EQ(feature0(interpolate_weather(one_feature_series({kMissing, 1.0, 3.0, kMissing, kMissing}))),
              (std::vector<double>{1.0, 1.0, 3.0, 3.0, 3.0}));
}

TEST(Interpolate, ObservedCellsUntouchedAndAllMissingRejected) {
    std::mt19937_64 rng(2);
    SeasonSeries s = blank_season("t", 2005, 60);
    const SeasonSeries original = s;
    for (auto& d : s.days) {
        if (rng() % 3 == 0) d.weather[4] = kMissing;
    }
    s.days.front().weather[4] = original.days.front().weather[4];
    const SeasonSeries filled = interpolate_weather(s);
    for (std::size_t d = 0; d < s.length(); ++d) {
        for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
            if (!std::isnan(s.days[d].weather[f])) EXPECT_EQ(filled.days[d].weather[f], s.days[d].weather[f]);
            EXPECT_FALSE(std::isnan(filled.days[d].weather[f]));
        }
    }
    EXPECT_EQ(filled.missing_weather_cells(), 0u);
    for (auto& d : s.days) d.weather[7] = kMissing;
    EXPECT_THROW(interpolate_weather(s), Error);
}

TEST(Normalize, UnitStatsAreIdentity) {
    const SeasonSeries s = blank_season("t", 2001, 20);
    EXPECT_EQ(normalize(s, FeatureStats::identity()), s);
}

TEST(Normalize, FormulaExample) {
    SeasonSeries s = one_feature_series({0.0, 10.0});
    FeatureStats stats = FeatureStats::identity();
    stats.mean[0] = 5.0;
    stats.stddev[0] = 5.0;
    const auto v = feature0(normalize(s, stats));
    EXPECT_EQ(v, (std::vector<double>{-1.0, 1.0}));
}

TEST(Normalize, ConstantFeatureIsZeroVariance) {
    Dataset data;
    SeasonSeries s = blank_season("t", 2001, 30);
    for (auto& d : s.days) d.weather[9] = 0.0;
    data.tasks["t"].push_back(s);
    data.feature_stats = compute_feature_stats(data);
    try {
        normalize(data);
        FAIL() << "expected zero variance error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("zero variance"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("precip"), std::string::npos);
    }
}

TEST(Normalize, StatsArePopulationMoments) {
    SeasonSeries s = one_feature_series({1.0, 2.0, 3.0, kMissing});
    const std::vector<const SeasonSeries*> ptrs = {&s};
    const FeatureStats stats = compute_feature_stats(ptrs);
    EXPECT_DOUBLE_EQ(stats.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(stats.stddev[0], std::sqrt(2.0 / 3.0));
    const Dataset data = testing::small_dataset(3, 2, 5);
    const FeatureStats after = compute_feature_stats(data);
    for (std::size_t f = 0; f < kWeatherFeatures; ++f) {
        EXPECT_NEAR(after.mean[f], 0.0, 1e-12);
        EXPECT_NEAR(after.stddev[f], 1.0, 1e-12);
    }
}

TEST(Phenology, BudbreakOnDay200) {
    SeasonSeries s = blank_season("t", 2018, 251);
    std::array<std::optional<Date>, kPhenologyEvents> events{};
    events[2] = s.days[200].date;
    const SeasonSeries e = encode_phenology(events, s);
    for (std::size_t t = 0; t < 251; ++t) EXPECT_EQ(e.days[t].pheno[2], t >= 200 ? 1 : 0);
    for (std::size_t t = 0; t < 251; ++t) EXPECT_EQ(e.days[t].pheno[0], 0);
}

TEST(Phenology, EventAfterWindowAndAllOnDayOne) {
    SeasonSeries s = blank_season("t", 2018, 251);
    std::array<std::optional<Date>, kPhenologyEvents> late{};
    late[3] = make_date(2019, 5, 20);
    for (const auto& d : encode_phenology(late, s).days) EXPECT_EQ(d.pheno[3], 0);

    std::array<std::optional<Date>, kPhenologyEvents> first{};
    first.fill(s.days[0].date);
    for (const auto& d : encode_phenology(first, s).days) {
        for (auto flag : d.pheno) EXPECT_EQ(flag, 1);
    }
}

TEST(Phenology, OrderingIsWarnedNotEnforced) {
    SeasonSeries s = blank_season("t", 2018, 100);
    std::array<std::optional<Date>, kPhenologyEvents> events{};
    events[0] = s.days[50].date;
    events[1] = s.days[40].date;
    events[2] = s.days[60].date;
    events[3] = s.days[70].date;
    std::vector<std::string> warnings;
    const SeasonSeries e = encode_phenology(events, s, &warnings);
    EXPECT_FALSE(warnings.empty());
    EXPECT_EQ(e.days[45].pheno[1], 1);
    EXPECT_EQ(e.days[45].pheno[0], 0);
    EXPECT_EQ(e.events, events);
}

TEST(Generator, DeterministicAndSeedSensitive) {
    const GeneratorConfig c = default_generator_config(3, 11);
    EXPECT_EQ(generate_synthetic(c, 2), generate_synthetic(c, 2));
    GeneratorConfig other = c;
    other.rng_seed = 12;
    EXPECT_NE(generate_synthetic(c, 2), generate_synthetic(other, 2));
}

TEST(Generator, SamplingCadenceMatchesFieldData) {
    const Dataset data = generate_synthetic(default_generator_config(4, 3), 8);
    for (const auto& [task, seasons] : data.tasks) {
        ASSERT_EQ(seasons.size(), 8u);
        for (const auto& s : seasons) {
            EXPECT_GE(s.lte_count(), 15u) << task << " " << s.season_label;
            EXPECT_LE(s.lte_count(), 22u) << task << " " << s.season_label;
            EXPECT_TRUE(s.has_all_events());
            EXPECT_TRUE(s.length() == 251 || s.length() == 252);
            for (const auto& d : s.days) {
                if (d.lte) {
                    EXPECT_GE(d.lte->lte10, d.lte->lte50);
                    EXPECT_GE(d.lte->lte50, d.lte->lte90);
                }
            }
        }
    }
}

TEST(Generator, DuplicateParamsGiveIdenticalLabels) {
    GeneratorConfig c = default_generator_config(2, 8);
    c.tasks[1] = c.tasks[0];
    c.tasks[1].task_id = "clone";
    const Dataset data = generate_synthetic(c, 3);
    const auto& a = data.seasons(c.tasks[0].task_id);
    const auto& b = data.seasons("clone");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].events, b[i].events);
        for (std::size_t d = 0; d < a[i].length(); ++d) {
            EXPECT_EQ(a[i].days[d].lte, b[i].days[d].lte);
            EXPECT_EQ(a[i].days[d].pheno, b[i].days[d].pheno);
        }
    }
}

TEST(Generator, ConfigJsonRoundTrip) {
    const GeneratorConfig c = default_generator_config(3, 4);
    const GeneratorConfig back = nlohmann::json(c).get<GeneratorConfig>();
    EXPECT_EQ(generate_synthetic(c, 1), generate_synthetic(back, 1));
    GeneratorConfig bad = c;
    bad.tasks[0].gdd_thresholds = {10, 5, 20, 30};
    EXPECT_THROW(generate_synthetic(bad, 1), Error);
}

// ---------------------------------------------------------------- CSV

SeasonSeries csv_season(const std::string& task, int year, std::size_t lte_samples, bool events,
                        double missing_fraction, std::mt19937_64& rng) {
    SeasonSeries s = blank_season(task, year, season_length(year));
    for (std::size_t i = 0; i < lte_samples; ++i) {
        const std::size_t d = 5 + i * (s.length() - 10) / std::max<std::size_t>(lte_samples, 1);
        s.days[d].lte = LteTriple{-5.0 - 0.01 * static_cast<double>(i), -7.0, -9.5};
    }
    if (events) {
        for (std::size_t e = 0; e < kPhenologyEvents; ++e) s.events[e] = s.days[200 + 5 * e].date;
    }
    const std::size_t cells = s.length() * kWeatherFeatures;
    const auto to_blank = static_cast<std::size_t>(std::round(missing_fraction * static_cast<double>(cells)));
    std::vector<std::size_t> idx(cells);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < to_blank; ++i) s.days[idx[i] / kWeatherFeatures].weather[idx[i] % kWeatherFeatures] = kMissing;
    return encode_phenology(s.events, s);
}

std::string to_csv(const std::vector<SeasonSeries>& seasons) {
    Dataset d;
    for (const auto& s : seasons) d.tasks[s.task_id].push_back(s);
    std::ostringstream out;
    write_csv(d, out);
    return out.str();
}

CsvLoadResult parse(const std::string& text, const CsvLoadOptions& options = {}) {
    std::istringstream in(text);
    return read_csv(in, options);
}

TEST(Csv, SingleValidSeason) {
    std::mt19937_64 rng(1);
    const auto r = parse(to_csv({csv_season("barbera", 2012, 5, true, 0.02, rng)}));
    ASSERT_EQ(r.dataset.tasks.size(), 1u);
    ASSERT_EQ(r.dataset.seasons("barbera").size(), 1u);
    EXPECT_EQ(r.dataset.seasons("barbera")[0].lte_count(), 5u);
}

TEST(Csv, TooMuchMissingWeatherDropsSeason) {
    std::mt19937_64 rng(2);
    const auto r = parse(to_csv({csv_season("barbera", 2012, 5, true, 0.12, rng)}));
    EXPECT_TRUE(r.dataset.tasks.empty());
    ASSERT_FALSE(r.log.empty());
    EXPECT_NE(r.log.back().find("missing"), std::string::npos);
}

TEST(Csv, RetentionRulesMirrorPerCultivarCounts) {
    // LTE seasons, phenology seasons, mutual seasons, LTE samples in mutual seasons.
    const std::map<std::string, std::array<int, 4>> table = {
        {"barbera", {14, 7, 7, 84}},      {"cabernet_sauvignon", {32, 16, 16, 465}},
        {"chardonnay", {25, 18, 15, 450}}, {"chenin_blanc", {17, 17, 9, 109}},
        {"grenache", {14, 16, 8, 97}},     {"malbec", {17, 16, 8, 140}},
        {"merlot", {25, 20, 17, 489}},     {"mourvedre", {12, 7, 5, 69}},
        {"nebbiolo", {14, 7, 7, 85}},      {"pinot_gris", {17, 16, 9, 111}},
        {"riesling", {32, 18, 18, 408}},   {"sangiovese", {15, 7, 7, 86}},
        {"sauvignon_blanc", {12, 7, 7, 87}}, {"semillon", {13, 16, 7, 119}},
        {"syrah", {22, 4, 4, 106}},        {"viognier", {17, 8, 5, 62}},
        {"zinfandel", {14, 17, 8, 94}}};
    std::mt19937_64 rng(3);
    std::vector<SeasonSeries> seasons;
    for (const auto& [task, row] : table) {
        const auto [lte_seasons, pheno_seasons, mutual, samples] = row;
        int year = 1988;
        for (int i = 0; i < mutual; ++i) {
            const int n = samples / mutual + (i < samples % mutual ? 1 : 0);
            seasons.push_back(csv_season(task, year++, static_cast<std::size_t>(n), true, 0.0, rng));
        }
        for (int i = mutual; i < lte_seasons; ++i) seasons.push_back(csv_season(task, year++, 10, false, 0.0, rng));
        for (int i = mutual; i < pheno_seasons; ++i) seasons.push_back(csv_season(task, year++, 0, true, 0.0, rng));
    }
    const auto r = parse(to_csv(seasons));
    ASSERT_EQ(r.dataset.tasks.size(), 17u);
    for (const auto& [task, row] : table) {
        const auto& kept = r.dataset.seasons(task);
        EXPECT_EQ(static_cast<int>(kept.size()), row[2]) << task;
        std::size_t lte = 0;
        for (const auto& s : kept) lte += s.lte_count();
        EXPECT_EQ(static_cast<int>(lte), row[3]) << task;
    }
}

TEST(Csv, PhenologyOnlyTargetsCanBeKept) {
    std::mt19937_64 rng(4);
    const std::string text = to_csv({csv_season("target", 2015, 0, true, 0.0, rng)});
    EXPECT_TRUE(parse(text).dataset.tasks.empty());
    CsvLoadOptions options;
    options.require_lte = false;
    EXPECT_EQ(parse(text, options).dataset.seasons("target").size(), 1u);
}

TEST(Csv, RoundTripIsIdentity) {
    const Dataset original = generate_synthetic(default_generator_config(3, 21), 2);
    std::ostringstream first;
    write_csv(original, first);
    const Dataset back = parse(first.str()).dataset;
    EXPECT_EQ(back.tasks, original.tasks);
    std::ostringstream second;
    write_csv(back, second);
    EXPECT_EQ(second.str(), first.str());
    EXPECT_EQ(dataset_fingerprint(back), dataset_fingerprint(original));
}

TEST(Csv, PartialTripleIsMaskedAndLogged) {
    std::mt19937_64 rng(5);
    std::string text = to_csv({csv_season("t", 2012, 3, true, 0.0, rng)});
    // Blank the lte90 cell of the first sampled row.
    const auto pos = text.find(",-5,-7,-9.5,");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 12, ",-5,-7,,");
    const auto r = parse(text);
    EXPECT_EQ(r.dataset.seasons("t")[0].lte_count(), 2u);
    bool logged = false;
    for (const auto& l : r.log) logged = logged || l.find("partial LTE") != std::string::npos;
    EXPECT_TRUE(logged);
}

TEST(Csv, MalformedRowsNameTheirLine) {
    std::mt19937_64 rng(6);
    std::string text = to_csv({csv_season("t", 2012, 3, true, 0.0, rng)});
    text += "t,2012-2013,2013-01-01,abc,1,1,1,1,1,1,1,1,1,1,1,,,,,,,\n";
    try {
        parse(text);
        FAIL() << "expected a parse error";
    } catch (const Error& e) {
        const std::size_t lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
        EXPECT_NE(std::string(e.what()).find("line " + std::to_string(lines)), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse("task_id,season\n"), Error);
    EXPECT_THROW(parse(""), Error);
}

TEST(Csv, UnknownTasksRejectedOnRequest) {
    std::mt19937_64 rng(7);
    const std::string text = to_csv({csv_season("mystery", 2012, 3, true, 0.0, rng)});
    CsvLoadOptions options;
    options.known_tasks = std::set<std::string>{"riesling"};
    EXPECT_THROW(parse(text, options), Error);
}

TEST(Csv, RowsOutsideWindowIgnored) {
    std::mt19937_64 rng(8);
    std::string text = to_csv({csv_season("t", 2012, 3, true, 0.0, rng)});
    text += "t,2012-2013,2013-07-01,1,1,1,1,1,1,1,1,1,1,1,1,,,,2013-03-26,2013-03-31,2013-04-05,2013-04-10\n";
    const auto r = parse(text);
    ASSERT_EQ(r.dataset.seasons("t").size(), 1u);
    EXPECT_EQ(r.dataset.seasons("t")[0].length(), season_length(2012));
}

TEST(StripLte, RemovesEveryLabel) {
    const Dataset data = generate_synthetic(default_generator_config(2, 1), 1);
    const SeasonSeries s = data.tasks.begin()->second[0];
    ASSERT_GT(s.lte_count(), 0u);
    const SeasonSeries t = strip_lte(s);
    EXPECT_EQ(t.lte_count(), 0u);
    EXPECT_EQ(t.events, s.events);
    for (std::size_t d = 0; d < s.length(); ++d) EXPECT_EQ(t.days[d].pheno, s.days[d].pheno);
}

}  // namespace
}  // namespace tal
