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

#include "tal/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "tal/common.hpp"
#include "tal/data/csv_io.hpp"
#include "tal/data/preprocess.hpp"
#include "tal/harness/report.hpp"
#include "tal/transfer/tal.hpp"

namespace tal {

void ExperimentConfig::validate() const {
    if (trials < 1) throw Error("ExperimentConfig: trials must be >= 1");
    if (holdout_per_task < 1) throw Error("ExperimentConfig: holdout_per_task must be >= 1");
    if (methods.empty() && !supervised_bound) throw Error("ExperimentConfig: no methods to evaluate");
    train.validate();
    for (const auto& m : methods) m.validate();
    std::set<std::string> labels;
    for (const auto& m : methods) {
        if (!labels.insert(m.label()).second) throw Error("ExperimentConfig: duplicate method label '" + m.label() + "'");
    }
    if (dataset.csv_path.empty() && !dataset.generator && dataset.synthetic_tasks < 3) {
        throw Error("ExperimentConfig: synthetic benchmark needs at least 3 tasks");
    }
    if (dataset.seasons_per_task < 1) throw Error("ExperimentConfig: seasons_per_task must be >= 1");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    nlohmann::json ds;
    if (!c.dataset.csv_path.empty()) {
        ds["csv"] = c.dataset.csv_path;
    } else if (c.dataset.generator) {
        ds["generator"] = *c.dataset.generator;
        ds["seasons_per_task"] = c.dataset.seasons_per_task;
    } else {
        ds["synthetic_tasks"] = c.dataset.synthetic_tasks;
        ds["seasons_per_task"] = c.dataset.seasons_per_task;
    }
    j = {{"dataset", ds},
         {"trials", c.trials},
         {"holdout_per_task", c.holdout_per_task},
         {"train", c.train},
         {"methods", c.methods},
         {"supervised_bound", c.supervised_bound},
         {"targets", c.targets},
         {"output_dir", c.output_dir},
         {"master_seed", c.master_seed}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    const ExperimentConfig d;
    if (j.contains("dataset")) {
        const auto& ds = j.at("dataset");
        c.dataset.csv_path = ds.value("csv", std::string{});
        if (ds.contains("generator")) c.dataset.generator = ds.at("generator").get<GeneratorConfig>();
        c.dataset.synthetic_tasks = ds.value("synthetic_tasks", d.dataset.synthetic_tasks);
        c.dataset.seasons_per_task = ds.value("seasons_per_task", d.dataset.seasons_per_task);
    }
    c.trials = j.value("trials", d.trials);
    c.holdout_per_task = j.value("holdout_per_task", d.holdout_per_task);
    c.train = j.contains("train") ? j.at("train").get<TrainConfig>() : d.train;
    c.methods = j.contains("methods") ? j.at("methods").get<std::vector<TalConfig>>() : default_methods();
    c.supervised_bound = j.value("supervised_bound", d.supervised_bound);
    c.targets = j.value("targets", d.targets);
    c.output_dir = j.value("output_dir", d.output_dir);
    c.master_seed = j.value("master_seed", d.master_seed);
    c.validate();
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open experiment config '" + path + "'");
    try {
        return nlohmann::json::parse(in).get<ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("experiment config '" + path + "': " + e.what());
    }
}

std::vector<TalConfig> default_methods() {
    std::vector<TalConfig> m(7);
    m[0].weighting = Weighting::Uniform;
    m[1].weighting = Weighting::Exponential;
    m[2].weighting = Weighting::Uniform;
    m[2].task_set = TaskSetSpec::parse("S+CR");
    m[3].weighting = Weighting::Exponential;
    m[3].task_set = TaskSetSpec::parse("S+CR");
    m[4].scheme = Scheme::BestSource;
    m[5].scheme = Scheme::OptEmbedding;
    m[6].scheme = Scheme::OptEmbedding;
    m[6].opt.objective = EmbeddingObjective::Lte;
    return m;
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
    if (!config.dataset.csv_path.empty()) return load_csv(config.dataset.csv_path).dataset;
    if (config.dataset.generator) return generate_synthetic(*config.dataset.generator, config.dataset.seasons_per_task);
    const GeneratorConfig g =
        default_generator_config(config.dataset.synthetic_tasks, derive_seed(config.master_seed, 0xDA7A));
    return generate_synthetic(g, config.dataset.seasons_per_task);
}

std::size_t LeakageAudit::leaked_lte_values() const {
    std::size_t leaked = 0;
    for (const auto& r : records) {
        const std::set<SeasonKey> held(r.held_out.begin(), r.held_out.end());
        for (std::size_t k = 0; k < r.training.size(); ++k) {
            if (held.contains(r.training[k])) leaked += r.training_lte[k];
        }
        for (const auto& [method, keys] : r.method_inputs) {
            const auto& counts = r.method_input_lte.at(method);
            for (std::size_t k = 0; k < keys.size(); ++k) {
                if (held.contains(keys[k])) leaked += counts[k];
            }
        }
    }
    return leaked;
}

std::size_t ExperimentReport::method_index(const std::string& label) const {
    const auto it = std::find(methods.begin(), methods.end(), label);
    if (it == methods.end()) throw Error("report has no method column '" + label + "'");
    return static_cast<std::size_t>(it - methods.begin());
}

namespace {

using SeasonPtrs = std::vector<const SeasonSeries*>;

std::string column_label(const TalConfig& method) {
    std::string label = method.label();
    const bool oracle = method.scheme == Scheme::OptEmbedding && method.opt.objective == EmbeddingObjective::Lte;
    if (oracle && !label.ends_with("*")) label += "*";
    return label;
}

SeasonPtrs pointers(const std::vector<SeasonSeries>& seasons) {
    SeasonPtrs out;
    for (const auto& s : seasons) out.push_back(&s);
    return out;
}

std::vector<SeasonKey> keys_of(const std::vector<SeasonSeries>& seasons) {
    std::vector<SeasonKey> out;
    for (const auto& s : seasons) out.push_back({s.task_id, s.season_label});
    return out;
}

std::vector<std::size_t> lte_counts(const std::vector<SeasonSeries>& seasons) {
    std::vector<std::size_t> out;
    for (const auto& s : seasons) out.push_back(s.lte_count());
    return out;
}

struct Split {
    std::map<std::string, std::vector<SeasonSeries>> train;
    std::map<std::string, std::vector<SeasonSeries>> test;
};

Split split_holdout(const Dataset& data, int holdout, std::uint64_t seed) {
    Split split;
    std::mt19937_64 rng(seed);
    for (const auto& [task, seasons] : data.tasks) {
        if (static_cast<int>(seasons.size()) <= holdout) {
            throw Error("run_loco: task '" + task + "' has " + std::to_string(seasons.size()) +
                        " seasons; holding out " + std::to_string(holdout) + " leaves none for training");
        }
        std::vector<std::size_t> order(seasons.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<bool> is_test(seasons.size(), false);
        for (int k = 0; k < holdout; ++k) is_test[order[k]] = true;
        for (std::size_t k = 0; k < seasons.size(); ++k) {
            (is_test[k] ? split.test : split.train)[task].push_back(seasons[k]);
        }
    }
    return split;
}

std::vector<SeasonSeries> normalized(const std::vector<SeasonSeries>& seasons, const FeatureStats& stats) {
    std::vector<SeasonSeries> out;
    for (const auto& s : seasons) out.push_back(normalize(s, stats));
    return out;
}

std::vector<SeasonSeries> stripped(const std::vector<SeasonSeries>& seasons) {
    std::vector<SeasonSeries> out;
    for (const auto& s : seasons) out.push_back(strip_lte(s));
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentReport run_loco(const ExperimentConfig& config, const ProgressFn& progress) {
    config.validate();
    const Dataset raw = load_experiment_dataset(config);
    if (raw.tasks.size() < 3) throw Error("run_loco: need at least 3 tasks, dataset has " + std::to_string(raw.tasks.size()));
    const Dataset data = interpolate_weather(raw);
    const std::vector<std::string> all_tasks = data.task_ids();
    std::vector<std::string> targets = config.targets.empty() ? all_tasks : config.targets;
    for (const auto& t : targets) {
        if (!data.tasks.contains(t)) throw Error("run_loco: unknown target task '" + t + "'");
    }

    ExperimentReport report;
    report.targets = targets;
    for (const auto& m : config.methods) report.methods.push_back(column_label(m));
    if (config.supervised_bound) report.methods.push_back("Supervised*");
    const std::size_t n_methods = report.methods.size();
    std::vector<std::vector<double>> sums(targets.size(), std::vector<double>(n_methods, 0.0));
    report.evaluations.assign(n_methods, 0);

    nlohmann::json runs = nlohmann::json::array();
    bool shared_models = true;
    for (int trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t trial_seed = derive_seed(config.master_seed, 1000 + static_cast<std::uint64_t>(trial));
        const Split split = split_holdout(data, config.holdout_per_task, trial_seed);
        std::vector<SeasonKey> held_out;
        for (const auto& [task, seasons] : split.test) {
            const auto keys = keys_of(seasons);
            held_out.insert(held_out.end(), keys.begin(), keys.end());
        }

        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            const std::string& target = targets[ti];
            const std::uint64_t pair_seed = derive_seed(trial_seed, std::find(all_tasks.begin(), all_tasks.end(), target) - all_tasks.begin());
            const auto t0 = std::chrono::steady_clock::now();
            std::vector<std::string> sources;
            for (const auto& t : all_tasks) {
                if (t != target) sources.push_back(t);
            }

            Dataset training;
            for (const auto& s : sources) training.tasks[s] = split.train.at(s);
            training.feature_stats = compute_feature_stats(training);
            training = normalize(std::move(training));

            TrainConfig tc = config.train;
            tc.rng_seed = derive_seed(pair_seed, 1);
            const TrainResult trained = train(training, sources, tc);
            const std::string fingerprint = trained.model.fingerprint();

            const auto target_train = normalized(split.train.at(target), training.feature_stats);
            const auto target_aux = stripped(target_train);
            const auto target_test = normalized(split.test.at(target), training.feature_stats);
            const SeasonPtrs aux_ptrs = pointers(target_aux);
            const SeasonPtrs lte_ptrs = pointers(target_train);
            const SeasonPtrs test_ptrs = pointers(target_test);

            AuditRecord audit;
            audit.trial = trial;
            audit.target = target;
            audit.held_out = held_out;
            for (const auto& s : sources) {
                const auto keys = keys_of(training.tasks.at(s));
                const auto counts = lte_counts(training.tasks.at(s));
                audit.training.insert(audit.training.end(), keys.begin(), keys.end());
                audit.training_lte.insert(audit.training_lte.end(), counts.begin(), counts.end());
            }

            nlohmann::json run = {{"trial", trial}, {"target", target}, {"model_fingerprint", fingerprint},
                                  {"train_seed", tc.rng_seed}, {"methods", nlohmann::json::object()}};
            for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                TalConfig method = config.methods[mi];
                method.rng_seed = derive_seed(pair_seed, 100 + method.rng_seed);
                const bool uses_lte =
                    method.scheme == Scheme::OptEmbedding && method.opt.objective == EmbeddingObjective::Lte;
                const std::vector<SeasonSeries>& inputs = uses_lte ? target_train : target_aux;
                TalRun result;
                try {
                    result = run_tal(trained.model, uses_lte ? lte_ptrs : aux_ptrs, method);
                } catch (const Error& e) {
                    throw Error("run_loco: trial " + std::to_string(trial) + ", target '" + target + "', method '" +
                                report.methods[mi] + "': " + e.what());
                }
                shared_models = shared_models && result.model_fingerprint == fingerprint;
                const double rmse = eval_rmse(predict_lte(trained.model, result, test_ptrs), test_ptrs);
                sums[ti][mi] += rmse;
                report.evaluations[mi] += result.evaluations;
                audit.method_inputs[report.methods[mi]] = keys_of(inputs);
                audit.method_input_lte[report.methods[mi]] = lte_counts(inputs);
                run["methods"][report.methods[mi]] = {{"rmse", rmse}, {"manifest", manifest(result)}};
            }

            if (config.supervised_bound) {
                Dataset with_target = training;
                with_target.tasks[target] = target_train;
                std::vector<std::string> roster = sources;
                roster.push_back(target);
                TrainConfig sc = config.train;
                sc.rng_seed = derive_seed(pair_seed, 2);
                const TrainResult bound = train(with_target, roster, sc);
                const double rmse = eval_rmse(bound.model, TaskHandle::source(roster.size() - 1), test_ptrs);
                sums[ti][n_methods - 1] += rmse;
                report.evaluations[n_methods - 1] += 1;
                run["methods"]["Supervised*"] = {{"rmse", rmse}, {"model_fingerprint", bound.model.fingerprint()}};
            }
            runs.push_back(std::move(run));
            report.audit.records.push_back(std::move(audit));
            if (progress) {
                progress("trial " + std::to_string(trial) + " target " + target + " done in " +
                         std::to_string(static_cast<int>(seconds_since(t0))) + " s");
            }
        }
    }

    report.rmse = sums;
    for (auto& row : report.rmse) {
        for (double& v : row) v /= static_cast<double>(config.trials);
    }
    report.mean.assign(n_methods, 0.0);
    for (std::size_t m = 0; m < n_methods; ++m) {
        for (const auto& row : report.rmse) report.mean[m] += row[m];
        report.mean[m] /= static_cast<double>(report.rmse.size());
    }
    report.metadata = {{"config", config},
                       {"master_seed", config.master_seed},
                       {"dataset_fingerprint", dataset_fingerprint(raw)},
                       {"train_fingerprint", config.train.fingerprint()},
                       {"methods_share_model", shared_models},
                       {"leaked_lte_values", report.audit.leaked_lte_values()},
                       {"runs", runs}};
    if (!config.output_dir.empty()) write_report(report, config.output_dir);
    return report;
}

}  // namespace tal
