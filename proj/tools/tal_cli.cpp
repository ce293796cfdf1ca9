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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tal/common.hpp"
#include "tal/data/csv_io.hpp"
#include "tal/data/generator.hpp"
#include "tal/data/preprocess.hpp"
#include "tal/harness/experiment.hpp"
#include "tal/harness/plot.hpp"
#include "tal/harness/report.hpp"
#include "tal/harness/sweep.hpp"
#include "tal/models/bundle.hpp"
#include "tal/numerics/gradcheck.hpp"
#include "tal/training/trainer.hpp"
#include "tal/transfer/tal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tal::Error("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw tal::Error("config '" + path + "': " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tal::Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw tal::Error("write to '" + path.string() + "' failed");
}

fs::path make_run_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void print_log(const std::vector<std::string>& log) {
    for (const auto& line : log) std::cerr << "note: " << line << '\n';
}

std::vector<const tal::SeasonSeries*> pointers(const std::vector<tal::SeasonSeries>& seasons) {
    std::vector<const tal::SeasonSeries*> out;
    for (const auto& s : seasons) out.push_back(&s);
    return out;
}

std::vector<tal::SeasonSeries> all_seasons(const tal::Dataset& data) {
    std::vector<tal::SeasonSeries> out;
    for (const auto& [_, seasons] : data.tasks) out.insert(out.end(), seasons.begin(), seasons.end());
    return out;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string config;
    int tasks = 6;
    int seasons = 8;
    std::uint64_t seed = 0;
    std::string out;
    std::string dump_config;
};

int run_generate(const GenerateArgs& a) {
    tal::GeneratorConfig config = a.config.empty() ? tal::default_generator_config(a.tasks, a.seed)
                                                   : read_json_file(a.config).get<tal::GeneratorConfig>();
    const tal::Dataset data = tal::generate_synthetic(config, a.seasons);
    tal::save_csv(data, a.out);
    if (!a.dump_config.empty()) write_text(a.dump_config, json(config).dump(2) + "\n");
    std::cout << "wrote " << data.season_count() << " seasons of " << data.tasks.size() << " tasks to " << a.out
              << '\n';
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string config;
    std::vector<std::string> tasks;
    std::string out_dir;
    bool quiet = false;
};

int run_train(const TrainArgs& a) {
    const tal::TrainConfig config = a.config.empty() ? tal::TrainConfig{} : read_json_file(a.config).get<tal::TrainConfig>();
    const tal::CsvLoadResult loaded = tal::load_csv(a.data);
    print_log(loaded.log);
    tal::Dataset data = tal::interpolate_weather(loaded.dataset);
    const std::vector<std::string> tasks = a.tasks.empty() ? data.task_ids() : a.tasks;
    tal::Dataset training;
    for (const auto& t : tasks) {
        if (!data.tasks.contains(t)) throw tal::Error("task '" + t + "' not found in " + a.data);
        training.tasks[t] = data.tasks.at(t);
    }
    training.feature_stats = tal::compute_feature_stats(training);
    training = tal::normalize(std::move(training));

    const fs::path dir = make_run_dir(a.out_dir);
    const tal::TrainResult result = tal::train(training, tasks, config, [&](const tal::EpochLog& e) {
        if (!a.quiet) {
            std::printf("epoch %3d  joint %.5f  lte_mse %.5f  pheno_bce %.5f\n", e.epoch, e.joint, e.lte_mse,
                        e.pheno_bce);
        }
    });
    tal::save_bundle(result.model, (dir / "model.bin").string());
    std::ostringstream log;
    tal::write_training_log(result.log, log);
    write_text(dir / "train_log.csv", log.str());
    const json manifest = {{"command", "train"},
                           {"config", config},
                           {"tasks", tasks},
                           {"data", a.data},
                           {"dataset_fingerprint", tal::dataset_fingerprint(loaded.dataset)},
                           {"model_fingerprint", result.model.fingerprint()},
                           {"training_fingerprint", result.model.training_fingerprint},
                           {"final_epoch", result.log.empty() ? json() : json{{"joint", result.log.back().joint},
                                                                              {"lte_mse", result.log.back().lte_mse},
                                                                              {"pheno_bce", result.log.back().pheno_bce}}}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "model written to " << (dir / "model.bin").string() << '\n';
    return 0;
}

// ---------------------------------------------------------------- transfer

struct TransferArgs {
    std::string model;
    std::string target;
    std::string config;
    std::string predict;
    std::string out_dir;
};

std::vector<tal::SeasonSeries> load_prepared(const std::string& path, const tal::FeatureStats& stats) {
    tal::CsvLoadOptions options;
    options.require_lte = false;
    const tal::CsvLoadResult loaded = tal::load_csv(path, options);
    print_log(loaded.log);
    std::vector<tal::SeasonSeries> out;
    for (auto& s : all_seasons(tal::interpolate_weather(loaded.dataset))) out.push_back(tal::normalize(std::move(s), stats));
    if (out.empty()) throw tal::Error("no usable season in " + path);
    return out;
}

int run_transfer(const TransferArgs& a) {
    const tal::ModelParams model = tal::load_bundle(a.model);
    const tal::TalConfig config = a.config.empty() ? tal::TalConfig{} : read_json_file(a.config).get<tal::TalConfig>();
    const auto target = load_prepared(a.target, model.feature_stats);
    const bool uses_lte = config.scheme == tal::Scheme::OptEmbedding && config.opt.objective == tal::EmbeddingObjective::Lte;
    std::vector<tal::SeasonSeries> inputs;
    for (const auto& s : target) inputs.push_back(uses_lte ? s : tal::strip_lte(s));
    const auto input_ptrs = pointers(inputs);
    const tal::TalRun run = tal::run_tal(model, input_ptrs, config);

    const auto eval = a.predict.empty() ? target : load_prepared(a.predict, model.feature_stats);
    const auto eval_ptrs = pointers(eval);
    const std::vector<tal::Tensor> lte = tal::predict_lte(model, run, eval_ptrs);

    const fs::path dir = make_run_dir(a.out_dir);
    std::ostringstream csv;
    csv << "task_id,season,date,lte10,lte50,lte90\n";
    for (std::size_t k = 0; k < eval.size(); ++k) {
        for (std::size_t d = 0; d < eval[k].length(); ++d) {
            csv << eval[k].task_id << ',' << eval[k].season_label << ',' << tal::format_iso_date(eval[k].days[d].date);
            for (std::size_t c = 0; c < tal::kLteChannels; ++c) csv << ',' << tal::format_double(lte[k](d, c));
            csv << '\n';
        }
    }
    write_text(dir / "predictions.csv", csv.str());
    json m = tal::manifest(run);
    m["command"] = "transfer";
    m["model"] = a.model;
    m["target"] = a.target;
    m["predict"] = a.predict.empty() ? a.target : a.predict;
    write_text(dir / "manifest.json", m.dump(2) + "\n");

    std::cout << config.label() << ": " << run.task_set.size() << " entries";
    if (run.chosen) std::cout << ", chose " << run.task_set.entries[*run.chosen].label;
    std::cout << "\npredictions written to " << (dir / "predictions.csv").string() << '\n';
    return 0;
}

// ---------------------------------------------------------------- evaluate / sweep

struct EvaluateArgs {
    std::string config;
    std::string out_dir;
    bool has_seed = false;
    std::uint64_t seed = 0;
    bool quiet = false;
};

tal::ExperimentConfig experiment_config(const EvaluateArgs& a) {
    tal::ExperimentConfig config = tal::load_experiment_config(a.config);
    if (!a.out_dir.empty()) config.output_dir = a.out_dir;
    if (a.has_seed) config.master_seed = a.seed;
    if (config.output_dir.empty()) throw tal::Error("no output directory: set output_dir or pass --out-dir");
    return config;
}

tal::ProgressFn progress_printer(bool quiet) {
    if (quiet) return {};
    return [](const std::string& line) { std::cerr << line << '\n'; };
}

int run_evaluate(const EvaluateArgs& a) {
    const tal::ExperimentConfig config = experiment_config(a);
    const tal::ExperimentReport report = tal::run_loco(config, progress_printer(a.quiet));
    std::cout << tal::report_table(report);
    std::cout << "report written to " << config.output_dir << '\n';
    const std::size_t leaked = report.audit.leaked_lte_values();
    if (leaked != 0) {
        std::cerr << "error: holdout audit found " << leaked << " reachable held-out LTE values\n";
        return 3;
    }
    return 0;
}

struct SweepArgs {
    EvaluateArgs eval;
    std::string axis;
    std::vector<std::string> values;
};

int run_sweep(const SweepArgs& a) {
    const tal::ExperimentConfig config = experiment_config(a.eval);
    const tal::SweepResult result = tal::sweep(config, tal::parse_sweep_axis(a.axis), a.values, progress_printer(a.eval.quiet));
    std::cout << tal::report_table(result.combined);
    std::cout << "\naxis " << tal::to_string(result.axis) << '\n';
    for (std::size_t i = 0; i < result.values.size(); ++i) {
        std::printf("  %-10s %-22s mean %.3f\n", result.values[i].c_str(), result.labels[i].c_str(),
                    result.reports[i].mean.front());
    }
    return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
    std::string variant = "both";
    int seeds = 5;
    std::size_t hidden1 = 8;
    std::size_t hidden2 = 16;
    std::size_t days = 20;
    double h = 1e-5;
    double floor = 1e-6;
    double tolerance = 1e-4;
};

int run_gradcheck(const GradcheckArgs& a) {
    std::vector<tal::ModelVariant> variants;
    if (a.variant == "both") {
        variants = {tal::ModelVariant::MultiHead, tal::ModelVariant::Embedding};
    } else {
        variants = {tal::parse_model_variant(a.variant)};
    }
    double worst = 0.0;
    for (const auto variant : variants) {
        for (int seed = 0; seed < a.seeds; ++seed) {
            const tal::GradcheckCase c =
                tal::make_gradcheck_case(variant, static_cast<std::uint64_t>(seed), {a.hidden1, a.hidden2}, a.days);
            tal::GradcheckOptions options;
            options.h = a.h;
            options.floor = a.floor;
            const tal::GradcheckResult r = tal::gradcheck(c.model, c.batch(), options);
            std::printf("%-10s seed %d  checked %zu  skipped %zu  max rel err %.3e  max abs err %.1e  (%s[%zu])\n",
                        tal::to_string(variant).c_str(), seed, r.checked, r.skipped, r.max_relative_error, r.max_absolute_error,
                        r.worst_parameter.c_str(), r.worst_index);
            worst = std::max(worst, r.max_relative_error);
        }
    }
    std::printf("worst relative error %.3e (tolerance %.1e)\n", worst, a.tolerance);
    if (worst >= a.tolerance) {
        std::cerr << "error: gradient check failed\n";
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
    std::string model;
    std::string data;
    std::string task;
    std::string season;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int run_plot(const PlotArgs& a) {
    const tal::ModelParams model = tal::load_bundle(a.model);
    const auto seasons = load_prepared(a.data, model.feature_stats);
    const tal::SeasonSeries* chosen = nullptr;
    for (const auto& s : seasons) {
        if ((a.task.empty() || s.task_id == a.task) && (a.season.empty() || s.season_label == a.season)) {
            chosen = &s;
            break;
        }
    }
    if (chosen == nullptr) throw tal::Error("no season matches task '" + a.task + "' and season '" + a.season + "'");

    std::vector<std::string> names = a.sets;
    if (names.empty()) {
        names = {"S"};
        if (model.variant == tal::ModelVariant::Embedding) names.insert(names.end(), {"CR", "LR-3", "LR-all"});
    }
    std::vector<std::pair<std::string, tal::TaskSet>> sets;
    for (const auto& name : names) {
        tal::TalConfig config;
        config.task_set = tal::TaskSetSpec::parse(name);
        config.rng_seed = a.seed;
        sets.emplace_back(name, tal::build_task_set(model, config));
    }
    make_run_dir(a.out_dir);
    for (const auto& path : tal::emit_plots(model, sets, *chosen, a.out_dir)) std::cout << "wrote " << path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    tal::tune_allocator();
    CLI::App app{"Cold-hardiness transfer via auxiliary labels"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    generate->add_option("--config", gen.config, "Generator config (JSON); defaults to the built-in benchmark")
        ->check(CLI::ExistingFile);
    generate->add_option("--tasks", gen.tasks, "Number of default tasks when no config is given")->check(CLI::Range(1, 1000));
    generate->add_option("--seasons", gen.seasons, "Seasons per task")->check(CLI::Range(1, 1000));
    generate->add_option("--seed", gen.seed, "Seed of the default generator config");
    generate->add_option("--out", gen.out, "Output CSV")->required();
    generate->add_option("--dump-config", gen.dump_config, "Also write the generator config used (JSON)");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train a multi-task model bundle");
    train->add_option("--data", tr.data, "Season CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--config", tr.config, "Training config (JSON)")->check(CLI::ExistingFile);
    train->add_option("--tasks", tr.tasks, "Source tasks (default: every task)")->delimiter(',');
    train->add_option("--out-dir", tr.out_dir, "Run directory")->required();
    train->add_flag("--quiet", tr.quiet, "Do not print per-epoch losses");

    TransferArgs tf;
    auto* transfer = app.add_subcommand("transfer", "Predict LTE for a target task from its phenology");
    transfer->add_option("--model", tf.model, "Model bundle")->required()->check(CLI::ExistingFile);
    transfer->add_option("--target", tf.target, "Target CSV (LTE columns may be empty)")->required()->check(CLI::ExistingFile);
    transfer->add_option("--config", tf.config, "Transfer config (JSON)")->check(CLI::ExistingFile);
    transfer->add_option("--predict", tf.predict, "Seasons to predict (default: the target seasons)")
        ->check(CLI::ExistingFile);
    transfer->add_option("--out-dir", tf.out_dir, "Run directory")->required();

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Run the leave-one-task-out benchmark");
    evaluate->add_option("--config", ev.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out-dir", ev.out_dir, "Override the config's output directory");
    auto* ev_seed = evaluate->add_option("--seed", ev.seed, "Override the master seed");
    evaluate->add_flag("--quiet", ev.quiet, "Do not print progress");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Benchmark one method axis");
    sweep->add_option("--config", sw.eval.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--axis", sw.axis, "set_type, n_random, tau or weighting")->required();
    sweep->add_option("--values", sw.values, "Axis values (default: the standard grid)")->delimiter(',');
    sweep->add_option("--out-dir", sw.eval.out_dir, "Override the config's output directory");
    auto* sw_seed = sweep->add_option("--seed", sw.eval.seed, "Override the master seed");
    sweep->add_flag("--quiet", sw.eval.quiet, "Do not print progress");

    GradcheckArgs gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare backprop with central differences");
    gradcheck->add_option("--variant", gc.variant, "multihead, embedding or both")
        ->check(CLI::IsMember({"multihead", "embedding", "both"}));
    gradcheck->add_option("--seeds", gc.seeds, "Number of random models per variant")->check(CLI::Range(1, 1000));
    gradcheck->add_option("--hidden1", gc.hidden1)->check(CLI::Range(1, 4096));
    gradcheck->add_option("--hidden2", gc.hidden2)->check(CLI::Range(1, 4096));
    gradcheck->add_option("--days", gc.days, "Sequence length")->check(CLI::Range(1, 400));
    gradcheck->add_option("--step", gc.h, "Finite-difference step h");
    gradcheck->add_option("--floor", gc.floor, "Smallest denominator of the relative error");
    gradcheck->add_option("--tolerance", gc.tolerance, "Largest accepted relative error");

    PlotArgs pl;
    auto* plot = app.add_subcommand("plot", "Draw per-entry LTE50 curves for one season");
    plot->add_option("--model", pl.model, "Model bundle")->required()->check(CLI::ExistingFile);
    plot->add_option("--data", pl.data, "CSV holding the season")->required()->check(CLI::ExistingFile);
    plot->add_option("--task", pl.task, "Task of the season (default: first)");
    plot->add_option("--season", pl.season, "Season label, e.g. 2019-2020 (default: first)");
    plot->add_option("--sets", pl.sets, "Task sets to draw, e.g. S,CR,LR-3")->delimiter(',');
    plot->add_option("--seed", pl.seed, "Seed for sampled entries");
    plot->add_option("--out-dir", pl.out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);
    ev.has_seed = ev_seed->count() > 0;
    sw.eval.has_seed = sw_seed->count() > 0;

    try {
        if (*generate) return run_generate(gen);
        if (*train) return run_train(tr);
        if (*transfer) return run_transfer(tf);
        if (*evaluate) return run_evaluate(ev);
        if (*sweep) return run_sweep(sw);
        if (*gradcheck) return run_gradcheck(gc);
        if (*plot) return run_plot(pl);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
