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

#include "tal/transfer/tal.hpp"

#include "tal/common.hpp"
#include "tal/transfer/weights.hpp"

namespace tal {

TalRun run_tal(const ModelParams& model, std::span<const SeasonSeries* const> target, const TalConfig& config) {
    config.validate();
    if (target.empty()) throw Error("run_tal: no target seasons");
    TalRun run;
    run.config = config;
    run.model_fingerprint = model.fingerprint();
    switch (config.scheme) {
        case Scheme::BestSource: {
            TalConfig roster = config;
            roster.task_set = TaskSetSpec{};
            run.task_set = build_task_set(model, roster);
            run.losses = entry_losses(model, run.task_set, target);
            run.evaluations = run.losses.size();
            run.chosen = argmin_loss(run.losses);
            run.weights.assign(run.task_set.size(), 0.0);
            run.weights[*run.chosen] = 1.0;
            break;
        }
        case Scheme::OptEmbedding: {
            OptimizedEmbedding opt = optimize_embedding(model, target, config.opt);
            run.task_set.entries.push_back({"optimized", TaskHandle::free_embedding(opt.embedding), {}, {}});
            run.losses = {opt.loss};
            run.weights = {1.0};
            run.evaluations = static_cast<std::size_t>(config.opt.steps) + 1;
            run.optimized = std::move(opt);
            break;
        }
        case Scheme::Averaging: {
            run.task_set = build_task_set(model, config);
            if (!config.prior.empty() && config.prior.size() != run.task_set.size()) {
                throw Error("run_tal: prior has " + std::to_string(config.prior.size()) + " entries for " +
                            std::to_string(run.task_set.size()) + " tasks");
            }
            if (config.weighting == Weighting::Uniform && config.prior.empty()) {
                run.weights = compute_weights(std::vector<double>(run.task_set.size(), 0.0), Weighting::Uniform, 1.0);
            } else {
                run.losses = entry_losses(model, run.task_set, target);
                run.evaluations = run.losses.size();
                run.weights = compute_weights(run.losses, config.weighting, config.tau, config.prior);
            }
            break;
        }
    }
    return run;
}

std::vector<Tensor> predict_lte(const ModelParams& model, const TalRun& run,
                                std::span<const SeasonSeries* const> seasons) {
    for (const auto& entry : run.task_set.entries) {
        if (entry.handle.is_source && entry.handle.task >= model.tasks.size()) {
            throw Error("predict_lte: entry '" + entry.label + "' refers to a task the model does not have");
        }
    }
    return mixture_predict(run.task_set, run.weights, model, seasons);
}

nlohmann::json manifest(const TalRun& run) {
    nlohmann::json j;
    j["config"] = run.config;
    j["label"] = run.config.label();
    j["model_fingerprint"] = run.model_fingerprint;
    j["evaluations"] = run.evaluations;
    j["entries"] = nlohmann::json::array();
    for (std::size_t i = 0; i < run.task_set.size(); ++i) {
        const TaskEntry& e = run.task_set.entries[i];
        nlohmann::json entry = {{"label", e.label}, {"weight", run.weights[i]}};
        if (e.handle.is_source) {
            entry["source_task"] = e.handle.task;
        } else {
            entry["embedding"] = e.handle.embedding;
        }
        if (!e.members.empty()) {
            entry["members"] = e.members;
            entry["coefficients"] = e.coefficients;
        }
        if (i < run.losses.size()) entry["loss"] = run.losses[i];
        j["entries"].push_back(std::move(entry));
    }
    if (run.chosen) j["chosen"] = run.task_set.entries[*run.chosen].label;
    if (run.optimized) {
        j["optimized"] = {{"embedding", run.optimized->embedding},
                          {"loss", run.optimized->loss},
                          {"initial_loss", run.optimized->initial_loss},
                          {"best_step", run.optimized->best_step}};
    }
    return j;
}

TalRun run_from_manifest(const nlohmann::json& j) {
    TalRun run;
    run.config = j.at("config").get<TalConfig>();
    run.model_fingerprint = j.at("model_fingerprint").get<std::string>();
    run.evaluations = j.value("evaluations", std::size_t{0});
    for (const auto& entry : j.at("entries")) {
        TaskEntry e;
        e.label = entry.at("label").get<std::string>();
        if (entry.contains("source_task")) {
            e.handle = TaskHandle::source(entry.at("source_task").get<std::size_t>());
        } else {
            e.handle = TaskHandle::free_embedding(entry.at("embedding").get<std::vector<double>>());
        }
        if (entry.contains("members")) {
            e.members = entry.at("members").get<std::vector<std::size_t>>();
            e.coefficients = entry.at("coefficients").get<std::vector<double>>();
        }
        if (entry.contains("loss")) run.losses.push_back(entry.at("loss").get<double>());
        run.weights.push_back(entry.at("weight").get<double>());
        if (entry.value("label", "") == j.value("chosen", std::string{})) run.chosen = run.task_set.size();
        run.task_set.entries.push_back(std::move(e));
    }
    run.task_set.validate();
    if (j.contains("optimized")) {
        const auto& o = j.at("optimized");
        run.optimized = OptimizedEmbedding{o.at("embedding").get<std::vector<double>>(), o.at("loss").get<double>(),
                                           o.at("initial_loss").get<double>(), o.at("best_step").get<int>()};
    }
    return run;
}

}  // namespace tal
