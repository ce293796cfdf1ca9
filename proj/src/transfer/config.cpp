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

#include "tal/transfer/config.hpp"

#include <cmath>

#include "tal/common.hpp"

namespace tal {

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::BestSource: return "best_source";
        case Scheme::OptEmbedding: return "opt_embedding";
        case Scheme::Averaging: return "averaging";
    }
    return "?";
}

std::string to_string(Weighting weighting) {
    switch (weighting) {
        case Weighting::Uniform: return "uniform";
        case Weighting::Linear: return "linear";
        case Weighting::LinearLiteral: return "linear_literal";
        case Weighting::Exponential: return "exp";
    }
    return "?";
}

std::string to_string(EmbeddingObjective objective) {
    return objective == EmbeddingObjective::Auxiliary ? "aux" : "lte";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "best_source") return Scheme::BestSource;
    if (text == "opt_embedding") return Scheme::OptEmbedding;
    if (text == "averaging") return Scheme::Averaging;
    throw Error("unknown TAL scheme '" + std::string(text) + "' (best_source, opt_embedding, averaging)");
}

Weighting parse_weighting(std::string_view text) {
    if (text == "uniform") return Weighting::Uniform;
    if (text == "linear") return Weighting::Linear;
    if (text == "linear_literal") return Weighting::LinearLiteral;
    if (text == "exp" || text == "exponential") return Weighting::Exponential;
    throw Error("unknown weighting '" + std::string(text) + "' (uniform, linear, linear_literal, exp)");
}

EmbeddingObjective parse_objective(std::string_view text) {
    if (text == "aux") return EmbeddingObjective::Auxiliary;
    if (text == "lte") return EmbeddingObjective::Lte;
    throw Error("unknown embedding objective '" + std::string(text) + "' (aux, lte)");
}

TaskSetSpec TaskSetSpec::parse(std::string_view text) {
    TaskSetSpec spec;
    std::string_view rest = text;
    if (rest == "S") return spec;
    if (rest.starts_with("S+")) {
        rest.remove_prefix(2);
    } else {
        spec.sources = false;
    }
    if (rest == "CR") {
        spec.random = Random::CR;
    } else if (rest == "LR-3") {
        spec.random = Random::LR;
        spec.lr_subset = 3;
    } else if (rest == "LR-all" || rest == "LR") {
        spec.random = Random::LR;
    } else {
        throw Error("unknown task-set spec '" + std::string(text) + "' (S, CR, LR-3, LR-all, S+CR, S+LR-3, S+LR-all)");
    }
    return spec;
}

std::string TaskSetSpec::to_string() const {
    std::string random;
    if (this->random == Random::CR) random = "CR";
    if (this->random == Random::LR) random = lr_subset == 0 ? "LR-all" : "LR-" + std::to_string(lr_subset);
    if (random.empty()) return "S";
    return sources ? "S+" + random : random;
}

std::size_t TalConfig::random_count() const {
    if (task_set.random == TaskSetSpec::Random::None) return 0;
    if (n_random) return *n_random;
    return task_set.random == TaskSetSpec::Random::CR ? 68 : 17;
}

std::string TalConfig::label() const {
    if (!name.empty()) return name;
    switch (scheme) {
        case Scheme::BestSource: return "Best Source";
        case Scheme::OptEmbedding:
            return opt.objective == EmbeddingObjective::Auxiliary ? "Pheno. Optim." : "LTE Optim.*";
        case Scheme::Averaging: break;
    }
    std::string w;
    switch (weighting) {
        case Weighting::Uniform: w = "Uniform"; break;
        case Weighting::Linear: w = "Linear"; break;
        case Weighting::LinearLiteral: w = "Linear-literal"; break;
        case Weighting::Exponential:
            w = tau == 10.0 ? "Weighted" : "Ex-" + nlohmann::json(tau).dump();
            break;
    }
    std::string set = task_set.to_string();
    if (task_set.random != TaskSetSpec::Random::None && n_random) set += "-" + std::to_string(*n_random);
    return w + " (" + set + ")";
}

void TalConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("TalConfig: tau must be positive");
    if (opt.steps < 0) throw Error("TalConfig: opt_embedding steps must be >= 0");
    if (!(opt.lr > 0.0)) throw Error("TalConfig: opt_embedding lr must be positive");
    if (task_set.random == TaskSetSpec::Random::LR && task_set.lr_subset != 0 && task_set.lr_subset != 3) {
        throw Error("TalConfig: LR subset size must be 3 or all");
    }
    if (!task_set.sources && task_set.random == TaskSetSpec::Random::None) throw Error("TalConfig: empty task set");
    for (double p : prior) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error("TalConfig: prior entries must be finite and nonnegative");
    }
}

void to_json(nlohmann::json& j, const TalConfig& c) {
    j = {{"name", c.name},
         {"scheme", to_string(c.scheme)},
         {"task_set", c.task_set.to_string()},
         {"weighting", to_string(c.weighting)},
         {"tau", c.tau},
         {"opt_steps", c.opt.steps},
         {"opt_lr", c.opt.lr},
         {"opt_objective", to_string(c.opt.objective)},
         {"rng_seed", c.rng_seed},
         {"prior", c.prior}};
    if (c.n_random) j["n_random"] = *c.n_random;
}

void from_json(const nlohmann::json& j, TalConfig& c) {
    const TalConfig d;
    c.name = j.value("name", d.name);
    c.scheme = parse_scheme(j.value("scheme", to_string(d.scheme)));
    c.task_set = TaskSetSpec::parse(j.value("task_set", d.task_set.to_string()));
    c.n_random = j.contains("n_random") ? std::optional<std::size_t>(j.at("n_random").get<std::size_t>()) : std::nullopt;
    c.weighting = parse_weighting(j.value("weighting", to_string(d.weighting)));
    c.tau = j.value("tau", d.tau);
    c.opt.steps = j.value("opt_steps", d.opt.steps);
    c.opt.lr = j.value("opt_lr", d.opt.lr);
    c.opt.objective = parse_objective(j.value("opt_objective", to_string(d.opt.objective)));
    c.rng_seed = j.value("rng_seed", d.rng_seed);
    c.prior = j.value("prior", d.prior);
    c.validate();
}

}  // namespace tal
