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

#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tal/common.hpp"
#include "tal/data/csv_io.hpp"
#include "tal/data/generator.hpp"
#include "tal/data/preprocess.hpp"
#include "tal/harness/experiment.hpp"
#include "tal/harness/report.hpp"
#include "tal/models/bundle.hpp"
#include "tal/models/network.hpp"
#include "tal/numerics/gradcheck.hpp"
#include "tal/training/loss.hpp"
#include "tal/training/trainer.hpp"
#include "tal/transfer/config.hpp"
#include "tal/transfer/tal.hpp"
#include "tal/transfer/weights.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const tal::Tensor& t) {
    Array out({t.rows(), t.cols()});
    std::copy(t.values().begin(), t.values().end(), out.mutable_data());
    return out;
}

tal::Tensor from_numpy(const Array& a) {
    if (a.ndim() != 2) throw tal::Error("expected a 2-D array of shape (days, 12)");
    tal::Tensor t = tal::Tensor::matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), t.values().begin());
    return t;
}

std::vector<const tal::SeasonSeries*> pointers(const std::vector<tal::SeasonSeries>& seasons) {
    std::vector<const tal::SeasonSeries*> out;
    for (const auto& s : seasons) out.push_back(&s);
    return out;
}

// Target seasons of `task`, interpolated and put on the model's feature scale.
std::vector<tal::SeasonSeries> prepared(const tal::ModelParams& model, const tal::Dataset& data,
                                        const std::string& task, bool keep_lte) {
    std::vector<tal::SeasonSeries> out;
    for (const auto& s : data.seasons(task)) {
        tal::SeasonSeries p = tal::normalize(tal::interpolate_weather(s), model.feature_stats);
        out.push_back(keep_lte ? std::move(p) : tal::strip_lte(std::move(p)));
    }
    if (out.empty()) throw tal::Error("dataset has no seasons for task '" + task + "'");
    return out;
}

}  // namespace

PYBIND11_MODULE(_tal, m) {
    m.doc() = "Transfer learning from auxiliary labels for cold-hardiness prediction";
    py::register_exception<tal::Error>(m, "TalError", PyExc_RuntimeError);

    py::class_<tal::Dataset>(m, "Dataset")
        .def_property_readonly("task_ids", &tal::Dataset::task_ids)
        .def("season_count", [](const tal::Dataset& d, const std::string& task) { return d.seasons(task).size(); })
        .def("season_labels",
             [](const tal::Dataset& d, const std::string& task) {
                 std::vector<std::string> out;
                 for (const auto& s : d.seasons(task)) out.push_back(s.season_label);
                 return out;
             })
        .def("lte_count",
             [](const tal::Dataset& d, const std::string& task) {
                 std::size_t n = 0;
                 for (const auto& s : d.seasons(task)) n += s.lte_count();
                 return n;
             })
        .def("weather",
             [](const tal::Dataset& d, const std::string& task, std::size_t season) {
                 const auto& seasons = d.seasons(task);
                 if (season >= seasons.size()) throw tal::Error("season index out of range");
                 return to_numpy(tal::weather_matrix(seasons[season]));
             },
             py::arg("task"), py::arg("season") = 0)
        .def("save_csv", [](const tal::Dataset& d, const std::string& path) { tal::save_csv(d, path); })
        .def_property_readonly("fingerprint", [](const tal::Dataset& d) { return tal::dataset_fingerprint(d); });

    m.def(
        "generate",
        [](int tasks, int seasons, std::uint64_t seed) {
            return tal::generate_synthetic(tal::default_generator_config(tasks, seed), seasons);
        },
        py::arg("tasks") = 6, py::arg("seasons") = 8, py::arg("seed") = 0,
        "Synthetic dataset from the default generator.");
    m.def(
        "load_csv",
        [](const std::string& path, bool require_lte) {
            tal::CsvLoadOptions options;
            options.require_lte = require_lte;
            return tal::load_csv(path, options).dataset;
        },
        py::arg("path"), py::arg("require_lte") = true);

    py::class_<tal::ModelParams>(m, "Model")
        .def_property_readonly("tasks", [](const tal::ModelParams& p) { return p.tasks; })
        .def_property_readonly("variant", [](const tal::ModelParams& p) { return tal::to_string(p.variant); })
        .def_property_readonly("fingerprint", &tal::ModelParams::fingerprint)
        .def("source_embedding", &tal::ModelParams::source_embedding)
        .def("save", [](const tal::ModelParams& p, const std::string& path) { tal::save_bundle(p, path); })
        .def(
            "predict",
            [](const tal::ModelParams& p, const std::string& task, const Array& weather) {
                const tal::Tensor x = from_numpy(weather);
                if (p.variant == tal::ModelVariant::MultiHead) return to_numpy(tal::predict_multihead(p, task, x));
                return to_numpy(tal::predict_embedding(p, p.source_embedding(p.task_index(task)), x));
            },
            py::arg("task"), py::arg("weather"), "Per-day outputs [days, 7] for normalized weather [days, 12].")
        .def(
            "predict_embedding",
            [](const tal::ModelParams& p, const std::vector<double>& embedding, const Array& weather) {
                return to_numpy(tal::predict_embedding(p, embedding, from_numpy(weather)));
            },
            py::arg("embedding"), py::arg("weather"));

    m.def("load_model", &tal::load_bundle, py::arg("path"));

    m.def(
        "train",
        [](const tal::Dataset& raw, std::vector<std::string> tasks, const std::string& config_json) {
            const tal::TrainConfig config = json::parse(config_json).get<tal::TrainConfig>();
            if (tasks.empty()) tasks = raw.task_ids();
            tal::Dataset source;
            for (const auto& t : tasks) source.tasks[t] = raw.seasons(t);
            source = tal::interpolate_weather(std::move(source));
            source.feature_stats = tal::compute_feature_stats(source);
            source = tal::normalize(std::move(source));
            py::gil_scoped_release release;
            return tal::train(source, tasks, config).model;
        },
        py::arg("dataset"), py::arg("tasks"), py::arg("config_json"));

    m.def(
        "transfer",
        [](const tal::ModelParams& model, const tal::Dataset& data, const std::string& task,
           const std::string& config_json) {
            const tal::TalConfig config = json::parse(config_json).get<tal::TalConfig>();
            const bool uses_lte = config.scheme == tal::Scheme::OptEmbedding &&
                                  config.opt.objective == tal::EmbeddingObjective::Lte;
            const auto target = prepared(model, data, task, uses_lte);
            const auto ptrs = pointers(target);
            const tal::TalRun run = tal::run_tal(model, ptrs, config);
            py::list predictions;
            for (const auto& t : tal::predict_lte(model, run, ptrs)) predictions.append(to_numpy(t));
            return py::make_tuple(tal::manifest(run).dump(), predictions);
        },
        py::arg("model"), py::arg("dataset"), py::arg("task"), py::arg("config_json"));

    m.def(
        "eval_rmse",
        [](const tal::Dataset& data, const std::string& task, const std::vector<Array>& predictions) {
            const auto& seasons = data.seasons(task);
            std::vector<tal::Tensor> tensors;
            for (const auto& p : predictions) tensors.push_back(from_numpy(p));
            return tal::eval_rmse(tensors, pointers(seasons));
        },
        py::arg("dataset"), py::arg("task"), py::arg("predictions"));

    m.def(
        "compute_weights",
        [](const std::vector<double>& losses, const std::string& weighting, double tau) {
            return tal::compute_weights(losses, tal::parse_weighting(weighting), tau);
        },
        py::arg("losses"), py::arg("weighting") = "exp", py::arg("tau") = 10.0);

    m.def(
        "gradcheck",
        [](const std::string& variant, std::uint64_t seed) {
            const tal::GradcheckCase c = tal::make_gradcheck_case(tal::parse_model_variant(variant), seed);
            const auto batch = c.batch();
            const tal::GradcheckResult r = tal::gradcheck(c.model, batch, {});
            return py::dict(py::arg("max_relative_error") = r.max_relative_error,
                            py::arg("max_absolute_error") = r.max_absolute_error, py::arg("checked") = r.checked,
                            py::arg("skipped") = r.skipped);
        },
        py::arg("variant") = "embedding", py::arg("seed") = 0);

    m.def(
        "run_loco",
        [](const std::string& config_json) {
            const tal::ExperimentConfig config = json::parse(config_json).get<tal::ExperimentConfig>();
            tal::ExperimentReport report;
            {
                py::gil_scoped_release release;
                report = tal::run_loco(config);
            }
            return tal::report_csv(report);
        },
        py::arg("config_json"), "Leave-one-task-out benchmark; returns the report CSV.");
}
