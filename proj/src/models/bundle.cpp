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

#include "tal/models/bundle.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "tal/common.hpp"

namespace tal {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'L', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) throw Error("read_bundle: truncated file");
    return value;
}

}  // namespace

void to_json(nlohmann::json& j, const FeatureStats& s) { j = {{"mean", s.mean}, {"std", s.stddev}}; }

void from_json(const nlohmann::json& j, FeatureStats& s) {
    s.mean = j.at("mean").get<std::array<double, kWeatherFeatures>>();
    s.stddev = j.at("std").get<std::array<double, kWeatherFeatures>>();
}

void write_bundle(const ModelParams& model, std::ostream& out) {
    nlohmann::json header;
    header["variant"] = to_string(model.variant);
    header["widths"] = {{"hidden1", model.widths.hidden1}, {"hidden2", model.widths.hidden2}};
    header["tasks"] = model.tasks;
    header["feature_stats"] = model.feature_stats;
    header["training_fingerprint"] = model.training_fingerprint;
    header["byte_order"] = std::endian::native == std::endian::little ? "little" : "big";
    header["tensors"] = nlohmann::json::array();
    for (const auto& [name, value] : model.tensors) {
        header["tensors"].push_back({{"name", name}, {"shape", value.shape()}});
    }
    const std::string text = header.dump();
    out.write(kMagic, sizeof kMagic);
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [_, value] : model.tensors) {
        out.write(reinterpret_cast<const char*>(value.values().data()),
                  static_cast<std::streamsize>(value.size() * sizeof(double)));
    }
}

ModelParams read_bundle(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw Error("read_bundle: not a model bundle");
    }
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kVersion) throw Error("read_bundle: unsupported version " + std::to_string(version));
    const auto header_bytes = read_pod<std::uint64_t>(in);
    std::string text(header_bytes, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_bytes))) throw Error("read_bundle: truncated header");
    const auto header = nlohmann::json::parse(text);
    const std::string order = header.at("byte_order").get<std::string>();
    if (order != (std::endian::native == std::endian::little ? "little" : "big")) {
        throw Error("read_bundle: bundle byte order " + order + " differs from this machine");
    }

    ModelParams model;
    model.variant = parse_model_variant(header.at("variant").get<std::string>());
    model.widths.hidden1 = header.at("widths").at("hidden1").get<std::size_t>();
    model.widths.hidden2 = header.at("widths").at("hidden2").get<std::size_t>();
    model.tasks = header.at("tasks").get<std::vector<std::string>>();
    model.feature_stats = header.at("feature_stats").get<FeatureStats>();
    model.training_fingerprint = header.at("training_fingerprint").get<std::string>();
    for (const auto& entry : header.at("tensors")) {
        Tensor t(entry.at("shape").get<std::vector<std::size_t>>(), 0.0);
        if (!in.read(reinterpret_cast<char*>(t.values().data()),
                     static_cast<std::streamsize>(t.size() * sizeof(double)))) {
            throw Error("read_bundle: truncated tensor payload");
        }
        model.tensors.emplace(entry.at("name").get<std::string>(), std::move(t));
    }
    // Structural check against a freshly initialized model of the same shape.
    const ModelParams reference = ModelParams::initialize(model.variant, model.widths, model.tasks, 0);
    if (reference.tensors.size() != model.tensors.size()) throw Error("read_bundle: unexpected tensor set");
    for (const auto& [name, value] : reference.tensors) {
        auto it = model.tensors.find(name);
        if (it == model.tensors.end() || it->second.shape() != value.shape()) {
            throw Error("read_bundle: tensor '" + name + "' missing or misshapen");
        }
    }
    return model;
}

void save_bundle(const ModelParams& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("save_bundle: cannot open '" + path + "' for writing");
    write_bundle(model, out);
    if (!out) throw Error("save_bundle: write to '" + path + "' failed");
}

ModelParams load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_bundle: cannot open '" + path + "'");
    return read_bundle(in);
}

}  // namespace tal
