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

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "tal/models/model.hpp"

namespace tal {

// Model bundle layout:
//   "TALMODEL"            8-byte magic
//   uint32 version        currently 1
//   uint64 header_bytes
//   header                JSON: variant, widths, tasks, feature_stats,
//                         training_fingerprint, byte_order, tensors[{name, shape}]
//   payload               raw IEEE-754 doubles of each tensor in header order
void write_bundle(const ModelParams& model, std::ostream& out);
ModelParams read_bundle(std::istream& in);
void save_bundle(const ModelParams& model, const std::string& path);
ModelParams load_bundle(const std::string& path);

void to_json(nlohmann::json& j, const FeatureStats& s);
void from_json(const nlohmann::json& j, FeatureStats& s);

}  // namespace tal
