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

#include <cstdint>
#include <map>
#include <string>

#include "tal/numerics/tape.hpp"
#include "tal/numerics/tensor.hpp"

namespace tal {

using ParameterMap = std::map<std::string, Tensor>;

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam (Kingma & Ba). Moments are created lazily on the first
/// step and mirror the parameter shapes.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(AdamConfig config) : config_(config) {}

    /// Applies one update in place. `grads` must carry exactly the keys of
    /// `params` with matching shapes.
    void step(ParameterMap& params, const GradientMap& grads);

    const AdamConfig& config() const { return config_; }
    std::int64_t step_count() const { return steps_; }
    const ParameterMap& first_moments() const { return m_; }
    const ParameterMap& second_moments() const { return v_; }

private:
    AdamConfig config_;
    std::int64_t steps_ = 0;
    ParameterMap m_;
    ParameterMap v_;
};

}  // namespace tal
