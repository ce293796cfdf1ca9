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

#include "tal/numerics/adam.hpp"

#include <cmath>

#include "tal/common.hpp"

namespace tal {

void AdamState::step(ParameterMap& params, const GradientMap& grads) {
    if (params.size() != grads.size()) {
        throw Error("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                    std::to_string(params.size()) + " parameters");
    }
    for (const auto& [name, value] : params) {
        auto it = grads.find(name);
        if (it == grads.end()) throw Error("adam_step: no gradient for parameter '" + name + "'");
        if (it->second.shape() != value.shape()) {
            throw Error("adam_step: gradient shape " + it->second.shape_string() +
                        " does not match parameter '" + name + "' " + value.shape_string());
        }
    }

    ++steps_;
    const double t = static_cast<double>(steps_);
    const double correction1 = 1.0 - std::pow(config_.beta1, t);
    const double correction2 = 1.0 - std::pow(config_.beta2, t);

    for (auto& [name, value] : params) {
        const Tensor& g = grads.at(name);
        auto [m_it, m_new] = m_.try_emplace(name, value.shape(), 0.0);
        auto [v_it, v_new] = v_.try_emplace(name, value.shape(), 0.0);
        Tensor& m = m_it->second;
        Tensor& v = v_it->second;
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            value[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }
}

}  // namespace tal
