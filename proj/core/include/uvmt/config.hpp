/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/config.hpp
 *
 * Copyright 2026 The uvmt contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

/// Training configuration: a flat sectioned key = value text format with
/// every default overridable. Unknown sections or keys are rejected with
/// the offending name.

#include <cstdint>
#include <string>

#include "uvmt/dataset.hpp"
#include "uvmt/nn.hpp"
#include "uvmt/objectives.hpp"
#include "uvmt/transfer_net.hpp"

namespace uvmt {

struct TrainConfig {
    NetConfig net;          ///< [net]
    DatasetOptions data;    ///< [dataset]; uv_resolution/image_size are derived.
    LossWeights weights;    ///< [loss]
    nn::AdamConfig adam;    ///< [train] lr / beta1 / beta2 / eps

    std::int64_t steps = 2000;
    std::uint64_t seed = 1;
    int image_size = 0; ///< render frame; 0 means "same as uv_resolution".
    int checkpoint_every = 500;
    int keep_checkpoints = 3;
    int grad_accumulation = 1; ///< G/D updates applied every n-th iteration's mean.
    bool fam_off = false;
    bool mtm_off = false;
    bool minimax_generator = false; ///< ablation: generator minimizes log(1-D) instead of -log D.
    std::string out_dir = "run";

    int resolved_image_size() const { return image_size > 0 ? image_size : net.uv_resolution; }
};

/// Parses "[section]\nkey = value" text. '#' starts a comment. Unknown
/// sections/keys, malformed lines, and unparsable values throw ConfigError
/// naming the offender.
TrainConfig parse_train_config_text(const std::string& text);
TrainConfig load_train_config(const std::string& path);

/// Serializes every setting; parse_train_config_text(train_config_text(c))
/// reproduces c exactly. Used for checkpoint manifests.
std::string train_config_text(const TrainConfig& config);

/// Structural checks shared by parsing and programmatic construction.
void validate_train_config(const TrainConfig& config);

} // namespace uvmt
