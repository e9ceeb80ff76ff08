/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/commands.hpp
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

/// Command implementations behind the `uvmt` CLI. Each command is a plain
/// function over an options struct so tests can drive it without a process
/// boundary; errors are reported by throwing (the CLI maps exceptions to
/// stderr + nonzero exit).

#include <cstdint>
#include <string>

namespace uvmt {

struct SynthOptions {
    std::string out_dir;
    int n_makeup = 32;
    int n_plain = 32;
    std::uint64_t seed = 1;
    int uv_resolution = 128;
    int image_size = 128;
    double contaminated_fraction = 0.3;
    /// Additionally render the first N samples to <out>/face-NNNN.png with
    /// sibling coefficient files, ready for `uvmt transfer`.
    int export_faces = 0;
};

/// Generates the synthetic dataset and writes <out>/dataset.uvt1,
/// <out>/basis.uvt1, and a human-readable <out>/manifest.txt.
void cmd_synth(const SynthOptions& options);

struct TrainOptions {
    std::string config_path;
    std::string resume_path;   ///< optional checkpoint to resume from.
    bool fam_off = false;      ///< ablation override (OR-ed with the config).
    bool mtm_off = false;      ///< ablation override (OR-ed with the config).
};

/// Loads the config file, applies ablation overrides, and trains to
/// completion (checkpoints + losses.csv under the config's out_dir).
void cmd_train(const TrainOptions& options);

struct TransferOptions {
    std::string checkpoint_path;
    std::string source_path;    ///< .png (with sibling .uvt1 coefficients) or .uvt1.
    std::string reference_path; ///< same convention as source_path.
    std::string out_dir;
    double w = 1.0;             ///< shade weight in [0,1].
    std::string region = "all"; ///< lips | eye | face | all | none.
    std::string interp_ref2_path; ///< optional second reference for interpolation.
    double interp_w = 1.0;        ///< weight of reference 1 in [0,1].
    int image_size = 256;         ///< frame size when the source has no image.
};

/// Runs one transfer and writes <out>/transfer.png, <out>/fam_mask.png
/// (unless the checkpoint was trained fam_off), <out>/texture.uvt1, and
/// <out>/diagnostics.txt.
void cmd_transfer(const TransferOptions& options);

struct EvalOptions {
    std::string checkpoint_path;
    std::string dataset_path; ///< dataset.uvt1 from cmd_synth.
    std::string report_path;
    std::string fam_off_checkpoint_path; ///< optional ablation for the repair comparison.
    int cycle_pairs = 8;
    std::uint64_t seed = 1;
};

/// Writes a plain-text metrics report (mask separation, repair errors and
/// win fraction, cycle L1, self-transfer L1, UV round-trip PSNR) plus a
/// "<report>.tensors.uvt1" container with the round-trip tensors so the
/// PSNR line can be recomputed from saved outputs.
void cmd_eval(const EvalOptions& options);

} // namespace uvmt
