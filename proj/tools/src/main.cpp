/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: tools/src/main.cpp
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

/// The `uvmt` command-line tool: synthesize data, train, transfer, and
/// evaluate. Every subcommand is deterministic given its flags and seed;
/// errors go to stderr with a nonzero exit code.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "uvmt/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"3D-aware UV-space makeup transfer"};
    app.require_subcommand(1);

    uvmt::SynthOptions synth;
    CLI::App* cmd_synth = app.add_subcommand("synth", "Generate a synthetic face dataset");
    cmd_synth->add_option("--out", synth.out_dir, "Output directory")->required();
    cmd_synth->add_option("--n-makeup", synth.n_makeup, "Makeup-domain sample count");
    cmd_synth->add_option("--n-plain", synth.n_plain, "Plain-domain sample count");
    cmd_synth->add_option("--seed", synth.seed, "Dataset seed");
    cmd_synth->add_option("--uv-resolution", synth.uv_resolution, "UV texture resolution");
    cmd_synth->add_option("--image-size", synth.image_size, "Rendered frame size");
    cmd_synth->add_option("--contaminated-fraction", synth.contaminated_fraction,
                          "Fraction of makeup samples given a contaminated reference");
    cmd_synth->add_option("--export-faces", synth.export_faces,
                          "Also write rendered PNGs + coefficients for the first N samples");

    uvmt::TrainOptions train;
    CLI::App* cmd_train = app.add_subcommand("train", "Train the transfer network");
    cmd_train->add_option("--config", train.config_path, "Training config file")->required();
    cmd_train->add_option("--resume", train.resume_path, "Checkpoint to resume from");
    cmd_train->add_flag("--fam-off", train.fam_off, "Disable the flip attention module");
    cmd_train->add_flag("--mtm-off", train.mtm_off, "Disable the makeup transfer module");

    uvmt::TransferOptions transfer;
    CLI::App* cmd_transfer = app.add_subcommand("transfer", "Apply makeup transfer to a face");
    cmd_transfer->add_option("--ckpt", transfer.checkpoint_path, "Trained checkpoint")->required();
    cmd_transfer->add_option("--src", transfer.source_path, "Source face (.png or .uvt1)")->required();
    cmd_transfer->add_option("--ref", transfer.reference_path, "Reference face (.png or .uvt1)")->required();
    cmd_transfer->add_option("--out", transfer.out_dir, "Output directory")->required();
    cmd_transfer->add_option("--w", transfer.w, "Shade weight in [0,1]");
    cmd_transfer->add_option("--region", transfer.region, "lips|eye|face|all|none");
    cmd_transfer->add_option("--interp-ref2", transfer.interp_ref2_path,
                             "Second reference for style interpolation");
    cmd_transfer->add_option("--interp-w", transfer.interp_w, "Weight of the first reference");
    cmd_transfer->add_option("--image-size", transfer.image_size,
                             "Frame size when the source is coefficients-only");

    uvmt::EvalOptions eval;
    CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    cmd_eval->add_option("--ckpt", eval.checkpoint_path, "Trained checkpoint")->required();
    cmd_eval->add_option("--dataset", eval.dataset_path, "dataset.uvt1 from synth")->required();
    cmd_eval->add_option("--report", eval.report_path, "Metrics report path")->required();
    cmd_eval->add_option("--fam-off-ckpt", eval.fam_off_checkpoint_path,
                         "Ablation checkpoint for the repair comparison");
    cmd_eval->add_option("--cycle-pairs", eval.cycle_pairs, "Cycle-metric pair count");
    cmd_eval->add_option("--seed", eval.seed, "Evaluation draw seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_synth->parsed()) uvmt::cmd_synth(synth);
        if (cmd_train->parsed()) uvmt::cmd_train(train);
        if (cmd_transfer->parsed()) uvmt::cmd_transfer(transfer);
        if (cmd_eval->parsed()) uvmt::cmd_eval(eval);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
