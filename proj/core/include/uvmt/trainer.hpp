/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/trainer.hpp
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

/// The adversarial training loop (alternating discriminator/generator steps
/// over unpaired draws), deterministic checkpointing, repair-claim
/// evaluation, and image-level transfer.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "uvmt/config.hpp"
#include "uvmt/dataset.hpp"
#include "uvmt/morphable.hpp"
#include "uvmt/objectives.hpp"
#include "uvmt/transfer_net.hpp"
#include "uvmt/uv.hpp"

namespace uvmt {

struct StepRecord {
    std::int64_t step = 0; ///< 1-based.
    LossComponents components;
    TotalLoss totals;
    /// Region names whose rendered mask was empty this step (their makeup
    /// term contributed zero).
    std::vector<std::string> skipped_regions;
};

/// Append-only loss log formatting (locale-independent shortest round-trip
/// doubles, so identical runs produce byte-identical logs).
std::string loss_csv_header();
std::string loss_csv_row(const StepRecord& record);

/// Writes generator + discriminator parameters with Adam moments, the full
/// config text, and the step counter into one UVT1 container, plus a
/// human-readable "<path>.manifest" sidecar.
void save_checkpoint(const std::string& path, const TransferNet& net, const TrainConfig& config,
                     std::int64_t step);

/// A checkpoint restored into a freshly constructed network.
struct Checkpoint {
    TrainConfig config;
    std::int64_t step = 0;
    TransferNet net;
};

Checkpoint load_checkpoint(const std::string& path);

class Trainer {
  public:
    /// Builds the synthetic basis, dataset, per-sample render maps, network,
    /// and frozen perceptual extractor. Deterministic in the config.
    explicit Trainer(const TrainConfig& config);

    /// Restores parameters, moments, and the step counter from a checkpoint
    /// written under a matching config (out_dir may differ).
    void resume_from(const std::string& checkpoint_path);

    /// One iteration (discriminator step then generator step) on the next
    /// unpaired draw. Throws TrainingError with a batch dump path when any
    /// loss component is non-finite.
    StepRecord step_once();

    /// Runs to config.steps, appending CSV rows to <out_dir>/losses.csv and
    /// checkpointing every checkpoint_every steps (keeping the last
    /// keep_checkpoints).
    void run();

    std::string checkpoint_path(std::int64_t step) const;

    const TrainConfig& config() const { return config_; }
    const MorphableBasis& basis() const { return basis_; }
    const std::vector<SyntheticSample>& samples() const { return samples_; }
    TransferNet& net() { return net_; }
    const TransferNet& net() const { return net_; }
    std::int64_t step() const { return step_; }

  private:
    StepRecord run_iteration(std::int64_t step_index, int src_index, int ref_index);
    void apply_gradients(const std::vector<std::pair<nn::Param*, ad::Var>>& bound,
                         std::unordered_map<nn::Param*, Tensor>& accumulator,
                         std::int64_t step_index);
    std::string dump_batch(std::int64_t step_index, int src_index, int ref_index) const;
    void save_checkpoint_now();

    TrainConfig config_;
    MorphableBasis basis_;
    std::vector<SyntheticSample> samples_;
    std::vector<int> makeup_indices_, plain_indices_;
    TransferNet net_;
    PerceptualExtractor extractor_;
    std::map<std::string, Tensor> region_masks_uv_;
    std::uint64_t train_seed_ = 0;
    std::int64_t step_ = 0;

    // Per-sample render state, fixed by the sample's pose.
    std::vector<std::unique_ptr<RasterMap>> raster_maps_;
    std::vector<std::map<std::string, Tensor>> image_region_masks_;
    std::vector<Tensor> real_images_chw_;

    std::unordered_map<nn::Param*, Tensor> accum_gen_, accum_disc_;
    std::vector<std::int64_t> saved_checkpoints_;
};

/// A trained model plus the ablation flags it was trained under.
struct EvalModel {
    const TransferNet* net = nullptr;
    bool fam_off = false;
    bool mtm_off = false;
};

struct RepairMetrics {
    int samples = 0;
    /// Mean over references of (mean flip-attention mask on clean texels
    /// minus mean on contaminated texels); positive means the mask flags
    /// contamination.
    double mask_separation = 0.0;
    /// Makeup-region L1 between the transfer from the contaminated
    /// reference and the same model's transfer from the clean reference.
    double err_full = 0.0;
    double err_ablation = 0.0;
    int full_wins = 0; ///< samples where the full model's error is lower.
    double win_fraction = 0.0;
};

/// Repair evaluation on contaminated references: mask separation for the
/// full model, and (when `ablation` is given) the clean-reference-oracle
/// error comparison. Sources are paired round-robin with references;
/// references without contamination are skipped.
RepairMetrics evaluate_repair(const EvalModel& full, const EvalModel* ablation,
                              const std::vector<SyntheticSample>& sources,
                              const std::vector<SyntheticSample>& references);

/// Mean per-texel reconstruction L1 over both cycle directions on `pairs`
/// seeded draws (makeup/plain pairs as in training).
double measure_cycle_l1(const TransferNet& net, const TransferConfig& config,
                        const std::vector<SyntheticSample>& samples, int pairs,
                        std::uint64_t seed);

/// Mean per-texel L1 between transfer(x, x) and x over all samples (clean
/// textures on both sides).
double measure_self_transfer_l1(const TransferNet& net, const TransferConfig& config,
                                const std::vector<SyntheticSample>& samples);

/// One face input: either an image plus its fitted coefficients, or
/// coefficients alone (the texture is then synthesized from the model).
struct FaceInput {
    const Tensor* image = nullptr; ///< H x W x 3 in [0,1], optional.
    FaceCoefficients coeffs;
};

struct TransferImageRequest {
    FaceInput source;
    FaceInput reference;
    std::optional<FaceInput> reference2; ///< second reference for interpolation.
    double interp_w = 1.0;               ///< weight of reference 1.
    TransferConfig transfer;
    int image_size = 0; ///< output frame; 0 derives it from the source image.
};

struct TransferImageResult {
    RenderedImage image; ///< source background composited outside face_mask.
    UVTexture texture;   ///< generated UV texture.
    Tensor fam_mask;     ///< R x R, empty when fam_off.
    Tensor attention;    ///< attention matrix, empty when mtm_off.
};

/// Extract both UV textures, generate, rasterize with the source geometry,
/// and composite the source background. Extraction failures propagate.
TransferImageResult transfer_image(const TransferNet& net, const MorphableBasis& basis,
                                   const TransferImageRequest& request);

} // namespace uvmt
