/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/commands.cpp
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
#include "uvmt/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>

#include "uvmt/container.hpp"
#include "uvmt/dataset.hpp"
#include "uvmt/errors.hpp"
#include "uvmt/image.hpp"
#include "uvmt/trainer.hpp"

namespace uvmt {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::ofstream open_text(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// A face argument owning its tensors; `--src face.png` expects fitted
/// coefficients in the sibling `face.uvt1`, while `--src face.uvt1` is a
/// coefficients-only input whose texture is synthesized from the model.
struct LoadedFace {
    std::optional<Tensor> image;
    FaceCoefficients coeffs;
};

LoadedFace load_face(const std::string& path) {
    if (!std::filesystem::exists(path)) throw IoError("input does not exist: " + path);
    LoadedFace face;
    if (ends_with(path, ".png")) {
        face.image = load_png(path);
        std::string coeff_path = path.substr(0, path.size() - 4) + ".uvt1";
        if (!std::filesystem::exists(coeff_path))
            throw IoError("missing coefficients for " + path + " (expected " + coeff_path + ")");
        face.coeffs = load_coefficients(coeff_path);
    } else {
        face.coeffs = load_coefficients(path);
    }
    return face;
}

FaceInput as_input(const LoadedFace& face) {
    FaceInput input;
    input.image = face.image.has_value() ? &*face.image : nullptr;
    input.coeffs = face.coeffs;
    return input;
}

double attention_row_entropy(const Tensor& attention) {
    const int rows = attention.dim(0), cols = attention.dim(1);
    double total = 0.0;
    for (int r = 0; r < rows; ++r) {
        double h = 0.0;
        for (int c = 0; c < cols; ++c) {
            const double p = attention.at(r, c);
            if (p > 0.0) h -= p * std::log(p);
        }
        total += h;
    }
    return total / rows;
}

double psnr_on_valid(const Tensor& a, const Tensor& b, const Tensor& validity) {
    const int h = a.dim(0), w = a.dim(1), c = a.dim(2);
    double sse = 0.0;
    std::int64_t count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (validity.at(y, x) == 0.0) continue;
            for (int ch = 0; ch < c; ++ch) {
                const double d = a.at(y, x, ch) - b.at(y, x, ch);
                sse += d * d;
            }
            count += c;
        }
    detail::require(count > 0, "psnr: no valid texels");
    const double mse = sse / static_cast<double>(count);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

} // namespace

void cmd_synth(const SynthOptions& options) {
    detail::require(!options.out_dir.empty(), "synth: --out is required");
    const MorphableBasis basis = make_synthetic_basis();
    DatasetOptions data;
    data.n_makeup = options.n_makeup;
    data.n_plain = options.n_plain;
    data.uv_resolution = options.uv_resolution;
    data.image_size = options.image_size;
    data.contaminated_fraction = options.contaminated_fraction;
    const std::vector<SyntheticSample> samples = generate_dataset(basis, data, options.seed);

    std::filesystem::create_directories(options.out_dir);
    save_dataset(options.out_dir + "/dataset.uvt1", samples);
    save_basis(options.out_dir + "/basis.uvt1", basis);

    const int exported = std::min<int>(options.export_faces, static_cast<int>(samples.size()));
    for (int i = 0; i < exported; ++i) {
        const SyntheticSample& sample = samples[static_cast<std::size_t>(i)];
        char stem[32];
        std::snprintf(stem, sizeof stem, "face-%04d", i);
        const FittedFace fitted = make_fitted_face(basis, sample.coefficients);
        const RenderedImage rendered = rasterize(fitted, sample.contaminated_texture,
                                                 options.image_size, options.image_size);
        save_png(options.out_dir + "/" + stem + ".png", rendered.pixels);
        save_coefficients(options.out_dir + "/" + stem + ".uvt1", sample.coefficients);
    }

    int contaminated = 0;
    for (const SyntheticSample& sample : samples)
        if (sample.contaminated()) ++contaminated;
    std::ofstream manifest = open_text(options.out_dir + "/manifest.txt");
    manifest << "samples = " << samples.size() << "\n"
             << "n_makeup = " << options.n_makeup << "\n"
             << "n_plain = " << options.n_plain << "\n"
             << "contaminated = " << contaminated << "\n"
             << "uv_resolution = " << options.uv_resolution << "\n"
             << "image_size = " << options.image_size << "\n"
             << "seed = " << options.seed << "\n";
}

void cmd_train(const TrainOptions& options) {
    detail::require(!options.config_path.empty(), "train: --config is required");
    TrainConfig config = load_train_config(options.config_path);
    config.fam_off = config.fam_off || options.fam_off;
    config.mtm_off = config.mtm_off || options.mtm_off;
    Trainer trainer(config);
    if (!options.resume_path.empty()) trainer.resume_from(options.resume_path);
    trainer.run();
}

void cmd_transfer(const TransferOptions& options) {
    detail::require(options.w >= 0.0 && options.w <= 1.0, "transfer: --w must be in [0,1]");
    detail::require(options.interp_w >= 0.0 && options.interp_w <= 1.0,
                    "transfer: --interp-w must be in [0,1]");
    detail::require(options.region == "lips" || options.region == "eye" ||
                        options.region == "face" || options.region == "all" ||
                        options.region == "none",
                    "transfer: --region must be one of lips|eye|face|all|none");
    detail::require(!options.out_dir.empty(), "transfer: --out is required");

    Checkpoint checkpoint = load_checkpoint(options.checkpoint_path);
    const MorphableBasis basis = make_synthetic_basis();
    const LoadedFace src = load_face(options.source_path);
    const LoadedFace ref = load_face(options.reference_path);
    LoadedFace ref2;
    const bool interpolate = !options.interp_ref2_path.empty();
    if (interpolate) ref2 = load_face(options.interp_ref2_path);

    TransferImageRequest request;
    request.source = as_input(src);
    request.reference = as_input(ref);
    if (interpolate) {
        request.reference2 = as_input(ref2);
        request.interp_w = options.interp_w;
    }
    request.transfer.w = options.w;
    request.transfer.fam_off = checkpoint.config.fam_off;
    request.transfer.mtm_off = checkpoint.config.mtm_off;
    request.image_size = options.image_size;

    TransferImageResult result = transfer_image(checkpoint.net, basis, request);

    if (options.region != "all") {
        // Region scoping: keep the shaded transfer inside the region and the
        // no-makeup reconstruction (w = 0) everywhere else, then re-render.
        TransferImageRequest base_request = request;
        base_request.transfer.w = 0.0;
        const TransferImageResult base = transfer_image(checkpoint.net, basis, base_request);
        UVTexture blended = base.texture;
        if (options.region != "none") {
            const auto masks = builtin_region_masks_uv(checkpoint.net.config().uv_resolution);
            const Tensor& mask = masks.at(options.region);
            const int res = mask.dim(0);
            for (int y = 0; y < res; ++y)
                for (int x = 0; x < res; ++x) {
                    if (mask.at(y, x) == 0.0) continue;
                    for (int c = 0; c < 3; ++c)
                        blended.pixels.at(y, x, c) = result.texture.pixels.at(y, x, c);
                }
        }
        const FittedFace fitted = make_fitted_face(basis, src.coeffs);
        const int h = src.image.has_value() ? src.image->dim(0) : options.image_size;
        const int w = src.image.has_value() ? src.image->dim(1) : options.image_size;
        RenderedImage rendered = rasterize(fitted, blended, h, w);
        if (src.image.has_value()) {
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (rendered.face_mask.at(y, x) != 0.0) continue;
                    for (int c = 0; c < 3; ++c)
                        rendered.pixels.at(y, x, c) = src.image->at(y, x, c);
                }
        }
        result.image = std::move(rendered);
        result.texture = std::move(blended);
    }

    std::filesystem::create_directories(options.out_dir);
    save_png(options.out_dir + "/transfer.png", result.image.pixels);
    if (!request.transfer.fam_off)
        save_png_gray(options.out_dir + "/fam_mask.png", result.fam_mask);
    Uvt1Container texture_out;
    texture_out.add_f32("pixels", result.texture.pixels);
    texture_out.add_f32("validity", result.texture.validity);
    texture_out.save(options.out_dir + "/texture.uvt1");

    std::ofstream diag = open_text(options.out_dir + "/diagnostics.txt");
    diag << "checkpoint = " << options.checkpoint_path << "\n"
         << "w = " << format_double(options.w) << "\n"
         << "region = " << options.region << "\n"
         << "interpolated = " << (interpolate ? "true" : "false") << "\n";
    if (interpolate) diag << "interp_w = " << format_double(options.interp_w) << "\n";
    if (!request.transfer.mtm_off && result.attention.rank() == 2) {
        diag << "attention_rows = " << result.attention.dim(0) << "\n"
             << "attention_mean_row_entropy = "
             << format_double(attention_row_entropy(result.attention)) << "\n";
    }
    if (!request.transfer.fam_off) {
        double mean = 0.0;
        for (std::int64_t i = 0; i < result.fam_mask.size(); ++i)
            mean += result.fam_mask.data()[i];
        diag << "fam_mask_mean = " << format_double(mean / result.fam_mask.size()) << "\n";
    }
}

void cmd_eval(const EvalOptions& options) {
    detail::require(!options.report_path.empty(), "eval: --report is required");
    Checkpoint full_ck = load_checkpoint(options.checkpoint_path);
    const std::vector<SyntheticSample> samples = load_dataset(options.dataset_path);
    detail::require(!samples.empty(), "eval: dataset is empty");

    // The dataset directory carries its basis; fall back to the canonical
    // synthetic basis if the sibling file is absent.
    const std::filesystem::path sibling =
        std::filesystem::path(options.dataset_path).parent_path() / "basis.uvt1";
    const MorphableBasis basis =
        std::filesystem::exists(sibling) ? load_basis(sibling.string()) : make_synthetic_basis();

    std::vector<SyntheticSample> sources, references;
    for (const SyntheticSample& sample : samples)
        (sample.domain == DomainTag::Makeup ? references : sources).push_back(sample);
    detail::require(!sources.empty() && !references.empty(), "eval: need both domains");

    EvalModel full{&full_ck.net, full_ck.config.fam_off, full_ck.config.mtm_off};
    std::optional<Checkpoint> ablation_ck;
    EvalModel ablation;
    if (!options.fam_off_checkpoint_path.empty()) {
        ablation_ck = load_checkpoint(options.fam_off_checkpoint_path);
        ablation = EvalModel{&ablation_ck->net, ablation_ck->config.fam_off,
                             ablation_ck->config.mtm_off};
    }
    const RepairMetrics repair = evaluate_repair(full, ablation_ck ? &ablation : nullptr,
                                                 sources, references);

    TransferConfig tc;
    tc.fam_off = full.fam_off;
    tc.mtm_off = full.mtm_off;
    const double cycle = measure_cycle_l1(full_ck.net, tc, samples, options.cycle_pairs,
                                          options.seed);
    const double self_l1 = measure_self_transfer_l1(full_ck.net, tc, samples);

    // UV round trip on sample 0: render its clean texture at its own pose,
    // extract back, and compare on the extractor's valid texels.
    const SyntheticSample& probe = samples.front();
    const int res = probe.clean_texture.pixels.dim(0);
    const FittedFace fitted = make_fitted_face(basis, probe.coefficients);
    const RenderedImage rendered = rasterize(fitted, probe.clean_texture, 2 * res, 2 * res);
    const UVTexture extracted = extract_uv_texture(rendered.pixels, fitted, res);
    const double psnr = psnr_on_valid(extracted.pixels, probe.clean_texture.pixels,
                                      extracted.validity);

    Uvt1Container tensors;
    tensors.add_f32("roundtrip_original", probe.clean_texture.pixels);
    tensors.add_f32("roundtrip_extracted", extracted.pixels);
    tensors.add_f32("roundtrip_validity", extracted.validity);
    tensors.save(options.report_path + ".tensors.uvt1");

    std::ofstream report = open_text(options.report_path);
    report << "checkpoint = " << options.checkpoint_path << "\n"
           << "dataset = " << options.dataset_path << "\n"
           << "samples = " << samples.size() << "\n"
           << "contaminated_references = " << repair.samples << "\n"
           << "mask_separation = " << format_double(repair.mask_separation) << "\n";
    if (ablation_ck) {
        report << "err_full = " << format_double(repair.err_full) << "\n"
               << "err_ablation = " << format_double(repair.err_ablation) << "\n"
               << "full_wins = " << repair.full_wins << "\n"
               << "win_fraction = " << format_double(repair.win_fraction) << "\n";
    }
    report << "cycle_l1 = " << format_double(cycle) << "\n"
           << "self_transfer_l1 = " << format_double(self_l1) << "\n"
           << "uv_round_trip_psnr_db = " << format_double(psnr) << "\n";
}

} // namespace uvmt
