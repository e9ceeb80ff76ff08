/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/trainer.cpp
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
#include "uvmt/trainer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uvmt/container.hpp"
#include "uvmt/errors.hpp"
#include "uvmt/rng.hpp"

namespace uvmt {

namespace {

constexpr std::uint64_t kTrainStream = 0x74726169ULL; // per-step draw substream tag
constexpr std::uint64_t kCycleEvalStream = 0x6379636cULL;

Tensor to_chw(const Tensor& hwc) {
    const int h = hwc.dim(0), w = hwc.dim(1), c = hwc.dim(2);
    Tensor out({c, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) out.at(ch, y, x) = hwc.at(y, x, ch);
    return out;
}

double scalar(const ad::Var& v) { return v.value().data()[0]; }

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool components_finite(const LossComponents& parts) {
    return std::isfinite(parts.g_tex) && std::isfinite(parts.g_img) &&
           std::isfinite(parts.d_tex) && std::isfinite(parts.d_img) &&
           std::isfinite(parts.makeup) && std::isfinite(parts.cycle) &&
           std::isfinite(parts.perceptual);
}

/// Generator adversarial pair with the optional minimax ablation.
ad::Var generator_adv(const ad::Var& fake_a, const ad::Var& fake_b, bool minimax) {
    if (!minimax) return adv_generator_loss(fake_a, fake_b);
    return ad::affine(ad::add(adv_fake_term(fake_a), adv_fake_term(fake_b)), -1.0, 0.0);
}

std::string text_record(const Uvt1Container& container, const std::string& name) {
    const auto bytes = container.get_u8(name);
    return std::string(bytes.begin(), bytes.end());
}

void add_text_record(Uvt1Container& container, const std::string& name, const std::string& text) {
    container.add_u8(name, {static_cast<int>(text.size())},
                     std::vector<std::uint8_t>(text.begin(), text.end()));
}

/// Mean L1 over the nonzero texels of `region` (all channels).
double region_l1(const Tensor& a, const Tensor& b, const Tensor& region) {
    const int h = a.dim(0), w = a.dim(1), c = a.dim(2);
    double sum = 0.0;
    std::int64_t count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (region.at(y, x) == 0.0) continue;
            for (int ch = 0; ch < c; ++ch) sum += std::abs(a.at(y, x, ch) - b.at(y, x, ch));
            count += c;
        }
    detail::require(count > 0, "region_l1: empty region");
    return sum / static_cast<double>(count);
}

double mean_l1(const Tensor& a, const Tensor& b) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) sum += std::abs(a.data()[i] - b.data()[i]);
    return sum / static_cast<double>(a.size());
}

} // namespace

std::string loss_csv_header() {
    return "step,d_tex,d_img,d_total,g_tex,g_img,makeup,cycle,perceptual,g_total";
}

std::string loss_csv_row(const StepRecord& record) {
    std::ostringstream row;
    row << record.step << ',' << format_double(record.components.d_tex) << ','
        << format_double(record.components.d_img) << ','
        << format_double(record.totals.discriminator) << ','
        << format_double(record.components.g_tex) << ','
        << format_double(record.components.g_img) << ','
        << format_double(record.components.makeup) << ','
        << format_double(record.components.cycle) << ','
        << format_double(record.components.perceptual) << ','
        << format_double(record.totals.generator);
    return row.str();
}

void save_checkpoint(const std::string& path, const TransferNet& net, const TrainConfig& config,
                     std::int64_t step) {
    Uvt1Container container;
    net.generator_params().save_into(container, /*with_moments=*/true);
    net.discriminator_params().save_into(container, /*with_moments=*/true);
    const std::string config_text = train_config_text(config);
    add_text_record(container, "config", config_text);
    add_text_record(container, "step", std::to_string(step));
    container.save(path);

    std::ofstream manifest(path + ".manifest", std::ios::binary);
    if (!manifest) throw IoError("cannot write checkpoint manifest: " + path + ".manifest");
    manifest << "step = " << step << "\n"
             << "seed = " << config.seed << "\n"
             << "fam_off = " << (config.fam_off ? "true" : "false") << "\n"
             << "mtm_off = " << (config.mtm_off ? "true" : "false") << "\n"
             << "generator_parameters = " << net.generator_params().count() << "\n"
             << "discriminator_parameters = " << net.discriminator_params().count() << "\n"
             << "# full training config follows\n"
             << config_text;
}

Checkpoint load_checkpoint(const std::string& path) {
    const Uvt1Container container = Uvt1Container::load(path);
    if (!container.has("config") || !container.has("step"))
        throw IoError("not a training checkpoint (missing config/step records): " + path);
    TrainConfig config = parse_train_config_text(text_record(container, "config"));
    const std::string step_text = text_record(container, "step");
    std::int64_t step = 0;
    const auto [ptr, ec] = std::from_chars(step_text.data(), step_text.data() + step_text.size(), step);
    if (ec != std::errc{} || ptr != step_text.data() + step_text.size())
        throw IoError("malformed step record in checkpoint: " + path);

    TransferNet net(config.net, config.seed);
    net.generator_params().load_from(container);
    net.discriminator_params().load_from(container);
    return Checkpoint{std::move(config), step, std::move(net)};
}

Trainer::Trainer(const TrainConfig& config)
    : config_(config), basis_(make_synthetic_basis()), net_(config.net, config.seed) {
    validate_train_config(config_);
    train_seed_ = mix_seed(config_.seed, kTrainStream);

    DatasetOptions options = config_.data;
    options.uv_resolution = config_.net.uv_resolution;
    options.image_size = config_.resolved_image_size();
    samples_ = generate_dataset(basis_, options, config_.seed);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        auto& bucket =
            samples_[i].domain == DomainTag::Makeup ? makeup_indices_ : plain_indices_;
        bucket.push_back(static_cast<int>(i));
    }
    detail::require(!makeup_indices_.empty() && !plain_indices_.empty(),
                    "trainer: dataset must contain both domains");

    const int resolution = config_.net.uv_resolution;
    const int frame = config_.resolved_image_size();
    region_masks_uv_ = builtin_region_masks_uv(resolution);
    raster_maps_.reserve(samples_.size());
    image_region_masks_.reserve(samples_.size());
    real_images_chw_.reserve(samples_.size());
    for (const SyntheticSample& sample : samples_) {
        const FittedFace fitted = make_fitted_face(basis_, sample.coefficients);
        raster_maps_.push_back(
            std::make_unique<RasterMap>(build_raster_map(fitted, frame, frame, resolution)));
        image_region_masks_.push_back(
            rasterize_region_masks(fitted, region_masks_uv_, frame, frame));
        real_images_chw_.push_back(
            to_chw(apply_raster_map(*raster_maps_.back(), sample.contaminated_texture.pixels)));
    }
}

void Trainer::resume_from(const std::string& checkpoint_path) {
    const Uvt1Container container = Uvt1Container::load(checkpoint_path);
    if (!container.has("config") || !container.has("step"))
        throw IoError("not a training checkpoint (missing config/step records): " +
                      checkpoint_path);
    TrainConfig theirs = parse_train_config_text(text_record(container, "config"));
    TrainConfig mine = config_;
    // Resuming into a different output directory is allowed; everything that
    // shapes the data, the network, or the step sequence must match.
    theirs.out_dir.clear();
    mine.out_dir.clear();
    detail::require(train_config_text(theirs) == train_config_text(mine),
                    "resume: checkpoint config does not match the trainer config");

    const std::string step_text = text_record(container, "step");
    std::int64_t step = 0;
    const auto [ptr, ec] = std::from_chars(step_text.data(), step_text.data() + step_text.size(), step);
    if (ec != std::errc{} || ptr != step_text.data() + step_text.size())
        throw IoError("malformed step record in checkpoint: " + checkpoint_path);

    net_.generator_params().load_from(container);
    net_.discriminator_params().load_from(container);
    step_ = step;
    accum_gen_.clear();
    accum_disc_.clear();
}

StepRecord Trainer::step_once() {
    const std::int64_t t = step_ + 1;
    std::mt19937_64 rng = make_rng(train_seed_, static_cast<std::uint64_t>(t));
    std::uniform_int_distribution<std::size_t> src_pick(0, plain_indices_.size() - 1);
    std::uniform_int_distribution<std::size_t> ref_pick(0, makeup_indices_.size() - 1);
    const int src_index = plain_indices_[src_pick(rng)];
    const int ref_index = makeup_indices_[ref_pick(rng)];
    StepRecord record = run_iteration(t, src_index, ref_index);
    step_ = t;
    return record;
}

StepRecord Trainer::run_iteration(std::int64_t step_index, int src_index, int ref_index) {
    const SyntheticSample& src = samples_[static_cast<std::size_t>(src_index)];
    const SyntheticSample& ref = samples_[static_cast<std::size_t>(ref_index)];
    const Tensor src_chw = to_chw(src.contaminated_texture.pixels);
    const Tensor ref_chw = to_chw(ref.contaminated_texture.pixels);
    const RasterMap& map_src = *raster_maps_[static_cast<std::size_t>(src_index)];
    const RasterMap& map_ref = *raster_maps_[static_cast<std::size_t>(ref_index)];

    TransferConfig tcfg;
    tcfg.w = 1.0;
    tcfg.fam_off = config_.fam_off;
    tcfg.mtm_off = config_.mtm_off;

    StepRecord record;
    record.step = step_index;
    LossComponents& parts = record.components;

    // --- discriminator step (generated textures detached) ---
    {
        ad::Tape tape;
        nn::GraphContext ctx(tape);
        const ad::Var t_src = tape.leaf(src_chw);
        const ad::Var t_ref = tape.leaf(ref_chw);
        const GeneratorOutput to_ref = net_.generate(ctx, t_src, t_ref, tcfg, false);
        const GeneratorOutput to_src = net_.generate(ctx, t_ref, t_src, tcfg, false);
        const ad::Var fake_ref_tex = ad::detach(to_ref.texture);
        const ad::Var fake_src_tex = ad::detach(to_src.texture);

        const ad::Var d_tex = adv_discriminator_loss(
            net_.discriminate_texture(ctx, t_src, TextureDomain::Source, true),
            net_.discriminate_texture(ctx, t_ref, TextureDomain::Reference, true),
            net_.discriminate_texture(ctx, fake_src_tex, TextureDomain::Source, true),
            net_.discriminate_texture(ctx, fake_ref_tex, TextureDomain::Reference, true));

        const ad::Var real_src_img = tape.leaf(real_images_chw_[static_cast<std::size_t>(src_index)]);
        const ad::Var real_ref_img = tape.leaf(real_images_chw_[static_cast<std::size_t>(ref_index)]);
        const ad::Var fake_img_ref_pose =
            ad::hwc_to_chw(ad::raster_apply(ad::chw_to_hwc(fake_src_tex), map_ref));
        const ad::Var fake_img_src_pose =
            ad::hwc_to_chw(ad::raster_apply(ad::chw_to_hwc(fake_ref_tex), map_src));
        const ad::Var d_img = adv_discriminator_loss(
            net_.discriminate_image(ctx, real_src_img, true),
            net_.discriminate_image(ctx, real_ref_img, true),
            net_.discriminate_image(ctx, fake_img_ref_pose, true),
            net_.discriminate_image(ctx, fake_img_src_pose, true));

        const ad::Var d_total = compose_discriminator_loss(d_tex, d_img, config_.weights);
        parts.d_tex = scalar(d_tex);
        parts.d_img = scalar(d_img);
        if (!std::isfinite(parts.d_tex) || !std::isfinite(parts.d_img))
            throw TrainingError("non-finite discriminator loss at step " +
                                    std::to_string(step_index),
                                dump_batch(step_index, src_index, ref_index));
        tape.backward(d_total);
        apply_gradients(ctx.bound(), accum_disc_, step_index);
    }

    // --- generator step (discriminators frozen) ---
    {
        ad::Tape tape;
        nn::GraphContext ctx(tape);
        const ad::Var t_src = tape.leaf(src_chw);
        const ad::Var t_ref = tape.leaf(ref_chw);
        const GeneratorOutput to_ref = net_.generate(ctx, t_src, t_ref, tcfg, true);
        const GeneratorOutput to_src = net_.generate(ctx, t_ref, t_src, tcfg, true);
        const GeneratorOutput back_src = net_.generate(ctx, to_ref.texture, t_src, tcfg, true);
        const GeneratorOutput back_ref = net_.generate(ctx, to_src.texture, t_ref, tcfg, true);

        const ad::Var cycle = cycle_loss(back_src.texture, t_src, back_ref.texture, t_ref);
        const ad::Var g_tex = generator_adv(
            net_.discriminate_texture(ctx, to_src.texture, TextureDomain::Source, false),
            net_.discriminate_texture(ctx, to_ref.texture, TextureDomain::Reference, false),
            config_.minimax_generator);

        const ad::Var fake_img_src_pose = ad::raster_apply(ad::chw_to_hwc(to_ref.texture), map_src);
        const ad::Var fake_img_ref_pose = ad::raster_apply(ad::chw_to_hwc(to_src.texture), map_ref);
        const ad::Var g_img = generator_adv(
            net_.discriminate_image(ctx, ad::hwc_to_chw(fake_img_ref_pose), false),
            net_.discriminate_image(ctx, ad::hwc_to_chw(fake_img_src_pose), false),
            config_.minimax_generator);

        const Tensor ref_at_src_pose = apply_raster_map(map_src, ref.contaminated_texture.pixels);
        const ad::Var makeup =
            makeup_loss(fake_img_src_pose, ref_at_src_pose,
                        image_region_masks_[static_cast<std::size_t>(src_index)],
                        config_.weights, HistogramSpec{}, &record.skipped_regions);
        const ad::Var perceptual = perceptual_loss(ctx, extractor_, to_ref.texture, t_src);
        const ad::Var g_total =
            compose_generator_loss(g_tex, g_img, makeup, cycle, perceptual, config_.weights);

        parts.g_tex = scalar(g_tex);
        parts.g_img = scalar(g_img);
        parts.makeup = scalar(makeup);
        parts.cycle = scalar(cycle);
        parts.perceptual = scalar(perceptual);
        if (!components_finite(parts))
            throw TrainingError("non-finite generator loss at step " + std::to_string(step_index),
                                dump_batch(step_index, src_index, ref_index));
        tape.backward(g_total);
        apply_gradients(ctx.bound(), accum_gen_, step_index);
    }

    record.totals = total_loss(parts, config_.weights);
    return record;
}

void Trainer::apply_gradients(const std::vector<std::pair<nn::Param*, ad::Var>>& bound,
                              std::unordered_map<nn::Param*, Tensor>& accumulator,
                              std::int64_t step_index) {
    const int window = config_.grad_accumulation;
    if (window == 1) {
        nn::adam_step(bound, config_.adam, step_index);
        return;
    }
    const double inv = 1.0 / window;
    for (const auto& [param, var] : bound) {
        if (!var.requires_grad()) continue;
        const Tensor grad = var.grad_or_zero();
        auto it = accumulator.find(param);
        if (it == accumulator.end())
            it = accumulator.emplace(param, Tensor(param->value.shape())).first;
        for (std::int64_t i = 0; i < grad.size(); ++i) it->second[i] += grad[i] * inv;
    }
    if (step_index % window == 0) {
        for (auto& [param, grad] : accumulator)
            nn::adam_update_one(*param, grad, config_.adam, step_index / window);
        accumulator.clear();
    }
}

std::string Trainer::dump_batch(std::int64_t step_index, int src_index, int ref_index) const {
    std::filesystem::create_directories(config_.out_dir);
    const std::string path =
        config_.out_dir + "/dump-step-" + std::to_string(step_index) + ".uvt1";
    Uvt1Container container;
    container.add_f32("t_src", samples_[static_cast<std::size_t>(src_index)].contaminated_texture.pixels);
    container.add_f32("t_ref", samples_[static_cast<std::size_t>(ref_index)].contaminated_texture.pixels);
    container.add_i32("sample_indices", {2}, {src_index, ref_index});
    container.save(path);
    return path;
}

std::string Trainer::checkpoint_path(std::int64_t step) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ckpt-%06lld.uvt1", static_cast<long long>(step));
    return config_.out_dir + "/" + buf;
}

void Trainer::save_checkpoint_now() {
    if (!saved_checkpoints_.empty() && saved_checkpoints_.back() == step_) return;
    std::filesystem::create_directories(config_.out_dir);
    save_checkpoint(checkpoint_path(step_), net_, config_, step_);
    saved_checkpoints_.push_back(step_);
    while (static_cast<int>(saved_checkpoints_.size()) > config_.keep_checkpoints) {
        const std::string old = checkpoint_path(saved_checkpoints_.front());
        std::filesystem::remove(old);
        std::filesystem::remove(old + ".manifest");
        saved_checkpoints_.erase(saved_checkpoints_.begin());
    }
}

void Trainer::run() {
    std::filesystem::create_directories(config_.out_dir);
    const std::string csv_path = config_.out_dir + "/losses.csv";
    const bool fresh =
        !std::filesystem::exists(csv_path) || std::filesystem::file_size(csv_path) == 0;
    std::ofstream csv(csv_path, std::ios::binary | std::ios::app);
    if (!csv) throw IoError("cannot open loss log: " + csv_path);
    if (fresh) csv << loss_csv_header() << '\n';

    std::ofstream skips; // opened on first skip only
    while (step_ < config_.steps) {
        const StepRecord record = step_once();
        csv << loss_csv_row(record) << '\n';
        csv.flush();
        if (!record.skipped_regions.empty()) {
            if (!skips.is_open())
                skips.open(config_.out_dir + "/skipped_regions.log",
                           std::ios::binary | std::ios::app);
            for (const std::string& name : record.skipped_regions)
                skips << "step " << record.step << " skipped empty region " << name << '\n';
            skips.flush();
        }
        if (step_ % config_.checkpoint_every == 0 || step_ == config_.steps)
            save_checkpoint_now();
    }
}

RepairMetrics evaluate_repair(const EvalModel& full, const EvalModel* ablation,
                              const std::vector<SyntheticSample>& sources,
                              const std::vector<SyntheticSample>& references) {
    detail::require(full.net != nullptr, "evaluate_repair: full model is required");
    detail::require(!sources.empty(), "evaluate_repair: need at least one source sample");
    detail::require(ablation == nullptr || ablation->net != nullptr,
                    "evaluate_repair: ablation entry has no network");

    const int resolution = full.net->config().uv_resolution;
    const auto masks = builtin_region_masks_uv(resolution);
    Tensor region_union({resolution, resolution});
    for (const auto& [name, mask] : masks)
        for (std::int64_t i = 0; i < mask.size(); ++i)
            if (mask.data()[i] != 0.0) region_union.data()[i] = 1.0;

    TransferConfig full_cfg;
    full_cfg.fam_off = full.fam_off;
    full_cfg.mtm_off = full.mtm_off;
    TransferConfig ablation_cfg;
    if (ablation != nullptr) {
        ablation_cfg.fam_off = ablation->fam_off;
        ablation_cfg.mtm_off = ablation->mtm_off;
    }

    RepairMetrics metrics;
    double separation_sum = 0.0, err_full_sum = 0.0, err_ablation_sum = 0.0;
    std::size_t source_cursor = 0;
    for (const SyntheticSample& ref : references) {
        if (!ref.contaminated()) continue;
        const SyntheticSample& src = sources[source_cursor++ % sources.size()];

        const InferenceResult full_cont =
            full.net->transfer(src.contaminated_texture, ref.contaminated_texture, full_cfg);
        if (!full.fam_off) {
            detail::require(full_cont.fam_mask.rank() == 2,
                            "evaluate_repair: missing flip-attention mask");
            double clean_sum = 0.0, cont_sum = 0.0;
            std::int64_t clean_n = 0, cont_n = 0;
            for (std::int64_t i = 0; i < ref.contamination_mask.size(); ++i) {
                if (ref.contamination_mask.data()[i] != 0.0) {
                    cont_sum += full_cont.fam_mask.data()[i];
                    ++cont_n;
                } else {
                    clean_sum += full_cont.fam_mask.data()[i];
                    ++clean_n;
                }
            }
            detail::require(clean_n > 0 && cont_n > 0,
                            "evaluate_repair: degenerate contamination mask");
            separation_sum += clean_sum / clean_n - cont_sum / cont_n;
        }

        const InferenceResult full_clean =
            full.net->transfer(src.contaminated_texture, ref.clean_texture, full_cfg);
        const double e_full =
            region_l1(full_cont.texture.pixels, full_clean.texture.pixels, region_union);
        err_full_sum += e_full;

        if (ablation != nullptr) {
            const InferenceResult abl_cont = ablation->net->transfer(
                src.contaminated_texture, ref.contaminated_texture, ablation_cfg);
            const InferenceResult abl_clean = ablation->net->transfer(
                src.contaminated_texture, ref.clean_texture, ablation_cfg);
            const double e_ablation =
                region_l1(abl_cont.texture.pixels, abl_clean.texture.pixels, region_union);
            err_ablation_sum += e_ablation;
            if (e_full < e_ablation) ++metrics.full_wins;
        }
        ++metrics.samples;
    }

    if (metrics.samples > 0) {
        metrics.mask_separation = separation_sum / metrics.samples;
        metrics.err_full = err_full_sum / metrics.samples;
        metrics.err_ablation = err_ablation_sum / metrics.samples;
        metrics.win_fraction = static_cast<double>(metrics.full_wins) / metrics.samples;
    }
    return metrics;
}

double measure_cycle_l1(const TransferNet& net, const TransferConfig& config,
                        const std::vector<SyntheticSample>& samples, int pairs,
                        std::uint64_t seed) {
    detail::require(pairs >= 1, "measure_cycle_l1: pairs must be >= 1");
    std::vector<int> makeup, plain;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].domain == DomainTag::Makeup ? makeup : plain).push_back(static_cast<int>(i));
    detail::require(!makeup.empty() && !plain.empty(),
                    "measure_cycle_l1: need both domains");

    std::mt19937_64 rng = make_rng(seed, kCycleEvalStream);
    std::uniform_int_distribution<std::size_t> src_pick(0, plain.size() - 1);
    std::uniform_int_distribution<std::size_t> ref_pick(0, makeup.size() - 1);

    double sum = 0.0;
    for (int p = 0; p < pairs; ++p) {
        const SyntheticSample& src = samples[static_cast<std::size_t>(plain[src_pick(rng)])];
        const SyntheticSample& ref = samples[static_cast<std::size_t>(makeup[ref_pick(rng)])];
        const InferenceResult to_ref =
            net.transfer(src.contaminated_texture, ref.contaminated_texture, config);
        const InferenceResult back_src =
            net.transfer(to_ref.texture, src.contaminated_texture, config);
        const InferenceResult to_src =
            net.transfer(ref.contaminated_texture, src.contaminated_texture, config);
        const InferenceResult back_ref =
            net.transfer(to_src.texture, ref.contaminated_texture, config);
        const double l1_src = mean_l1(back_src.texture.pixels, src.contaminated_texture.pixels);
        const double l1_ref = mean_l1(back_ref.texture.pixels, ref.contaminated_texture.pixels);
        sum += 0.5 * (l1_src + l1_ref);
    }
    return sum / pairs;
}

double measure_self_transfer_l1(const TransferNet& net, const TransferConfig& config,
                                const std::vector<SyntheticSample>& samples) {
    detail::require(!samples.empty(), "measure_self_transfer_l1: no samples");
    double sum = 0.0;
    for (const SyntheticSample& sample : samples) {
        const InferenceResult out =
            net.transfer(sample.clean_texture, sample.clean_texture, config);
        sum += mean_l1(out.texture.pixels, sample.clean_texture.pixels);
    }
    return sum / static_cast<double>(samples.size());
}

namespace {

UVTexture input_texture(const TransferNet& net, const MorphableBasis& basis,
                        const FaceInput& input, FittedFace& fitted_out) {
    fitted_out = make_fitted_face(basis, input.coeffs);
    const int resolution = net.config().uv_resolution;
    if (input.image != nullptr) return extract_uv_texture(*input.image, fitted_out, resolution);
    UVTexture texture;
    texture.pixels = render_vertex_colors_uv(fitted_out, resolution);
    texture.validity = Tensor::ones({resolution, resolution});
    return texture;
}

} // namespace

TransferImageResult transfer_image(const TransferNet& net, const MorphableBasis& basis,
                                   const TransferImageRequest& request) {
    FittedFace fitted_src, fitted_ref, fitted_ref2;
    const UVTexture t_src = input_texture(net, basis, request.source, fitted_src);
    const UVTexture t_ref = input_texture(net, basis, request.reference, fitted_ref);

    InferenceResult generated;
    if (request.reference2.has_value()) {
        const UVTexture t_ref2 = input_texture(net, basis, *request.reference2, fitted_ref2);
        generated =
            net.transfer_interpolated(t_src, t_ref, t_ref2, request.interp_w, request.transfer);
    } else {
        generated = net.transfer(t_src, t_ref, request.transfer);
    }

    int h = 0, w = 0;
    if (request.source.image != nullptr) {
        h = request.source.image->dim(0);
        w = request.source.image->dim(1);
    } else {
        detail::require(request.image_size >= 32,
                        "transfer_image: image_size is required when synthesizing the source");
        h = w = request.image_size;
    }

    TransferImageResult result;
    result.image = rasterize(fitted_src, generated.texture, h, w);
    if (request.source.image != nullptr) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (result.image.face_mask.at(y, x) != 0.0) continue;
                for (int c = 0; c < 3; ++c)
                    result.image.pixels.at(y, x, c) = request.source.image->at(y, x, c);
            }
    }
    result.texture = std::move(generated.texture);
    result.fam_mask = std::move(generated.fam_mask);
    result.attention = std::move(generated.attention);
    return result;
}

} // namespace uvmt
