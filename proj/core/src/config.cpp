/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/config.cpp
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
#include "uvmt/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "uvmt/errors.hpp"

namespace uvmt {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), last, out);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
    return out;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    std::int64_t out = 0;
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), last, out);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("config key '" + key + "': not an integer: '" + value + "'");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), last, out);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("config key '" + key + "': not an unsigned integer: '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': not a boolean: '" + value + "'");
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void apply(TrainConfig& c, const std::string& section, const std::string& key,
           const std::string& value) {
    const std::string full = section + "." + key;
    if (section == "dataset") {
        if (key == "n_makeup") c.data.n_makeup = static_cast<int>(parse_int(full, value));
        else if (key == "n_plain") c.data.n_plain = static_cast<int>(parse_int(full, value));
        else if (key == "contaminated_fraction") c.data.contaminated_fraction = parse_double(full, value);
        else if (key == "yaw_range_deg") c.data.yaw_range_deg = parse_double(full, value);
        else if (key == "pitch_range_deg") c.data.pitch_range_deg = parse_double(full, value);
        else throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "net") {
        if (key == "uv_resolution") c.net.uv_resolution = static_cast<int>(parse_int(full, value));
        else if (key == "feature_channels") c.net.feature_channels = static_cast<int>(parse_int(full, value));
        else if (key == "residual_blocks") c.net.residual_blocks = static_cast<int>(parse_int(full, value));
        else if (key == "disc_channels") c.net.disc_channels = static_cast<int>(parse_int(full, value));
        else throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "train") {
        if (key == "steps") c.steps = parse_int(full, value);
        else if (key == "seed") c.seed = parse_uint(full, value);
        else if (key == "lr") c.adam.lr = parse_double(full, value);
        else if (key == "beta1") c.adam.beta1 = parse_double(full, value);
        else if (key == "beta2") c.adam.beta2 = parse_double(full, value);
        else if (key == "eps") c.adam.eps = parse_double(full, value);
        else if (key == "image_size") c.image_size = static_cast<int>(parse_int(full, value));
        else if (key == "checkpoint_every") c.checkpoint_every = static_cast<int>(parse_int(full, value));
        else if (key == "keep_checkpoints") c.keep_checkpoints = static_cast<int>(parse_int(full, value));
        else if (key == "grad_accumulation") c.grad_accumulation = static_cast<int>(parse_int(full, value));
        else if (key == "fam_off") c.fam_off = parse_bool(full, value);
        else if (key == "mtm_off") c.mtm_off = parse_bool(full, value);
        else if (key == "minimax_generator") c.minimax_generator = parse_bool(full, value);
        else if (key == "out_dir") c.out_dir = value;
        else throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "loss") {
        if (key == "lambda1") c.weights.lambda1 = parse_double(full, value);
        else if (key == "lambda2") c.weights.lambda2 = parse_double(full, value);
        else if (key == "lambda3") c.weights.lambda3 = parse_double(full, value);
        else if (key == "lambda_a") c.weights.lambda_a = parse_double(full, value);
        else if (key == "lambda_m") c.weights.lambda_m = parse_double(full, value);
        else if (key == "lambda_c") c.weights.lambda_c = parse_double(full, value);
        else if (key == "lambda_p") c.weights.lambda_p = parse_double(full, value);
        else throw ConfigError("unknown config key '" + full + "'");
    } else {
        throw ConfigError("unknown config section '" + section + "'");
    }
}

} // namespace

TrainConfig parse_train_config_text(const std::string& text) {
    TrainConfig config;
    std::istringstream lines(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            // Validate the section name eagerly so typos fail even when empty.
            if (section != "dataset" && section != "net" && section != "train" &&
                section != "loss")
                throw ConfigError("unknown config section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value, got '" +
                              line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("config key '" + key + "' appears before any [section]");
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        apply(config, section, key, value);
    }
    validate_train_config(config);
    return config;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_train_config_text(buffer.str());
}

std::string train_config_text(const TrainConfig& c) {
    std::ostringstream out;
    out << "[dataset]\n";
    out << "n_makeup = " << c.data.n_makeup << "\n";
    out << "n_plain = " << c.data.n_plain << "\n";
    out << "contaminated_fraction = " << format_double(c.data.contaminated_fraction) << "\n";
    out << "yaw_range_deg = " << format_double(c.data.yaw_range_deg) << "\n";
    out << "pitch_range_deg = " << format_double(c.data.pitch_range_deg) << "\n";
    out << "[net]\n";
    out << "uv_resolution = " << c.net.uv_resolution << "\n";
    out << "feature_channels = " << c.net.feature_channels << "\n";
    out << "residual_blocks = " << c.net.residual_blocks << "\n";
    out << "disc_channels = " << c.net.disc_channels << "\n";
    out << "[train]\n";
    out << "steps = " << c.steps << "\n";
    out << "seed = " << c.seed << "\n";
    out << "lr = " << format_double(c.adam.lr) << "\n";
    out << "beta1 = " << format_double(c.adam.beta1) << "\n";
    out << "beta2 = " << format_double(c.adam.beta2) << "\n";
    out << "eps = " << format_double(c.adam.eps) << "\n";
    out << "image_size = " << c.image_size << "\n";
    out << "checkpoint_every = " << c.checkpoint_every << "\n";
    out << "keep_checkpoints = " << c.keep_checkpoints << "\n";
    out << "grad_accumulation = " << c.grad_accumulation << "\n";
    out << "fam_off = " << (c.fam_off ? "true" : "false") << "\n";
    out << "mtm_off = " << (c.mtm_off ? "true" : "false") << "\n";
    out << "minimax_generator = " << (c.minimax_generator ? "true" : "false") << "\n";
    out << "out_dir = " << c.out_dir << "\n";
    out << "[loss]\n";
    out << "lambda1 = " << format_double(c.weights.lambda1) << "\n";
    out << "lambda2 = " << format_double(c.weights.lambda2) << "\n";
    out << "lambda3 = " << format_double(c.weights.lambda3) << "\n";
    out << "lambda_a = " << format_double(c.weights.lambda_a) << "\n";
    out << "lambda_m = " << format_double(c.weights.lambda_m) << "\n";
    out << "lambda_c = " << format_double(c.weights.lambda_c) << "\n";
    out << "lambda_p = " << format_double(c.weights.lambda_p) << "\n";
    return out.str();
}

void validate_train_config(const TrainConfig& config) {
    validate_net_config(config.net);
    validate_loss_weights(config.weights);
    detail::require(config.steps >= 0, "train config: steps must be nonnegative");
    detail::require(config.adam.lr > 0.0, "train config: lr must be positive");
    detail::require(config.adam.beta1 >= 0.0 && config.adam.beta1 < 1.0,
                    "train config: beta1 must lie in [0,1)");
    detail::require(config.adam.beta2 >= 0.0 && config.adam.beta2 < 1.0,
                    "train config: beta2 must lie in [0,1)");
    detail::require(config.adam.eps > 0.0, "train config: eps must be positive");
    detail::require(config.image_size >= 0, "train config: image_size must be nonnegative");
    detail::require(config.image_size == 0 || config.image_size >= 32,
                    "train config: image_size must be 0 (auto) or >= 32");
    detail::require(config.checkpoint_every >= 1, "train config: checkpoint_every must be >= 1");
    detail::require(config.keep_checkpoints >= 1, "train config: keep_checkpoints must be >= 1");
    detail::require(config.grad_accumulation >= 1,
                    "train config: grad_accumulation must be >= 1");
    detail::require(config.checkpoint_every % config.grad_accumulation == 0,
                    "train config: checkpoint_every must be a multiple of grad_accumulation "
                    "so checkpoints never land inside an accumulation window");
    detail::require(config.data.n_makeup >= 1 && config.data.n_plain >= 1,
                    "train config: dataset sizes must be >= 1");
    detail::require(!config.out_dir.empty(), "train config: out_dir must not be empty");
}

} // namespace uvmt
