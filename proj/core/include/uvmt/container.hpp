/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/container.hpp
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

#include <cstdint>
#include <string>
#include <vector>

#include "uvmt/tensor.hpp"

namespace uvmt {

/// "UVT1" tensor container. Binary layout, all integers little-endian:
///   magic "UVT1" | u32 record count | records...
/// Record:
///   u32 name length | UTF-8 name | u32 rank | u32 dims[rank] |
///   u32 dtype (1 = float32, 2 = int32, 3 = uint8) | row-major payload.
/// Names are unique within a container.
enum class Dtype : std::uint32_t {
    Float32 = 1,
    Int32 = 2,
    Uint8 = 3,
};

std::size_t dtype_width(Dtype d);

struct TensorRecord {
    std::string name;
    Dtype dtype = Dtype::Float32;
    std::vector<int> dims;
    std::vector<std::uint8_t> payload;

    std::int64_t numel() const { return shape_numel(dims); }
};

class Uvt1Container {
public:
    /// Doubles are stored as float32 (round to nearest).
    void add_f32(const std::string& name, const std::vector<int>& dims, const double* data);
    void add_f32(const std::string& name, const Tensor& t) { add_f32(name, t.shape(), t.data()); }
    void add_i32(const std::string& name, const std::vector<int>& dims,
                 const std::vector<std::int32_t>& data);
    void add_u8(const std::string& name, const std::vector<int>& dims,
                const std::vector<std::uint8_t>& data);

    bool has(const std::string& name) const;
    const TensorRecord& get(const std::string& name) const;

    /// Float32 or integer record widened to a double tensor.
    Tensor get_tensor(const std::string& name) const;
    std::vector<std::int32_t> get_i32(const std::string& name) const;
    std::vector<std::uint8_t> get_u8(const std::string& name) const;

    std::vector<std::string> names() const;
    std::size_t record_count() const { return records_.size(); }

    void save(const std::string& path) const;
    static Uvt1Container load(const std::string& path);

private:
    void add_record(TensorRecord rec);
    std::vector<TensorRecord> records_;
};

} // namespace uvmt
