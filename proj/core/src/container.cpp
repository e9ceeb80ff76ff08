/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/container.cpp
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
#include "uvmt/container.hpp"

#include <cstring>
#include <fstream>

namespace uvmt {

namespace {

constexpr char kMagic[4] = {'U', 'V', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                          static_cast<std::uint32_t>(data_[pos_ + 1]) << 8 |
                          static_cast<std::uint32_t>(data_[pos_ + 2]) << 16 |
                          static_cast<std::uint32_t>(data_[pos_ + 3]) << 24;
        pos_ += 4;
        return v;
    }

    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    std::vector<std::uint8_t> bytes(std::size_t n) {
        need(n);
        std::vector<std::uint8_t> b(data_ + pos_, data_ + pos_ + n);
        pos_ += n;
        return b;
    }

    bool exhausted() const { return pos_ == size_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > size_) throw IoError("UVT1: truncated container");
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

} // namespace

std::size_t dtype_width(Dtype d) {
    switch (d) {
    case Dtype::Float32: return 4;
    case Dtype::Int32: return 4;
    case Dtype::Uint8: return 1;
    }
    throw IoError("UVT1: unknown dtype tag " + std::to_string(static_cast<std::uint32_t>(d)));
}

void Uvt1Container::add_record(TensorRecord rec) {
    if (has(rec.name)) throw IoError("UVT1: duplicate tensor name '" + rec.name + "'");
    const std::size_t expect = static_cast<std::size_t>(rec.numel()) * dtype_width(rec.dtype);
    if (rec.payload.size() != expect)
        throw IoError("UVT1: payload size mismatch for '" + rec.name + "'");
    records_.push_back(std::move(rec));
}

void Uvt1Container::add_f32(const std::string& name, const std::vector<int>& dims,
                            const double* data) {
    TensorRecord rec;
    rec.name = name;
    rec.dtype = Dtype::Float32;
    rec.dims = dims;
    const std::int64_t n = rec.numel();
    rec.payload.resize(static_cast<std::size_t>(n) * 4);
    for (std::int64_t i = 0; i < n; ++i) {
        const float f = static_cast<float>(data[i]);
        std::memcpy(rec.payload.data() + i * 4, &f, 4);
    }
    add_record(std::move(rec));
}

void Uvt1Container::add_i32(const std::string& name, const std::vector<int>& dims,
                            const std::vector<std::int32_t>& data) {
    TensorRecord rec;
    rec.name = name;
    rec.dtype = Dtype::Int32;
    rec.dims = dims;
    if (static_cast<std::int64_t>(data.size()) != rec.numel())
        throw IoError("UVT1: int32 data size mismatch for '" + name + "'");
    rec.payload.resize(data.size() * 4);
    std::memcpy(rec.payload.data(), data.data(), rec.payload.size());
    add_record(std::move(rec));
}

void Uvt1Container::add_u8(const std::string& name, const std::vector<int>& dims,
                           const std::vector<std::uint8_t>& data) {
    TensorRecord rec;
    rec.name = name;
    rec.dtype = Dtype::Uint8;
    rec.dims = dims;
    rec.payload = data;
    add_record(std::move(rec));
}

bool Uvt1Container::has(const std::string& name) const {
    for (const auto& r : records_)
        if (r.name == name) return true;
    return false;
}

const TensorRecord& Uvt1Container::get(const std::string& name) const {
    for (const auto& r : records_)
        if (r.name == name) return r;
    throw IoError("UVT1: no tensor named '" + name + "'");
}

Tensor Uvt1Container::get_tensor(const std::string& name) const {
    const TensorRecord& rec = get(name);
    Tensor t(rec.dims);
    const std::int64_t n = rec.numel();
    switch (rec.dtype) {
    case Dtype::Float32:
        for (std::int64_t i = 0; i < n; ++i) {
            float f;
            std::memcpy(&f, rec.payload.data() + i * 4, 4);
            t[i] = static_cast<double>(f);
        }
        break;
    case Dtype::Int32:
        for (std::int64_t i = 0; i < n; ++i) {
            std::int32_t v;
            std::memcpy(&v, rec.payload.data() + i * 4, 4);
            t[i] = static_cast<double>(v);
        }
        break;
    case Dtype::Uint8:
        for (std::int64_t i = 0; i < n; ++i) t[i] = static_cast<double>(rec.payload[i]);
        break;
    }
    return t;
}

std::vector<std::int32_t> Uvt1Container::get_i32(const std::string& name) const {
    const TensorRecord& rec = get(name);
    if (rec.dtype != Dtype::Int32) throw IoError("UVT1: '" + name + "' is not int32");
    std::vector<std::int32_t> v(static_cast<std::size_t>(rec.numel()));
    std::memcpy(v.data(), rec.payload.data(), rec.payload.size());
    return v;
}

std::vector<std::uint8_t> Uvt1Container::get_u8(const std::string& name) const {
    const TensorRecord& rec = get(name);
    if (rec.dtype != Dtype::Uint8) throw IoError("UVT1: '" + name + "' is not uint8");
    return rec.payload;
}

std::vector<std::string> Uvt1Container::names() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.name);
    return out;
}

void Uvt1Container::save(const std::string& path) const {
    std::vector<std::uint8_t> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, static_cast<std::uint32_t>(records_.size()));
    for (const auto& r : records_) {
        put_u32(buf, static_cast<std::uint32_t>(r.name.size()));
        buf.insert(buf.end(), r.name.begin(), r.name.end());
        put_u32(buf, static_cast<std::uint32_t>(r.dims.size()));
        for (int d : r.dims) put_u32(buf, static_cast<std::uint32_t>(d));
        put_u32(buf, static_cast<std::uint32_t>(r.dtype));
        buf.insert(buf.end(), r.payload.begin(), r.payload.end());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("UVT1: cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError("UVT1: write failed for '" + path + "'");
}

Uvt1Container Uvt1Container::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("UVT1: cannot open '" + path + "'");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
    ByteReader rd(buf.data(), buf.size());
    if (rd.str(4) != std::string(kMagic, 4)) throw IoError("UVT1: bad magic in '" + path + "'");
    const std::uint32_t count = rd.u32();
    Uvt1Container c;
    for (std::uint32_t i = 0; i < count; ++i) {
        TensorRecord rec;
        rec.name = rd.str(rd.u32());
        const std::uint32_t rank = rd.u32();
        if (rank > 8) throw IoError("UVT1: implausible rank in '" + path + "'");
        rec.dims.resize(rank);
        for (std::uint32_t d = 0; d < rank; ++d) rec.dims[d] = static_cast<int>(rd.u32());
        rec.dtype = static_cast<Dtype>(rd.u32());
        rec.payload = rd.bytes(static_cast<std::size_t>(rec.numel()) * dtype_width(rec.dtype));
        c.add_record(std::move(rec));
    }
    if (!rd.exhausted()) throw IoError("UVT1: trailing bytes in '" + path + "'");
    return c;
}

} // namespace uvmt
