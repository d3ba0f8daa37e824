// Copyright 2026 The vitalpeft Authors.
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

#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace vitalpeft {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written as raw little-endian words");

/// Little-endian writer for the checkpoint and dataset formats.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void bytes(const void* data, std::size_t n);
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void i64(std::int64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void f64s(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
    /// u32 length prefix followed by raw bytes.
    void str(const std::string& s);
    /// Exactly `width` bytes, zero padded; longer strings are a format error.
    void fixed_str(const std::string& s, std::size_t width);

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    void bytes(void* data, std::size_t n);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64();
    double f64();
    void f64s(std::span<double> out) { bytes(out.data(), out.size() * sizeof(double)); }
    std::string str(std::size_t max_len = 1u << 24);
    std::string fixed_str(std::size_t width);
    void expect_magic(const std::string& magic);

private:
    std::istream& in_;
};

}  // namespace vitalpeft
