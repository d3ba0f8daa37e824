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

#include "vitalpeft/binary_io.hpp"

#include "vitalpeft/errors.hpp"

namespace vitalpeft {

void BinaryWriter::bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed");
}

void BinaryWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
}

void BinaryWriter::fixed_str(const std::string& s, std::size_t width) {
    if (s.size() > width) {
        throw FormatError("string '" + s + "' exceeds fixed field width " + std::to_string(width));
    }
    std::string padded = s;
    padded.resize(width, '\0');
    bytes(padded.data(), width);
}

void BinaryReader::bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("unexpected end of file");
}

std::uint8_t BinaryReader::u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
}
std::uint32_t BinaryReader::u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
}
std::uint64_t BinaryReader::u64() {
    std::uint64_t v;
    bytes(&v, 8);
    return v;
}
std::int64_t BinaryReader::i64() {
    std::int64_t v;
    bytes(&v, 8);
    return v;
}
double BinaryReader::f64() {
    double v;
    bytes(&v, 8);
    return v;
}

std::string BinaryReader::str(std::size_t max_len) {
    const auto n = u32();
    if (n > max_len) throw FormatError("string length " + std::to_string(n) + " exceeds limit");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
}

std::string BinaryReader::fixed_str(std::size_t width) {
    std::string s(width, '\0');
    bytes(s.data(), width);
    const auto end = s.find('\0');
    if (end != std::string::npos) s.resize(end);
    return s;
}

void BinaryReader::expect_magic(const std::string& magic) {
    std::string got(magic.size(), '\0');
    bytes(got.data(), got.size());
    if (got != magic) throw FormatError("bad magic: expected '" + magic + "'");
}

}  // namespace vitalpeft
