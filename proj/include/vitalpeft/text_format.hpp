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

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace vitalpeft {

/// Shortest-form-agnostic, round-trippable rendering ("%.17g").
std::string format_double(double v);

/// Fixed-point rendering with `decimals` digits, used by human-facing reports.
std::string format_fixed(double v, int decimals);

/// Parses `key = value` lines; blank lines and lines starting with '#' or ';' are skipped.
std::map<std::string, std::string> parse_key_values(const std::string& text);

std::string trim(std::string_view s);

std::size_t parse_size(const std::string& s, const std::string& what);
std::uint64_t parse_u64(const std::string& s, const std::string& what);
double parse_real(const std::string& s, const std::string& what);
bool parse_bool(const std::string& s, const std::string& what);

}  // namespace vitalpeft
