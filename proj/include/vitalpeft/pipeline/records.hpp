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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vitalpeft::pipeline {

inline constexpr const char* kVitalMeanBP = "MeanBP";
inline constexpr const char* kVitalHR = "HR";

/// One raw observation. Timestamps are integer epoch seconds.
struct VitalsRecord {
    std::string patient_id;
    std::string vital;
    std::int64_t timestamp = 0;
    double value = 0.0;

    bool operator==(const VitalsRecord&) const = default;
};

struct RejectedRow {
    std::size_t line = 0;  // 1-based line number in the file
    std::string text;
    std::string reason;
};

struct IngestResult {
    std::vector<VitalsRecord> records;
    std::vector<RejectedRow> rejects;
};

/// Reads `patient_id,vital,timestamp,value` CSV. A missing or wrong header is a
/// FormatError; malformed rows are returned in `rejects` with a reason.
IngestResult ingest_csv(std::istream& in);
IngestResult ingest_csv(const std::filesystem::path& path);

void write_csv(std::ostream& out, const std::vector<VitalsRecord>& records);
void write_csv(const std::filesystem::path& path, const std::vector<VitalsRecord>& records);

/// Diagnosis time per patient; windows end right before it.
struct Anchor {
    std::string patient_id;
    std::int64_t time = 0;

    bool operator==(const Anchor&) const = default;
};

/// `patient_id,anchor_time` CSV with header.
std::vector<Anchor> read_anchors_csv(std::istream& in);
std::vector<Anchor> read_anchors_csv(const std::filesystem::path& path);
void write_anchors_csv(std::ostream& out, const std::vector<Anchor>& anchors);
void write_anchors_csv(const std::filesystem::path& path, const std::vector<Anchor>& anchors);

}  // namespace vitalpeft::pipeline
