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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vitalpeft/numerics/rng.hpp"
#include "vitalpeft/pipeline/records.hpp"
#include "vitalpeft/pipeline/windows.hpp"

namespace vitalpeft::pipeline {

struct VitalRange {
    double min = 0.0;
    double max = 0.0;
    bool operator==(const VitalRange&) const = default;
};

/// Per-vital affine map x' = (x - min) / (max - min); a degenerate range maps to 0.5.
/// Values outside the fitted range are not clipped.
class MinMaxScaler {
public:
    /// Ranges over every context and horizon value of each vital. FitError when empty.
    static MinMaxScaler fit(const std::vector<VitalsWindow>& train);

    double apply(const std::string& vital, double x) const;
    double inverse(const std::string& vital, double y) const;
    VitalsWindow apply(const VitalsWindow& w) const;
    VitalsWindow inverse(const VitalsWindow& w) const;

    const std::map<std::string, VitalRange>& ranges() const { return ranges_; }
    void set_range(const std::string& vital, VitalRange r) { ranges_[vital] = r; }

    bool operator==(const MinMaxScaler&) const = default;

private:
    const VitalRange& range(const std::string& vital) const;
    std::map<std::string, VitalRange> ranges_;
};

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };
std::string_view to_string(Split s);

struct SplitDataset {
    std::vector<VitalsWindow> train, val, test;
    MinMaxScaler scaler;
    std::map<std::string, Split> manifest;  // patient -> split
    std::array<std::size_t, 3> ratio{8, 1, 1};

    const std::vector<VitalsWindow>& get(Split s) const;
    std::size_t size() const { return train.size() + val.size() + test.size(); }
};

/// Shuffles patients with `rng`, seeds each split with one patient, then hands each
/// remaining patient to the split furthest below its window-count target (ties go
/// train, val, test). Windows inside a split are in key order. The scaler is left empty.
/// SplitError with fewer than 3 patients.
SplitDataset split_by_patient(std::vector<VitalsWindow> windows, numerics::Rng& rng,
                              std::array<std::size_t, 3> ratio = {8, 1, 1});

struct PipelineConfig {
    std::int64_t grid_seconds = 300;
    WindowShape shape{};
    std::size_t lowpass_width = 5;
    std::array<std::size_t, 3> ratio{8, 1, 1};
};

struct PreparedDataset {
    SplitDataset data;
    std::size_t series = 0;
    std::vector<std::string> skipped;
};

/// Resample, window, low-pass, split by patient, fit the scaler on train and scale
/// every split. With no anchors for a patient, its window ends at the last tick.
PreparedDataset prepare_dataset(const std::vector<VitalsRecord>& records, const std::vector<Anchor>& anchors,
                                const PipelineConfig& cfg, numerics::Rng& split_rng);

// Dataset file layout (little-endian):
//   "VPDATA\0\0"                    8-byte magic
//   u32 version (=1)
//   str header                      key = value lines: shape, ratio, counts, scaler ranges
//   u64 patients, then per patient: char[32] id, u8 split
//   u64 windows, then fixed-width records in train, val, test order:
//     char[32] patient_id, char[16] vital, i64 anchor_time, u8 split,
//     f64 context[context_len], f64 horizon[horizon_len]
inline constexpr std::uint32_t kDatasetFormatVersion = 1;
inline constexpr std::size_t kPatientIdWidth = 32;
inline constexpr std::size_t kVitalWidth = 16;

void save_dataset(const SplitDataset& data, std::ostream& out);
SplitDataset load_dataset(std::istream& in);
void save_dataset(const SplitDataset& data, const std::filesystem::path& path);
SplitDataset load_dataset(const std::filesystem::path& path);

}  // namespace vitalpeft::pipeline
