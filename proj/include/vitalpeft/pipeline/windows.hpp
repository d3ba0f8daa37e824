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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vitalpeft/pipeline/records.hpp"

namespace vitalpeft::pipeline {

/// One (patient, vital) series on a regular grid. `valid[i] == 0` marks ticks before
/// the first observation, which forward filling cannot reach.
struct RegularSeries {
    std::string patient_id;
    std::string vital;
    std::int64_t start = 0;  // time of tick 0, a multiple of `step`
    std::int64_t step = 300;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    std::int64_t tick_time(std::size_t i) const { return start + static_cast<std::int64_t>(i) * step; }
    std::size_t size() const { return values.size(); }
};

/// Aligns observations to grid ticks (multiples of `grid_seconds`); each tick takes the
/// latest observation at or before it. Output is sorted by (patient_id, vital).
/// Repeated timestamps keep the row that appears last.
std::vector<RegularSeries> resample_and_impute(const std::vector<VitalsRecord>& records,
                                               std::int64_t grid_seconds = 300);

struct WindowKey {
    std::string patient_id;
    std::string vital;
    std::int64_t anchor_time = 0;

    auto operator<=>(const WindowKey&) const = default;
    bool operator==(const WindowKey&) const = default;
};

struct VitalsWindow {
    std::string patient_id;
    std::string vital;
    std::int64_t anchor_time = 0;
    std::vector<double> context;
    std::vector<double> horizon;

    WindowKey key() const { return {patient_id, vital, anchor_time}; }
    bool operator==(const VitalsWindow&) const = default;
};

struct WindowShape {
    std::size_t context_len = 72;
    std::size_t horizon_len = 36;
    std::size_t total() const { return context_len + horizon_len; }
};

struct WindowingResult {
    std::vector<VitalsWindow> windows;
    std::vector<std::string> skipped;  // one line per anchor that produced no window
};

/// For each anchor, the `shape.total()` grid ticks strictly before it: the first
/// `context_len` form the context, the rest the horizon. Ticks past the series end
/// carry the last observation forward. Anchors without enough valid history are
/// skipped and reported.
WindowingResult make_windows(const RegularSeries& series, std::span<const std::int64_t> anchors,
                             const WindowShape& shape = {});

/// Centered moving average of odd `width`; near the edges the window shrinks
/// symmetrically. ConfigError when width is even or zero.
std::vector<double> lowpass(std::span<const double> series, std::size_t width = 5);

/// Smooths context and horizon separately so no horizon value leaks into the context.
VitalsWindow lowpass_window(const VitalsWindow& w, std::size_t width = 5);

}  // namespace vitalpeft::pipeline
