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

#include "vitalpeft/pipeline/windows.hpp"

#include <algorithm>
#include <map>

#include "vitalpeft/errors.hpp"

namespace vitalpeft::pipeline {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::vector<RegularSeries> resample_and_impute(const std::vector<VitalsRecord>& records, std::int64_t grid_seconds) {
    if (grid_seconds <= 0) throw ConfigError("grid_seconds must be positive");
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::int64_t, double>>> grouped;
    for (const auto& r : records) grouped[{r.patient_id, r.vital}].emplace_back(r.timestamp, r.value);

    std::vector<RegularSeries> out;
    out.reserve(grouped.size());
    for (auto& [key, obs] : grouped) {
        std::stable_sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        RegularSeries s;
        s.patient_id = key.first;
        s.vital = key.second;
        s.step = grid_seconds;
        s.start = floor_div(obs.front().first, grid_seconds) * grid_seconds;
        const std::int64_t last = floor_div(obs.back().first, grid_seconds) * grid_seconds;
        const auto n = static_cast<std::size_t>((last - s.start) / grid_seconds) + 1;
        s.values.assign(n, 0.0);
        s.valid.assign(n, 0);
        std::size_t next = 0;
        bool have = false;
        double current = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto t = s.tick_time(i);
            while (next < obs.size() && obs[next].first <= t) {
                current = obs[next].second;
                have = true;
                ++next;
            }
            s.values[i] = have ? current : 0.0;
            s.valid[i] = have ? 1 : 0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

WindowingResult make_windows(const RegularSeries& series, std::span<const std::int64_t> anchors,
                             const WindowShape& shape) {
    WindowingResult result;
    const auto total = static_cast<std::int64_t>(shape.total());
    auto skip = [&](std::int64_t anchor, const std::string& why) {
        result.skipped.push_back(series.patient_id + "/" + series.vital + " anchor " + std::to_string(anchor) +
                                 ": " + why);
    };
    for (const auto anchor : anchors) {
        // Index of the latest tick strictly before the anchor.
        const std::int64_t last = floor_div(anchor - series.start - 1, series.step);
        const std::int64_t first = last - total + 1;
        if (first < 0) {
            skip(anchor, "fewer than " + std::to_string(total) + " ticks of history");
            continue;
        }
        if (series.size() == 0) {
            skip(anchor, "series is empty");
            continue;
        }
        // Ticks after the last observation carry it forward, like interior gaps.
        auto tick = [&](std::int64_t i) {
            const auto j = std::min<std::size_t>(static_cast<std::size_t>(i), series.size() - 1);
            return std::pair<double, bool>{series.values[j], series.valid[j] != 0};
        };
        VitalsWindow w;
        w.patient_id = series.patient_id;
        w.vital = series.vital;
        w.anchor_time = anchor;
        bool ok = true;
        for (std::int64_t i = first; i <= last; ++i) {
            const auto [value, valid] = tick(i);
            ok = ok && valid;
            if (i - first < static_cast<std::int64_t>(shape.context_len)) {
                w.context.push_back(value);
            } else {
                w.horizon.push_back(value);
            }
        }
        if (!ok) {
            skip(anchor, "window starts before the first observation");
            continue;
        }
        result.windows.push_back(std::move(w));
    }
    return result;
}

std::vector<double> lowpass(std::span<const double> series, std::size_t width) {
    if (width == 0 || width % 2 == 0) {
        throw ConfigError("low-pass width must be odd and positive, got " + std::to_string(width));
    }
    const std::size_t n = series.size();
    const std::size_t half = width / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        // Averaging offsets from the center keeps constant stretches exactly fixed.
        double offset = 0.0;
        for (std::size_t j = i - h; j <= i + h; ++j) offset += series[j] - series[i];
        out[i] = series[i] + offset / static_cast<double>(2 * h + 1);
    }
    return out;
}

VitalsWindow lowpass_window(const VitalsWindow& w, std::size_t width) {
    VitalsWindow out = w;
    out.context = lowpass(w.context, width);
    out.horizon = lowpass(w.horizon, width);
    return out;
}

}  // namespace vitalpeft::pipeline
