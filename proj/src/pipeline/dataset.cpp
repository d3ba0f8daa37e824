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

#include "vitalpeft/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "vitalpeft/binary_io.hpp"
#include "vitalpeft/errors.hpp"
#include "vitalpeft/text_format.hpp"

namespace vitalpeft::pipeline {

namespace {

const std::string kMagic("VPDATA\0\0", 8);

bool key_less(const VitalsWindow& a, const VitalsWindow& b) { return a.key() < b.key(); }

}  // namespace

MinMaxScaler MinMaxScaler::fit(const std::vector<VitalsWindow>& train) {
    MinMaxScaler s;
    for (const auto& w : train) {
        auto it = s.ranges_.find(w.vital);
        if (it == s.ranges_.end()) {
            it = s.ranges_.emplace(w.vital, VitalRange{std::numeric_limits<double>::infinity(),
                                                       -std::numeric_limits<double>::infinity()})
                     .first;
        }
        for (const auto* part : {&w.context, &w.horizon}) {
            for (double v : *part) {
                it->second.min = std::min(it->second.min, v);
                it->second.max = std::max(it->second.max, v);
            }
        }
    }
    for (const auto& [vital, r] : s.ranges_) {
        if (!(r.min <= r.max)) throw FitError("vital '" + vital + "' has no training values");
    }
    if (s.ranges_.empty()) throw FitError("cannot fit the scaler without training windows");
    return s;
}

const VitalRange& MinMaxScaler::range(const std::string& vital) const {
    auto it = ranges_.find(vital);
    if (it == ranges_.end()) throw DataError("scaler has no range for vital '" + vital + "'");
    return it->second;
}

double MinMaxScaler::apply(const std::string& vital, double x) const {
    const auto& r = range(vital);
    if (r.max == r.min) return 0.5;
    return (x - r.min) / (r.max - r.min);
}

double MinMaxScaler::inverse(const std::string& vital, double y) const {
    const auto& r = range(vital);
    if (r.max == r.min) return r.min;
    return y * (r.max - r.min) + r.min;
}

VitalsWindow MinMaxScaler::apply(const VitalsWindow& w) const {
    VitalsWindow out = w;
    for (auto& v : out.context) v = apply(w.vital, v);
    for (auto& v : out.horizon) v = apply(w.vital, v);
    return out;
}

VitalsWindow MinMaxScaler::inverse(const VitalsWindow& w) const {
    VitalsWindow out = w;
    for (auto& v : out.context) v = inverse(w.vital, v);
    for (auto& v : out.horizon) v = inverse(w.vital, v);
    return out;
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

const std::vector<VitalsWindow>& SplitDataset::get(Split s) const {
    switch (s) {
        case Split::Train: return train;
        case Split::Val: return val;
        case Split::Test: return test;
    }
    return train;
}

SplitDataset split_by_patient(std::vector<VitalsWindow> windows, numerics::Rng& rng, std::array<std::size_t, 3> ratio) {
    const std::size_t ratio_sum = ratio[0] + ratio[1] + ratio[2];
    if (ratio_sum == 0) throw ConfigError("split ratio must not be all zero");
    std::map<std::string, std::size_t> counts;
    for (const auto& w : windows) ++counts[w.patient_id];
    if (counts.size() < 3) {
        throw SplitError("need at least 3 patients to split, got " + std::to_string(counts.size()));
    }
    std::vector<std::string> patients;
    patients.reserve(counts.size());
    for (const auto& [id, n] : counts) patients.push_back(id);
    for (std::size_t i = patients.size() - 1; i > 0; --i) std::swap(patients[i], patients[rng.below(i + 1)]);

    const double total = static_cast<double>(windows.size());
    std::array<double, 3> target{};
    for (std::size_t k = 0; k < 3; ++k) target[k] = total * static_cast<double>(ratio[k]) / static_cast<double>(ratio_sum);
    std::array<double, 3> have{};

    SplitDataset out;
    out.ratio = ratio;
    for (std::size_t i = 0; i < patients.size(); ++i) {
        std::size_t k = i;
        if (i >= 3) {
            k = 0;
            for (std::size_t c = 1; c < 3; ++c) {
                if (target[c] - have[c] > target[k] - have[k]) k = c;
            }
        }
        out.manifest[patients[i]] = static_cast<Split>(k);
        have[k] += static_cast<double>(counts[patients[i]]);
    }
    for (auto& w : windows) {
        switch (out.manifest.at(w.patient_id)) {
            case Split::Train: out.train.push_back(std::move(w)); break;
            case Split::Val: out.val.push_back(std::move(w)); break;
            case Split::Test: out.test.push_back(std::move(w)); break;
        }
    }
    for (auto* part : {&out.train, &out.val, &out.test}) std::sort(part->begin(), part->end(), key_less);
    return out;
}

PreparedDataset prepare_dataset(const std::vector<VitalsRecord>& records, const std::vector<Anchor>& anchors,
                                const PipelineConfig& cfg, numerics::Rng& split_rng) {
    std::map<std::string, std::vector<std::int64_t>> by_patient;
    for (const auto& a : anchors) by_patient[a.patient_id].push_back(a.time);

    PreparedDataset out;
    std::vector<VitalsWindow> windows;
    const auto series = resample_and_impute(records, cfg.grid_seconds);
    out.series = series.size();
    for (const auto& s : series) {
        std::vector<std::int64_t> own;
        auto it = by_patient.find(s.patient_id);
        if (it != by_patient.end()) {
            own = it->second;
        } else {
            own.push_back(s.tick_time(s.size() - 1) + s.step);
        }
        auto made = make_windows(s, own, cfg.shape);
        for (auto& w : made.windows) windows.push_back(lowpass_window(w, cfg.lowpass_width));
        for (auto& line : made.skipped) out.skipped.push_back(std::move(line));
    }
    out.data = split_by_patient(std::move(windows), split_rng, cfg.ratio);
    out.data.scaler = MinMaxScaler::fit(out.data.train);
    for (auto* part : {&out.data.train, &out.data.val, &out.data.test}) {
        for (auto& w : *part) w = out.data.scaler.apply(w);
    }
    return out;
}

void save_dataset(const SplitDataset& data, std::ostream& out) {
    const auto any = !data.train.empty() ? &data.train : !data.val.empty() ? &data.val : &data.test;
    const std::size_t ctx = any->empty() ? 0 : any->front().context.size();
    const std::size_t hor = any->empty() ? 0 : any->front().horizon.size();

    std::ostringstream header;
    header << "context_len = " << ctx << '\n'
           << "horizon_len = " << hor << '\n'
           << "ratio = " << data.ratio[0] << ':' << data.ratio[1] << ':' << data.ratio[2] << '\n'
           << "n_train = " << data.train.size() << '\n'
           << "n_val = " << data.val.size() << '\n'
           << "n_test = " << data.test.size() << '\n';
    for (const auto& [vital, r] : data.scaler.ranges()) {
        header << "scaler." << vital << ".min = " << format_double(r.min) << '\n'
               << "scaler." << vital << ".max = " << format_double(r.max) << '\n';
    }

    BinaryWriter w(out);
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kDatasetFormatVersion);
    w.str(header.str());
    w.u64(data.manifest.size());
    for (const auto& [patient, split] : data.manifest) {
        w.fixed_str(patient, kPatientIdWidth);
        w.u8(static_cast<std::uint8_t>(split));
    }
    w.u64(data.size());
    for (auto split : {Split::Train, Split::Val, Split::Test}) {
        for (const auto& win : data.get(split)) {
            if (win.context.size() != ctx || win.horizon.size() != hor) {
                throw DimensionError("window " + win.patient_id + "/" + win.vital + " has a different length");
            }
            w.fixed_str(win.patient_id, kPatientIdWidth);
            w.fixed_str(win.vital, kVitalWidth);
            w.i64(win.anchor_time);
            w.u8(static_cast<std::uint8_t>(split));
            w.f64s(win.context);
            w.f64s(win.horizon);
        }
    }
}

SplitDataset load_dataset(std::istream& in) {
    BinaryReader r(in);
    r.expect_magic(kMagic);
    const auto version = r.u32();
    if (version != kDatasetFormatVersion) throw FormatError("unsupported dataset format version " + std::to_string(version));
    const auto kv = parse_key_values(r.str());
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("dataset header is missing key '" + key + "'");
        return it->second;
    };
    const auto ctx = parse_size(get("context_len"), "context_len");
    const auto hor = parse_size(get("horizon_len"), "horizon_len");

    SplitDataset data;
    {
        const auto& ratio = get("ratio");
        std::array<std::size_t, 3> parsed{};
        std::size_t k = 0;
        std::string part;
        std::istringstream is(ratio);
        while (std::getline(is, part, ':')) {
            if (k == 3) throw FormatError("dataset ratio '" + ratio + "' has more than 3 parts");
            parsed[k++] = parse_size(part, "ratio");
        }
        if (k != 3) throw FormatError("dataset ratio '" + ratio + "' must have 3 parts");
        data.ratio = parsed;
    }
    for (const auto& [key, value] : kv) {
        if (key.rfind("scaler.", 0) != 0) continue;
        const auto dot = key.rfind('.');
        const auto vital = key.substr(7, dot - 7);
        const auto field = key.substr(dot + 1);
        auto range = data.scaler.ranges().count(vital) ? data.scaler.ranges().at(vital) : VitalRange{};
        if (field == "min") {
            range.min = parse_real(value, key);
        } else if (field == "max") {
            range.max = parse_real(value, key);
        } else {
            throw FormatError("unknown dataset header key '" + key + "'");
        }
        data.scaler.set_range(vital, range);
    }

    const auto patients = r.u64();
    for (std::uint64_t i = 0; i < patients; ++i) {
        auto id = r.fixed_str(kPatientIdWidth);
        const auto split = r.u8();
        if (split > 2) throw FormatError("patient '" + id + "' has invalid split code " + std::to_string(split));
        data.manifest[id] = static_cast<Split>(split);
    }
    const auto n = r.u64();
    if (n != parse_size(get("n_train"), "n_train") + parse_size(get("n_val"), "n_val") +
                 parse_size(get("n_test"), "n_test")) {
        throw FormatError("dataset window count disagrees with its header");
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        VitalsWindow w;
        w.patient_id = r.fixed_str(kPatientIdWidth);
        w.vital = r.fixed_str(kVitalWidth);
        w.anchor_time = r.i64();
        const auto split = r.u8();
        if (split > 2) throw FormatError("window has invalid split code " + std::to_string(split));
        w.context.resize(ctx);
        w.horizon.resize(hor);
        r.f64s(w.context);
        r.f64s(w.horizon);
        auto it = data.manifest.find(w.patient_id);
        if (it == data.manifest.end() || static_cast<std::uint8_t>(it->second) != split) {
            throw FormatError("window for patient '" + w.patient_id + "' contradicts the split manifest");
        }
        switch (static_cast<Split>(split)) {
            case Split::Train: data.train.push_back(std::move(w)); break;
            case Split::Val: data.val.push_back(std::move(w)); break;
            case Split::Test: data.test.push_back(std::move(w)); break;
        }
    }
    return data;
}

void save_dataset(const SplitDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    save_dataset(data, out);
}

SplitDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return load_dataset(in);
}

}  // namespace vitalpeft::pipeline
