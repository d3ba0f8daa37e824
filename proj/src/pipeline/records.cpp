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

#include "vitalpeft/pipeline/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/text_format.hpp"

namespace vitalpeft::pipeline {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void strip_bom(std::string& line) {
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
}

bool parse_int64(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

// Returns false when the text is not a number at all; non-finite numbers parse.
bool parse_value(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

void expect_header(std::istream& in, const std::string& expected, const std::string& what) {
    std::string header;
    if (!read_line(in, header)) throw FormatError(what + " is empty; expected header '" + expected + "'");
    strip_bom(header);
    const auto fields = split_fields(header);
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i) joined += (i ? "," : "") + fields[i];
    if (joined != expected) {
        throw FormatError(what + " header is '" + header + "', expected '" + expected + "'");
    }
}

}  // namespace

IngestResult ingest_csv(std::istream& in) {
    expect_header(in, "patient_id,vital,timestamp,value", "vitals CSV");
    IngestResult result;
    std::string line;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto reject = [&](std::string reason) { result.rejects.push_back({line_no, line, std::move(reason)}); };
        const auto fields = split_fields(line);
        if (fields.size() != 4) {
            reject("expected 4 fields, found " + std::to_string(fields.size()));
            continue;
        }
        if (fields[0].empty()) {
            reject("empty patient_id");
            continue;
        }
        if (fields[1].empty()) {
            reject("empty vital");
            continue;
        }
        VitalsRecord r{fields[0], fields[1], 0, 0.0};
        if (!parse_int64(fields[2], r.timestamp)) {
            reject("unparseable timestamp");
            continue;
        }
        if (!parse_value(fields[3], r.value)) {
            reject("unparseable value");
            continue;
        }
        if (!std::isfinite(r.value)) {
            reject("non-finite value");
            continue;
        }
        result.records.push_back(std::move(r));
    }
    return result;
}

IngestResult ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return ingest_csv(in);
}

void write_csv(std::ostream& out, const std::vector<VitalsRecord>& records) {
    out << "patient_id,vital,timestamp,value\n";
    for (const auto& r : records) {
        out << r.patient_id << ',' << r.vital << ',' << r.timestamp << ',' << format_double(r.value) << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const std::vector<VitalsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_csv(out, records);
}

std::vector<Anchor> read_anchors_csv(std::istream& in) {
    expect_header(in, "patient_id,anchor_time", "anchors CSV");
    std::vector<Anchor> anchors;
    std::string line;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        Anchor a;
        if (fields.size() != 2 || fields[0].empty() || !parse_int64(fields[1], a.time)) {
            throw FormatError("anchors CSV line " + std::to_string(line_no) + " is malformed: '" + line + "'");
        }
        a.patient_id = fields[0];
        anchors.push_back(std::move(a));
    }
    return anchors;
}

std::vector<Anchor> read_anchors_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_anchors_csv(in);
}

void write_anchors_csv(std::ostream& out, const std::vector<Anchor>& anchors) {
    out << "patient_id,anchor_time\n";
    for (const auto& a : anchors) out << a.patient_id << ',' << a.time << '\n';
}

void write_anchors_csv(const std::filesystem::path& path, const std::vector<Anchor>& anchors) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_anchors_csv(out, anchors);
}

}  // namespace vitalpeft::pipeline
