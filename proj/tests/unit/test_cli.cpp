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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vitalpeft/cli/app.hpp"

namespace fs = std::filesystem;
using vitalpeft::cli::run;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("vitalpeft_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("count-params prints the count and millions") {
    auto r = invoke({"count-params", "--preset", "tiny", "--method", "fourierft", "--n", "50"});
    CHECK(r.code == 0);
    CHECK(r.out == "2400 (0.0024M)\n");
    r = invoke({"count-params", "--preset", "base", "--method", "lora"});
    CHECK(r.code == 0);
    CHECK(r.out == "442368 (0.442M)\n");
    r = invoke({"count-params", "--preset", "tiny", "--method", "zero-shot"});
    CHECK(r.out.rfind("0 (", 0) == 0);
}

TEST_CASE("usage and configuration errors exit 2, runtime failures exit 1") {
    auto r = invoke({});
    CHECK(r.code == vitalpeft::cli::kExitUsage);
    CHECK(r.err.rfind("error: usage_error:", 0) == 0);
    CHECK(invoke({"frobnicate"}).code == vitalpeft::cli::kExitUsage);
    CHECK(invoke({"preprocess"}).code == vitalpeft::cli::kExitUsage);
    CHECK(invoke({"count-params", "--method", "dora"}).code == vitalpeft::cli::kExitUsage);
    CHECK(invoke({"count-params", "--method", "lora", "--targets", "qz"}).code == vitalpeft::cli::kExitUsage);
    CHECK(invoke({"--help"}).code == vitalpeft::cli::kExitOk);

    const auto dir = scratch("missing");
    r = invoke({"--out-dir", dir.string(), "preprocess", "--records", (dir / "absent.csv").string()});
    CHECK(r.code == vitalpeft::cli::kExitFailure);
    CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("generate, preprocess and evaluate write reproducible artifacts") {
    const auto gen = scratch("gen");
    REQUIRE(invoke({"--seed", "3", "--out-dir", gen.string(), "generate", "--patients", "8"}).code == 0);
    CHECK(fs::exists(gen / "records.csv"));
    CHECK(fs::exists(gen / "anchors.csv"));
    CHECK(slurp(gen / "seed") == "3\n");

    const auto pre = scratch("pre");
    REQUIRE(invoke({"--seed", "3", "--out-dir", pre.string(), "preprocess", "--records", (gen / "records.csv").string(),
                    "--anchors", (gen / "anchors.csv").string()})
                .code == 0);
    REQUIRE(fs::exists(pre / "dataset.bin"));

    auto evaluate = [&](const fs::path& dir) {
        return invoke({"--seed", "5", "--out-dir", dir.string(), "evaluate", "--preset", "desk", "--dataset",
                       (pre / "dataset.bin").string(), "--split", "test", "--max-windows", "1", "--samples", "3",
                       "--runs", "2"});
    };
    const auto ea = scratch("eval_a");
    const auto eb = scratch("eval_b");
    const auto ra = evaluate(ea);
    REQUIRE(ra.code == 0);
    REQUIRE(evaluate(eb).code == 0);
    const auto table = slurp(ea / "report.csv");
    CHECK(table.rfind("run,MSE x1e-4,DTW x1e-3,MAPE %\n", 0) == 0);
    CHECK(table == slurp(eb / "report.csv"));
    CHECK(slurp(ea / "report.txt") == slurp(eb / "report.txt"));

    // The echoed configuration replays the same run.
    const auto ec = scratch("eval_c");
    const auto replay = invoke({"--config", (ea / "effective_config.ini").string(), "--out-dir", ec.string()});
    REQUIRE(replay.code == 0);
    CHECK(slurp(ec / "report.csv") == table);
}
