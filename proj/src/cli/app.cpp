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

#include "vitalpeft/cli/app.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "vitalpeft/adapters/checkpoint.hpp"
#include "vitalpeft/adapters/counting.hpp"
#include "vitalpeft/errors.hpp"
#include "vitalpeft/metrics/metrics.hpp"
#include "vitalpeft/model/serialize.hpp"
#include "vitalpeft/pipeline/dataset.hpp"
#include "vitalpeft/pipeline/synthetic.hpp"
#include "vitalpeft/text_format.hpp"
#include "vitalpeft/trainer/trainer.hpp"

namespace vitalpeft::cli {

namespace fs = std::filesystem;

namespace {

struct GenerateOptions {
    std::string domain = "source";
    std::size_t patients = 1442;
    double two_anchor_fraction = 0.4;
    double missing_rate = 0.05;
};

struct PreprocessOptions {
    std::string records;
    std::string anchors;
    std::int64_t grid_seconds = 300;
    std::size_t lowpass_width = 5;
    std::string ratio = "8:1:1";
};

struct PretrainOptions {
    std::string dataset;
    std::string preset = "desk";
    std::size_t steps = 1000;
    std::size_t batch_size = 8;
    double lr = 1e-3;
    std::size_t eval_every = 100;
    std::size_t val_windows = 0;
};

struct AdapterOptions {
    std::string method;
    std::string targets = "qkvo";
    std::size_t rank = 0;  // 0 = method default
    std::size_t n = 50;
    double alpha = 300.0;
    std::string bitfit_scope = "all-biases";
    std::string ln_scope = "attention";
    std::string shared_seed = "auto";  // auto = derived from the master seed
};

struct TrainOptions {
    std::string lr_grid = "0.01,0.001,0.0001,1e-05";
    std::size_t batch_size = 8;
    std::size_t steps = 200;
    std::size_t eval_every = 20;
    std::size_t patience = 5;
    std::size_t val_windows = 0;
    std::size_t val_samples = 20;
    std::size_t val_runs = 1;
    std::size_t samples = 20;
    std::size_t runs = 10;
};

struct FinetuneOptions {
    std::string base;
    std::string dataset;
    AdapterOptions adapter;
    TrainOptions train;
};

struct EvaluateOptions {
    std::string base;
    std::string preset = "desk";
    std::string adapter;
    std::string dataset;
    std::string split = "test";
    std::size_t max_windows = 0;
    std::size_t samples = 20;
    std::size_t runs = 10;
};

struct SweepOptions {
    FinetuneOptions run;
    std::string axis = "none";
    std::vector<std::size_t> values;
};

struct CountOptions {
    std::string preset = "tiny";
    AdapterOptions adapter;
    bool breakdown = false;
};

void add_adapter_options(CLI::App* sub, AdapterOptions& o) {
    sub->add_option("--method", o.method, "zero-shot, full-ft, bitfit, ln-tuning, lora, vera or fourierft")->required();
    sub->add_option("--targets", o.targets, "adapted projections, subset of qkvo");
    sub->add_option("--rank", o.rank, "LoRA/VeRA rank (0 = method default)");
    sub->add_option("--n", o.n, "FourierFT spectral coefficients per matrix");
    sub->add_option("--alpha", o.alpha, "FourierFT scaling");
    sub->add_option("--bitfit-scope", o.bitfit_scope, "all-biases or final-norm-only");
    sub->add_option("--ln-scope", o.ln_scope, "attention or all");
    sub->add_option("--shared-seed", o.shared_seed, "seed of frozen shared adapter state, or auto");
}

void add_train_options(CLI::App* sub, TrainOptions& o) {
    sub->add_option("--lr-grid", o.lr_grid, "comma-separated learning rates");
    sub->add_option("--batch-size", o.batch_size);
    sub->add_option("--steps", o.steps, "maximum steps per learning rate");
    sub->add_option("--eval-every", o.eval_every, "steps between validation evaluations");
    sub->add_option("--patience", o.patience, "evaluations without improvement before stopping");
    sub->add_option("--val-windows", o.val_windows, "validation windows used for selection (0 = all)");
    sub->add_option("--val-samples", o.val_samples);
    sub->add_option("--val-runs", o.val_runs);
    sub->add_option("--samples", o.samples, "sampled trajectories per test forecast");
    sub->add_option("--runs", o.runs, "seeded test evaluation runs");
}

adapters::AdapterConfig build_adapter(const AdapterOptions& o, std::uint64_t seed) {
    auto cfg = adapters::AdapterConfig::for_method(adapters::parse_method(o.method));
    cfg.targets = adapters::parse_targets(o.targets);
    if (o.rank != 0) cfg.rank = o.rank;
    cfg.n_coefficients = o.n;
    cfg.alpha = o.alpha;
    cfg.bitfit_scope = adapters::parse_bitfit_scope(o.bitfit_scope);
    cfg.ln_scope = adapters::parse_ln_scope(o.ln_scope);
    cfg.shared_seed = o.shared_seed == "auto" ? numerics::Rng(seed).child("adapter.shared").seed()
                                              : parse_u64(o.shared_seed, "shared-seed");
    return cfg;
}

trainer::TrainConfig build_train(const TrainOptions& o, std::uint64_t seed) {
    std::ostringstream text;
    text << "lr_grid = " << o.lr_grid << "\n";
    trainer::TrainConfig cfg = trainer::TrainConfig::parse(text.str());
    cfg.batch_size = o.batch_size;
    cfg.max_steps = o.steps;
    cfg.eval_every = o.eval_every;
    cfg.patience = o.patience;
    cfg.val_windows = o.val_windows;
    cfg.val_eval = {o.val_samples, o.val_runs};
    cfg.test_eval = {o.samples, o.runs};
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

std::array<std::size_t, 3> parse_ratio(const std::string& s) {
    std::array<std::size_t, 3> r{};
    std::stringstream in(s);
    std::string part;
    std::size_t i = 0;
    while (std::getline(in, part, ':')) {
        if (i == 3) throw ConfigError("ratio must have three parts, got '" + s + "'");
        r[i++] = parse_size(trim(part), "ratio");
    }
    if (i != 3 || r[0] == 0 || r[1] == 0 || r[2] == 0) throw ConfigError("ratio must look like 8:1:1, got '" + s + "'");
    return r;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("failed writing " + path.string());
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " path is required");
    if (!fs::exists(path)) throw IoError(std::string(what) + " not found: " + path);
}

// Global options plus the invoked command's section; `--config` accepts this file back.
std::string effective_config(const CLI::App& app, std::uint64_t seed, const std::string& out_dir) {
    std::ostringstream text;
    text << "seed=" << seed << "\nout-dir=\"" << out_dir << "\"\n";
    for (const auto* sub : app.get_subcommands()) text << "\n[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
    return text.str();
}

}  // namespace

std::string count_line(std::size_t count) {
    return std::to_string(count) + " (" + adapters::format_millions(count) + "M)";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"PEFT toolkit for encoder-decoder time-series forecasters", "vitalpeft"};
    app.set_config("--config", "", "INI file with one section per command");
    app.set_version_flag("--version", std::string(VITALPEFT_VERSION));
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    std::uint64_t seed = 0;
    std::string out_dir = "run";
    app.add_option("--seed", seed, "master seed");
    auto* out_dir_opt = app.add_option("--out-dir", out_dir, "run directory for artifacts");

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic vitals cohort as CSV");
    generate->add_option("--domain", gen.domain, "source or shifted");
    generate->add_option("--patients", gen.patients);
    generate->add_option("--two-anchor-fraction", gen.two_anchor_fraction);
    generate->add_option("--missing-rate", gen.missing_rate);

    PreprocessOptions pre;
    auto* preprocess = app.add_subcommand("preprocess", "resample, window, filter, split and scale a CSV cohort");
    preprocess->add_option("--records", pre.records, "vitals CSV")->required();
    preprocess->add_option("--anchors", pre.anchors, "anchor CSV (patient_id,anchor_time)");
    preprocess->add_option("--grid-seconds", pre.grid_seconds);
    preprocess->add_option("--lowpass-width", pre.lowpass_width);
    preprocess->add_option("--ratio", pre.ratio, "train:val:test");

    PretrainOptions pt;
    auto* pretrain = app.add_subcommand("pretrain", "train every base parameter on a source dataset");
    pretrain->add_option("--dataset", pt.dataset)->required();
    pretrain->add_option("--preset", pt.preset);
    pretrain->add_option("--steps", pt.steps);
    pretrain->add_option("--batch-size", pt.batch_size);
    pretrain->add_option("--lr", pt.lr);
    pretrain->add_option("--eval-every", pt.eval_every);
    pretrain->add_option("--val-windows", pt.val_windows);

    FinetuneOptions ft;
    auto* finetune = app.add_subcommand("finetune", "fine-tune a base model with one method over the LR grid");
    finetune->add_option("--base", ft.base, "base model file")->required();
    finetune->add_option("--dataset", ft.dataset)->required();
    add_adapter_options(finetune, ft.adapter);
    add_train_options(finetune, ft.train);

    EvaluateOptions ev;
    auto* evaluate = app.add_subcommand("evaluate", "score a model (and adapter) on one split");
    evaluate->add_option("--base", ev.base, "base model file (fresh model from --preset when omitted)");
    evaluate->add_option("--preset", ev.preset);
    evaluate->add_option("--adapter", ev.adapter, "adapter checkpoint");
    evaluate->add_option("--dataset", ev.dataset)->required();
    evaluate->add_option("--split", ev.split, "train, val or test");
    evaluate->add_option("--max-windows", ev.max_windows, "first N windows in key order (0 = all)");
    evaluate->add_option("--samples", ev.samples);
    evaluate->add_option("--runs", ev.runs);

    SweepOptions sw;
    auto* sweep = app.add_subcommand("sweep", "fine-tune once per VeRA rank or FourierFT coefficient count");
    sweep->add_option("--base", sw.run.base)->required();
    sweep->add_option("--dataset", sw.run.dataset)->required();
    add_adapter_options(sweep, sw.run.adapter);
    add_train_options(sweep, sw.run.train);
    sweep->add_option("--axis", sw.axis, "none, vera_rank or fourier_n");
    sweep->add_option("--values", sw.values, "axis values (default: all admissible)")->delimiter(',');

    CountOptions cp;
    auto* count = app.add_subcommand("count-params", "print the trainable-parameter count of a method");
    count->add_option("--preset", cp.preset);
    add_adapter_options(count, cp.adapter);
    count->add_flag("--breakdown", cp.breakdown, "print per-group counts and the fraction of full fine-tuning");
    // A section in a --config file selects its subcommand, so effective_config.ini replays a run.
    for (auto* sub : app.get_subcommands({})) sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: usage_error: " << e.what() << "\n";
        return kExitUsage;
    }

    const fs::path dir(out_dir);
    auto open_run_dir = [&] {
        fs::create_directories(dir);
        write_text(dir / "effective_config.ini", effective_config(app, seed, out_dir));
        write_text(dir / "seed", std::to_string(seed) + "\n");
        write_text(dir / "version", std::string(VITALPEFT_VERSION) + "\n");
    };

    try {
        if (*generate) {
            pipeline::SyntheticConfig cfg;
            cfg.n_patients = gen.patients;
            cfg.domain = pipeline::parse_domain(gen.domain);
            cfg.two_anchor_fraction = gen.two_anchor_fraction;
            cfg.missing_rate = gen.missing_rate;
            const auto cohort = pipeline::generate_synthetic(cfg, numerics::Rng(seed).child("generate"));
            open_run_dir();
            pipeline::write_csv(dir / "records.csv", cohort.records);
            pipeline::write_anchors_csv(dir / "anchors.csv", cohort.anchors);
            out << "generated " << cohort.records.size() << " records and " << cohort.anchors.size()
                << " anchors for " << gen.patients << " patients (" << gen.domain << ") in " << dir.string() << "\n";
        } else if (*preprocess) {
            require_file(pre.records, "records");
            pipeline::PipelineConfig cfg;
            cfg.grid_seconds = pre.grid_seconds;
            cfg.lowpass_width = pre.lowpass_width;
            cfg.ratio = parse_ratio(pre.ratio);
            const auto ingest = pipeline::ingest_csv(fs::path(pre.records));
            std::vector<pipeline::Anchor> anchors;
            if (!pre.anchors.empty()) {
                require_file(pre.anchors, "anchors");
                anchors = pipeline::read_anchors_csv(fs::path(pre.anchors));
            }
            auto split_rng = numerics::Rng(seed).child("split");
            const auto prepared = pipeline::prepare_dataset(ingest.records, anchors, cfg, split_rng);
            open_run_dir();
            pipeline::save_dataset(prepared.data, dir / "dataset.bin");
            std::ostringstream rejects;
            rejects << "line,reason\n";
            for (const auto& r : ingest.rejects) rejects << r.line << "," << r.reason << "\n";
            write_text(dir / "rejected.csv", rejects.str());
            std::ostringstream summary;
            summary << "records = " << ingest.records.size() << "\nrejected_rows = " << ingest.rejects.size()
                    << "\nseries = " << prepared.series << "\nskipped_windows = " << prepared.skipped.size()
                    << "\ntrain = " << prepared.data.train.size() << "\nval = " << prepared.data.val.size()
                    << "\ntest = " << prepared.data.test.size() << "\n";
            for (const auto& [vital, r] : prepared.data.scaler.ranges())
                summary << "scaler." << vital << " = " << format_double(r.min) << "," << format_double(r.max) << "\n";
            out << summary.str();
            for (const auto& why : prepared.skipped) summary << "skipped = " << why << "\n";
            write_text(dir / "summary.txt", summary.str());
        } else if (*pretrain) {
            require_file(pt.dataset, "dataset");
            const auto data = pipeline::load_dataset(fs::path(pt.dataset));
            trainer::TrainConfig cfg;
            cfg.max_steps = pt.steps;
            cfg.batch_size = pt.batch_size;
            cfg.eval_every = pt.eval_every;
            cfg.val_windows = pt.val_windows;
            cfg.seed = seed;
            cfg.lr_grid = {pt.lr};
            cfg.validate();
            auto init = numerics::Rng(seed).child("model.init");
            model::ForecastModel m(model::ModelConfig::preset_config(pt.preset), init);
            open_run_dir();
            trainer::ExperimentLog log;
            const auto r = trainer::pretrain(m, data, cfg, pt.lr, &log);
            model::save_model(m, dir / "base.model");
            write_text(dir / "experiment.log", log.text());
            out << "pretrained " << pt.preset << " for " << pt.steps << " steps: val loss "
                << format_fixed(r.initial_val_loss, 4) << " -> " << format_fixed(r.final_val_loss, 4) << "\n";
        } else if (*finetune || *sweep) {
            const auto& o = *finetune ? ft : sw.run;
            require_file(o.base, "base model");
            require_file(o.dataset, "dataset");
            const auto acfg = build_adapter(o.adapter, seed);
            const auto tcfg = build_train(o.train, seed);
            const auto base = model::load_model(fs::path(o.base));
            acfg.validate(base.config());
            const auto data = pipeline::load_dataset(fs::path(o.dataset));
            if (*finetune) {
                open_run_dir();
                trainer::ExperimentLog log;
                auto r = trainer::finetune(base, acfg, data, tcfg, &log);
                adapters::save_adapter(r.model, r.state, dir / "adapter.bin");
                const std::string title = std::string(to_string(acfg.method)) + " on " + o.dataset;
                std::ostringstream budget;
                budget << "method = " << to_string(acfg.method) << "\npreset = " << r.budget.preset
                       << "\ntrainable = " << r.budget.total << "\ntrainable_millions = "
                       << adapters::format_millions(r.budget.total) << "\nfull_ft = " << r.budget.full_ft_total
                       << "\nfraction_of_full_ft = " << format_double(r.budget.fraction_of_full_ft()) << "\n";
                for (const auto& g : r.budget.groups) budget << "group." << g.name << " = " << g.count << "\n";
                if (r.selected_lr) budget << "selected_lr = " << format_double(*r.selected_lr) << "\n";
                budget << "val_mse = " << format_double(r.val_mse) << "\n";
                write_text(dir / "report.txt", r.test.to_text(title) + "  #Params: " + count_line(r.budget.total) + "\n");
                write_text(dir / "report.csv", r.test.to_table());
                write_text(dir / "budget.txt", budget.str());
                write_text(dir / "experiment.log", log.text());
                out << r.test.to_text(title) << "  #Params: " << count_line(r.budget.total) << "\n";
            } else {
                trainer::ExperimentSpec spec;
                spec.adapter = acfg;
                spec.train = tcfg;
                spec.axis = trainer::parse_sweep_axis(sw.axis);
                spec.values = sw.values;
                spec.validate();
                open_run_dir();
                trainer::ExperimentLog log;
                const auto table = trainer::sweep(base, spec, data, &log);
                write_text(dir / "sweep.csv", table.to_table());
                write_text(dir / "experiment.log", log.text());
                out << table.to_table();
            }
        } else if (*evaluate) {
            require_file(ev.dataset, "dataset");
            const auto data = pipeline::load_dataset(fs::path(ev.dataset));
            const auto split = ev.split == "train" ? pipeline::Split::Train
                               : ev.split == "val" ? pipeline::Split::Val
                               : ev.split == "test"
                                   ? pipeline::Split::Test
                                   : throw ConfigError("split must be train, val or test, got '" + ev.split + "'");
            auto windows = data.get(split);
            if (ev.max_windows != 0 && windows.size() > ev.max_windows) windows.resize(ev.max_windows);
            model::ForecastModel m = [&] {
                if (!ev.base.empty()) {
                    require_file(ev.base, "base model");
                    return model::load_model(fs::path(ev.base));
                }
                auto init = numerics::Rng(seed).child("model.init");
                return model::ForecastModel(model::ModelConfig::preset_config(ev.preset), init);
            }();
            if (!ev.adapter.empty()) {
                require_file(ev.adapter, "adapter");
                adapters::load_adapter(m, fs::path(ev.adapter));
            }
            const auto report = metrics::evaluate(m, windows, {ev.samples, ev.runs}, numerics::Rng(seed).child("test"));
            open_run_dir();
            const std::string title = "evaluation on " + ev.split + " split of " + ev.dataset;
            write_text(dir / "report.txt", report.to_text(title));
            write_text(dir / "report.csv", report.to_table());
            out << report.to_text(title);
        } else if (*count) {
            const auto acfg = build_adapter(cp.adapter, seed);
            const auto mcfg = model::ModelConfig::preset_config(cp.preset);
            const auto report = adapters::count_trainable_params(acfg, mcfg);
            std::ostringstream text;
            text << count_line(report.total) << "\n";
            if (cp.breakdown) {
                for (const auto& g : report.groups) text << "  " << g.name << ": " << g.count << "\n";
                text << "  full fine-tuning: " << count_line(report.full_ft_total) << "\n";
                text << "  fraction of full fine-tuning: " << format_fixed(100.0 * report.fraction_of_full_ft(), 4)
                     << "%\n";
            }
            if (out_dir_opt->count() > 0) {
                open_run_dir();
                write_text(dir / "count.txt", text.str());
            }
            out << text.str();
        }
    } catch (const ConfigError& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return kExitFailure;
    } catch (const fs::filesystem_error& e) {
        err << "error: io_error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: internal_error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"vitalpeft"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace vitalpeft::cli
