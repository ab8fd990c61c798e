// Copyright 2026 The GNSS Sentinel Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gnss/pipeline/cli.hpp"

#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "gnss/core/error.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/pipeline/commands.hpp"

namespace gnss::pipeline {

namespace {

std::string brief(const nlohmann::json& manifest) {
    nlohmann::json b = {{"command", manifest.at("command")},
                        {"outputs", manifest.at("outputs").size()},
                        {"outputs_digest", manifest.at("outputs_digest")},
                        {"summary", manifest.at("summary")}};
    return b.dump(2);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const char* env_seed) {
    CLI::App app{"GNSS interference toolkit: jamming and spoofing classification experiments", "gnss-sentinel"};
    app.require_subcommand(1);
    app.set_version_flag("--version", GNSS_SENTINEL_VERSION);

    std::string config_path, out_dir, seed_text;
    int threads = 0;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed_text, "master seed (overrides config and GNSS_SENTINEL_SEED)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    auto* synth = app.add_subcommand("synth", "write randomized IQ files with sidecars");

    std::string iq_dir;
    auto* spec = app.add_subcommand("spectrogram", "render IQ files to PGM spectrogram images");
    spec->add_option("--in", iq_dir, "IQ directory (default <out>/iq)");

    std::string data_path, balance_name, scope_name;
    auto* tab = app.add_subcommand("train-tabular", "grid-search, fit and evaluate the classical models");
    tab->add_option("--data", data_path, "spoofing CSV (default: synthetic)");
    tab->add_option("--balance", balance_name, "none | undersample | oversample | smote");
    tab->add_option("--balance-scope", scope_name, "train | all");

    std::string images_dir, resume_path;
    std::size_t stop_after = 0;
    auto* img = app.add_subcommand("train-image", "train the CNN on spectrogram images");
    img->add_option("--images", images_dir, "image tree <dir>/<Class>/*.pgm (default: synthetic)");
    img->add_option("--resume", resume_path, "checkpoint to continue from")->check(CLI::ExistingFile);
    img->add_option("--stop-after-epoch", stop_after, "end the run after this many epochs");

    std::string model_path, eval_data;
    auto* ev = app.add_subcommand("evaluate", "evaluate a saved model on a dataset");
    ev->add_option("--model", model_path, "classifier JSON or CNN checkpoint")->required();
    ev->add_option("--data", eval_data, "CSV file or image directory")->required();

    std::vector<std::string> kind_names;
    std::string grid_data;
    auto* gs = app.add_subcommand("grid-search", "cross-validated grid search only");
    gs->add_option("--kind", kind_names, "classifier kinds (default: config)");
    gs->add_option("--data", grid_data, "spoofing CSV (default: synthetic)");

    std::string report_in;
    auto* rep = app.add_subcommand("report", "re-render SVG plots from report CSVs");
    rep->add_option("--in", report_in, "run directory")->required();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ExitCode::Usage);
    }

    try {
        RunConfig cfg = config_path.empty() ? config_from_json(nlohmann::json::object()) : load_config(config_path);
        std::optional<std::uint64_t> flag_seed;
        if (!seed_text.empty()) flag_seed = parse_seed(seed_text);
        cfg.seed = resolve_seed(cfg.seed, env_seed, flag_seed);
        if (!out_dir.empty()) cfg.out = out_dir;
        if (threads > 0) cfg.threads = threads;
        set_thread_count(cfg.threads);

        nlohmann::json manifest;
        if (*synth) {
            manifest = cmd_synth(cfg);
        } else if (*spec) {
            manifest = cmd_spectrogram(cfg, iq_dir);
        } else if (*tab) {
            if (!balance_name.empty()) cfg.spoofing.balance = balance::method_from_string(balance_name);
            if (!scope_name.empty()) {
                if (scope_name == "train") cfg.spoofing.balance_scope = BalanceScope::TrainOnly;
                else if (scope_name == "all") cfg.spoofing.balance_scope = BalanceScope::All;
                else throw UsageError("--balance-scope must be 'train' or 'all'");
            }
            manifest = cmd_train_tabular(cfg, data_path);
        } else if (*img) {
            ImageRunOptions o;
            o.image_dir = images_dir;
            o.resume = resume_path;
            if (stop_after > 0) o.stop_after_epoch = stop_after;
            manifest = cmd_train_image(cfg, o);
        } else if (*ev) {
            manifest = cmd_evaluate(cfg, model_path, eval_data);
        } else if (*gs) {
            std::vector<ml::ClassifierKind> kinds;
            for (const auto& k : kind_names) kinds.push_back(ml::kind_from_string(k));
            manifest = cmd_grid_search(cfg, kinds, grid_data);
        } else if (*rep) {
            manifest = cmd_report(cfg, report_in);
        }
        out << brief(manifest) << '\n';
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Usage);
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Numerical);
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Data);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Data);
    }
}

}  // namespace gnss::pipeline
