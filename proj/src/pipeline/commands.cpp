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

#include "gnss/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gnss/core/error.hpp"
#include "gnss/core/hash.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/core/rng.hpp"
#include "gnss/eval/metrics.hpp"
#include "gnss/eval/report.hpp"
#include "gnss/ml/classifier.hpp"
#include "gnss/spectro/spectrogram.hpp"
#include "gnss/synth/iq_file.hpp"
#include "gnss/tabular/dataset.hpp"

namespace gnss::pipeline {

namespace fs = std::filesystem;

#ifndef GNSS_SENTINEL_VERSION
#define GNSS_SENTINEL_VERSION "0.0.0"
#endif

// --- run context --------------------------------------------------------------

RunContext::RunContext(const RunConfig& config, std::string command)
    : config_(config), command_(std::move(command)), start_(std::chrono::steady_clock::now()), stage_start_(start_) {
    fs::create_directories(config_.out);
}

fs::path RunContext::path(const fs::path& rel) {
    const fs::path p = config_.out / rel;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

void RunContext::record(const fs::path& rel) { outputs_.push_back(rel.generic_string()); }

void RunContext::input(const fs::path& file) { inputs_.push_back(file); }

void RunContext::stage_done(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    timings_[stage] = std::chrono::duration<double>(now - stage_start_).count();
    stage_start_ = now;
}

nlohmann::json RunContext::finish() {
    std::sort(outputs_.begin(), outputs_.end());
    outputs_.erase(std::unique(outputs_.begin(), outputs_.end()), outputs_.end());
    std::vector<std::string> hashes(outputs_.size());
    parallel_for(outputs_.size(), [&](std::size_t i) { hashes[i] = sha256_file(config_.out / outputs_[i]); });
    nlohmann::json outputs = nlohmann::json::object(), inputs = nlohmann::json::object();
    for (std::size_t i = 0; i < outputs_.size(); ++i) outputs[outputs_[i]] = hashes[i];
    for (const auto& f : inputs_) inputs[f.generic_string()] = sha256_file(f);
    timings_["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    nlohmann::json m = {{"tool", "gnss-sentinel"},
                        {"version", GNSS_SENTINEL_VERSION},
                        {"command", command_},
                        {"config", to_json(config_)},
                        {"inputs", inputs},
                        {"outputs", outputs},
                        {"outputs_digest", sha256_hex(outputs.dump())},
                        {"summary", summary},
                        {"timings_s", timings_}};
    std::ofstream out(path(fs::path("manifests") / (command_ + ".json")), std::ios::trunc);
    out << m.dump(2) << '\n';
    return m;
}

nlohmann::json read_manifest(const fs::path& out, const std::string& command) {
    std::ifstream in(out / "manifests" / (command + ".json"));
    if (!in) throw DataError("no manifest for '" + command + "' under " + out.string());
    return nlohmann::json::parse(in);
}

namespace {

void write_json(RunContext& ctx, const fs::path& rel, const nlohmann::json& j) {
    std::ofstream out(ctx.path(rel), std::ios::trunc);
    out << j.dump(2) << '\n';
    ctx.record(rel);
}

void record_report(RunContext& ctx, const fs::path& rel_dir) {
    for (const auto& e : fs::directory_iterator(ctx.out() / rel_dir))
        if (e.is_regular_file()) ctx.record(rel_dir / e.path().filename());
}

std::string file_index(std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

tabular::TabularDataset features_dataset(const std::vector<double>& X, std::size_t d, const std::vector<int>& y,
                                         const std::vector<std::string>& class_names, const std::string& prefix) {
    tabular::TabularDataset ds;
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back(prefix + std::to_string(j));
    ds.class_names = class_names;
    ds.X = X;
    ds.y = y;
    return ds;
}

tabular::TabularDataset pixels_dataset(const cnn::ImageSet& set) {
    std::vector<double> X(set.pixels.begin(), set.pixels.end());
    return features_dataset(X, set.image_size(), set.labels, set.class_names, "px");
}

}  // namespace

// --- data helpers ---------------------------------------------------------------

ThreeWaySplit stratified_three_way(std::span<const int> y, std::span<const double> w, std::uint64_t seed) {
    if (w.size() != 3) throw UsageError("three-way split needs three weights");
    const double total = w[0] + w[1] + w[2];
    int max_label = -1;
    for (int v : y) max_label = std::max(max_label, v);
    ThreeWaySplit out;
    for (int c = 0; c <= max_label; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == c) idx.push_back(i);
        if (idx.empty()) continue;
        Rng rng(derive_seed(seed, "three_way", static_cast<std::uint64_t>(c)));
        rng.shuffle(std::span<std::size_t>(idx));
        const auto n = static_cast<double>(idx.size());
        const auto nv = static_cast<std::size_t>(std::llround(n * w[1] / total));
        const auto nt = static_cast<std::size_t>(std::llround(n * w[2] / total));
        if (nv + nt >= idx.size())
            throw DataError("three-way split: class " + std::to_string(c) + " has too few samples (" +
                            std::to_string(idx.size()) + ")");
        out.val.insert(out.val.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nv));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(nv),
                        idx.begin() + static_cast<std::ptrdiff_t>(nv + nt));
        out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(nv + nt), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

cnn::ImageSet load_image_tree(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("image directory not found: " + dir.string());
    cnn::ImageSet set;
    set.class_names = jam_class_names();
    bool any = false;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) synth::jam_class_from_string(e.path().filename().string());
    for (std::size_t c = 0; c < set.class_names.size(); ++c) {
        const fs::path sub = dir / set.class_names[c];
        if (!fs::is_directory(sub)) continue;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(sub))
            if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const auto img = spectro::read_pgm(f);
            if (!any) {
                set.height = img.height;
                set.width = img.width;
                any = true;
            } else if (img.height != set.height || img.width != set.width) {
                throw DataError("image size mismatch in " + f.string());
            }
            set.pixels.insert(set.pixels.end(), img.pixels.begin(), img.pixels.end());
            set.labels.push_back(static_cast<int>(c));
        }
    }
    if (!any) throw DataError("no .pgm images under " + dir.string());
    return set;
}

tabular::TabularDataset spoofing_data(const RunConfig& config, const fs::path& data_csv, nlohmann::json* info) {
    const auto& s = config.spoofing;
    const fs::path csv = !data_csv.empty() ? data_csv : fs::path(s.csv_path);
    tabular::TabularDataset ds;
    if (!csv.empty()) {
        if (!fs::exists(csv)) throw DataError("data file not found: " + csv.string());
        tabular::LoadStats stats;
        ds = tabular::load_csv(csv, &stats);
        if (info) {
            (*info)["source"] = csv.string();
            (*info)["rejected_rows"] = stats.rejected_rows;
        }
    } else {
        ds = tabular::synth_spoof_dataset(s.n_per_class, s.difficulty, config.stage_seed("spoof_data"));
        if (!s.imbalance.empty()) ds = tabular::apply_imbalance(ds, s.imbalance, config.stage_seed("imbalance"));
        if (info) (*info)["source"] = "synthetic";
    }
    if (info) (*info)["class_counts"] = ds.class_counts();
    return ds;
}

// --- synth / spectrogram --------------------------------------------------------

nlohmann::json cmd_synth(const RunConfig& config) {
    RunContext ctx(config, "synth");
    const auto& jc = config.image.data;
    const std::uint64_t master = config.stage_seed("synth");
    const std::size_t per = jc.per_class, total = per * config.synth_classes.size();
    std::vector<fs::path> rel(total);
    for (std::size_t i = 0; i < total; ++i) {
        const auto cls = config.synth_classes[i / per];
        const std::string name(synth::to_string(cls));
        rel[i] = fs::path("iq") / name / (name + "_" + file_index(i % per) + ".giq");
        ctx.path(rel[i]);
    }
    parallel_for(total, [&](std::size_t i) {
        const auto cls = config.synth_classes[i / per];
        double jsr = 0.0;
        const auto sig = make_jamming_signal(jc, cls, i % per, master, &jsr);
        const fs::path p = config.out / rel[i];
        synth::write_giq(p, sig);
        synth::write_sidecar(synth::sidecar_path(p), {cls, sig.seed, jsr, signal_duration(jc)});
    });
    for (const auto& r : rel) {
        ctx.record(r);
        ctx.record(synth::sidecar_path(r));
    }
    ctx.stage_done("synth");
    ctx.summary = {{"files", total}, {"per_class", per}, {"samples_per_file", static_cast<std::size_t>(std::llround(signal_duration(jc) * jc.sample_rate_hz))}};
    return ctx.finish();
}

nlohmann::json cmd_spectrogram(const RunConfig& config, const fs::path& iq_dir_in) {
    RunContext ctx(config, "spectrogram");
    const fs::path iq_dir = iq_dir_in.empty() ? config.out / "iq" : iq_dir_in;
    if (!fs::is_directory(iq_dir)) throw DataError("IQ directory not found: " + iq_dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(iq_dir))
        if (e.is_regular_file() && e.path().extension() == ".giq") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .giq files under " + iq_dir.string());
    std::vector<fs::path> rel(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        ctx.input(files[i]);
        rel[i] = fs::path("images") / files[i].parent_path().filename() / files[i].filename().replace_extension(".pgm");
        ctx.path(rel[i]);
    }
    const auto& jc = config.image.data;
    std::vector<std::size_t> labels(files.size());
    parallel_for(files.size(), [&](std::size_t i) {
        const auto sig = synth::read_giq(files[i]);
        labels[i] = static_cast<std::size_t>(sig.label);
        spectro::write_pgm(config.out / rel[i], jamming_image(jc, sig));
    });
    std::vector<std::size_t> per_class(synth::kJamClassCount, 0);
    for (std::size_t i = 0; i < rel.size(); ++i) {
        ctx.record(rel[i]);
        ++per_class[labels[i]];
    }
    ctx.stage_done("spectrogram");
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t c = 0; c < per_class.size(); ++c)
        if (per_class[c]) counts[std::string(synth::to_string(synth::jam_class_from_code(static_cast<int>(c))))] = per_class[c];
    ctx.summary = {{"images", files.size()}, {"width", jc.image_size}, {"height", jc.image_size}, {"per_class", counts}};
    return ctx.finish();
}

// --- tabular experiment ---------------------------------------------------------

namespace {

struct KindOutcome {
    ml::ClassifierKind kind;
    eval::GridSearchResult search;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    nlohmann::json report;
};

void write_grid_csv(RunContext& ctx, const fs::path& rel, const eval::GridSearchResult& r) {
    std::ofstream out(ctx.path(rel), std::ios::trunc);
    out << "candidate,hyperparams,mean_accuracy,std_accuracy,failed,error\n";
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        const auto& c = r.candidates[i];
        std::string err = c.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::string desc = ml::describe(c.hyper);
        std::replace(desc.begin(), desc.end(), ',', ';');
        out << i << ',' << desc << ',' << eval::format_double(c.mean_accuracy) << ','
            << eval::format_double(c.std_accuracy) << ',' << (c.failed ? 1 : 0) << ',' << err << '\n';
    }
    ctx.record(rel);
}

}  // namespace

nlohmann::json cmd_train_tabular(const RunConfig& config, const fs::path& data_csv) {
    RunContext ctx(config, "train-tabular");
    const auto& s = config.spoofing;
    nlohmann::json data_info;
    auto ds = spoofing_data(config, data_csv, &data_info);
    if (!data_csv.empty()) ctx.input(data_csv);
    else if (!s.csv_path.empty()) ctx.input(s.csv_path);
    if (s.balance_scope == BalanceScope::All) ds = balance::rebalance(ds, s.balance, config.stage_seed("balance"), s.smote_k);
    auto split = tabular::stratified_split(ds, s.train_fraction, config.stage_seed("split"));
    if (s.balance_scope == BalanceScope::TrainOnly)
        split.train = balance::rebalance(split.train, s.balance, config.stage_seed("balance"), s.smote_k);
    data_info["train_counts"] = split.train.class_counts();
    data_info["test_counts"] = split.test.class_counts();
    tabular::write_csv(ctx.path("data/train.csv"), split.train);
    tabular::write_csv(ctx.path("data/test.csv"), split.test);
    ctx.record("data/train.csv");
    ctx.record("data/test.csv");
    ctx.stage_done("data");

    std::vector<KindOutcome> outcomes;
    for (const auto kind : s.kinds) {
        KindOutcome o{kind, {}, 0.0, 0.0, {}};
        const std::string name(ml::to_string(kind));
        o.search = eval::grid_search(kind, s.grid_for(kind), split.train, s.cv_splits, s.cv_test_fraction,
                                     config.stage_seed("cv"));
        o.val_accuracy = o.search.candidates[o.search.selected].mean_accuracy;
        const auto model = ml::fit(o.search.best, split.train, config.stage_seed("fit"));
        model.save(ctx.path("models/" + name + ".json"));
        ctx.record("models/" + name + ".json");
        const auto proba = model.predict_proba(split.test);
        o.report = eval::write_eval_report(ctx.path("reports/" + name + "/x").parent_path(), split.test.y, proba,
                                           split.test.class_names, name);
        record_report(ctx, "reports/" + name);
        o.test_accuracy = o.report["accuracy"].get<double>();
        write_grid_csv(ctx, "grids/" + name + ".csv", o.search);
        ctx.stage_done(name);
        outcomes.push_back(std::move(o));
    }

    {
        std::ofstream out(ctx.path("summary.csv"), std::ios::trunc);
        out << "kind,val_accuracy,test_accuracy,macro_f1,macro_auc,selected\n";
        for (const auto& o : outcomes) {
            std::string desc = ml::describe(o.search.best);
            std::replace(desc.begin(), desc.end(), ',', ';');
            out << ml::to_string(o.kind) << ',' << eval::format_double(o.val_accuracy) << ','
                << eval::format_double(o.test_accuracy) << ',' << eval::format_double(o.report["macro_f1"].get<double>())
                << ',' << eval::format_double(o.report["macro_auc"].get<double>()) << ',' << desc << '\n';
        }
    }
    ctx.record("summary.csv");
    std::vector<std::string> labels;
    std::vector<double> accs;
    nlohmann::json models = nlohmann::json::object();
    for (const auto& o : outcomes) {
        labels.emplace_back(ml::to_string(o.kind));
        accs.push_back(o.test_accuracy);
        models[std::string(ml::to_string(o.kind))] = {{"val_accuracy", o.val_accuracy},
                                                      {"test_accuracy", o.test_accuracy},
                                                      {"selected", ml::to_json(o.search.best)},
                                                      {"selected_index", o.search.selected},
                                                      {"report", o.report}};
    }
    eval::write_accuracy_bar_svg(ctx.path("accuracy.svg"), labels, accs, "Test accuracy per model");
    ctx.record("accuracy.svg");
    ctx.summary = {{"data", data_info}, {"models", models}};
    write_json(ctx, "summary.json", ctx.summary);
    return ctx.finish();
}

// --- image experiment ------------------------------------------------------------

nlohmann::json cmd_train_image(const RunConfig& config, const ImageRunOptions& opt) {
    RunContext ctx(config, "train-image");
    const auto& ic = config.image;
    const fs::path dir = !opt.image_dir.empty() ? opt.image_dir : fs::path(ic.image_dir);
    cnn::ImageSet all = dir.empty() ? make_jamming_images(ic.data, config.stage_seed("synth")) : load_image_tree(dir);
    ctx.stage_done("data");

    const auto sp = stratified_three_way(all.labels, ic.split, config.stage_seed("split"));
    const auto train_set = all.subset(sp.train), val_set = all.subset(sp.val), test_set = all.subset(sp.test);

    cnn::CnnArch arch = ic.arch;
    arch.input_height = all.height;
    arch.input_width = all.width;
    arch.n_classes = all.class_names.size();
    cnn::TrainConfig tc = ic.train;
    tc.seed = config.stage_seed("cnn_train");
    cnn::CnnModel model = cnn::make_model(arch, config.stage_seed("cnn_init"), all.class_names);
    cnn::TrainState state;
    if (!opt.resume.empty()) {
        cnn::TrainConfig saved;
        cnn::load_checkpoint(opt.resume, model, saved, state);
        if (cnn::to_json(model.net.arch) != cnn::to_json(arch))
            throw UsageError("resume: checkpoint architecture differs from the configured one");
        if (cnn::to_json(saved) != cnn::to_json(tc))
            throw UsageError("resume: checkpoint training config differs from the configured one");
        ctx.input(opt.resume);
    }
    const fs::path ckpt_rel = "cnn_checkpoint.json";
    const fs::path ckpt = ctx.path(ckpt_rel);
    cnn::TrainHooks hooks;
    hooks.stop_after_epoch = opt.stop_after_epoch;
    hooks.on_epoch = [&](const cnn::EpochRecord&) { cnn::save_checkpoint(ckpt, model, tc, state); };
    cnn::train(model, train_set, val_set, tc, state, hooks);
    cnn::save_checkpoint(ckpt, model, tc, state);
    ctx.record(ckpt_rel);
    cnn::write_history_csv(ctx.path("history.csv"), state.history);
    ctx.record("history.csv");
    ctx.stage_done("train");

    nlohmann::json summary = {{"n_train", train_set.size()},
                              {"n_val", val_set.size()},
                              {"n_test", test_set.size()},
                              {"parameters", model.net.parameter_count()},
                              {"epochs_done", state.epochs_done}};
    if (!state.history.empty()) summary["final_val_accuracy"] = state.history.back().val_acc;
    const bool complete = state.epochs_done == tc.epochs;
    if (complete) {
        const auto test_eval = cnn::evaluate(model, test_set);
        summary["cnn"] = eval::write_eval_report(ctx.path("reports/cnn/x").parent_path(), test_set.labels,
                                                 test_eval.proba, all.class_names, "CNN");
        record_report(ctx, "reports/cnn");
        ctx.stage_done("evaluate");

        if (ic.hybrid) {
            const std::size_t d = arch.embedding_dim();
            const auto ftr = features_dataset(cnn::extract_features(model, train_set), d, train_set.labels,
                                              all.class_names, "f");
            const auto fte = features_dataset(cnn::extract_features(model, test_set), d, test_set.labels,
                                              all.class_names, "f");
            const auto feat_model = ml::fit(ic.hybrid_forest, ftr, config.stage_seed("hybrid_forest"));
            summary["hybrid_features"] =
                eval::write_eval_report(ctx.path("reports/hybrid_features/x").parent_path(), fte.y,
                                        feat_model.predict_proba(fte), all.class_names, "CNN features + forest");
            record_report(ctx, "reports/hybrid_features");
            const auto ptr = pixels_dataset(train_set), pte = pixels_dataset(test_set);
            const auto pix_model = ml::fit(ic.hybrid_forest, ptr, config.stage_seed("hybrid_forest"));
            summary["hybrid_pixels"] =
                eval::write_eval_report(ctx.path("reports/hybrid_pixels/x").parent_path(), pte.y,
                                        pix_model.predict_proba(pte), all.class_names, "Raw pixels + forest");
            record_report(ctx, "reports/hybrid_pixels");
            ctx.stage_done("hybrid");
        }
    }
    ctx.summary = summary;
    write_json(ctx, "summary.json", summary);
    return ctx.finish();
}

// --- evaluate / grid-search / report ---------------------------------------------------

nlohmann::json cmd_evaluate(const RunConfig& config, const fs::path& model_path, const fs::path& data_path) {
    RunContext ctx(config, "evaluate");
    if (!fs::exists(model_path)) throw DataError("model file not found: " + model_path.string());
    if (!fs::exists(data_path)) throw DataError("data not found: " + data_path.string());
    ctx.input(model_path);
    nlohmann::json doc;
    {
        std::ifstream in(model_path);
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("model file is not valid JSON: " + model_path.string());
        }
    }
    const std::string format = doc.value("format", std::string());
    nlohmann::json summary;
    if (format == ml::kModelFormat) {
        const auto model = ml::ClassifierModel::from_json(doc);
        ctx.input(data_path);
        const auto ds = tabular::load_csv(data_path, model.feature_names, model.class_names);
        model.check_compatible(ds);
        summary = eval::write_eval_report(ctx.path("reports/evaluate/x").parent_path(), ds.y, model.predict_proba(ds),
                                          model.class_names, std::string(ml::to_string(model.kind)));
    } else if (format == cnn::kCheckpointFormat) {
        cnn::CnnModel model;
        cnn::TrainConfig tc;
        cnn::TrainState st;
        cnn::load_checkpoint_json(doc, model, tc, st);
        const auto set = load_image_tree(data_path);
        if (set.class_names != model.class_names) throw DataError("evaluate: image classes differ from the model's");
        const auto ev = cnn::evaluate(model, set);
        summary = eval::write_eval_report(ctx.path("reports/evaluate/x").parent_path(), set.labels, ev.proba,
                                          model.class_names, "CNN");
    } else {
        throw DataError("unrecognized model format '" + format + "' in " + model_path.string());
    }
    record_report(ctx, "reports/evaluate");
    ctx.summary = summary;
    write_json(ctx, "evaluate.json", summary);
    ctx.stage_done("evaluate");
    return ctx.finish();
}

nlohmann::json cmd_grid_search(const RunConfig& config, const std::vector<ml::ClassifierKind>& kinds_in,
                               const fs::path& data_csv) {
    RunContext ctx(config, "grid-search");
    const auto& s = config.spoofing;
    auto ds = spoofing_data(config, data_csv, nullptr);
    if (!data_csv.empty()) ctx.input(data_csv);
    ds = balance::rebalance(ds, s.balance, config.stage_seed("balance"), s.smote_k);
    const auto kinds = kinds_in.empty() ? s.kinds : kinds_in;
    nlohmann::json summary = nlohmann::json::object();
    for (const auto kind : kinds) {
        const std::string name(ml::to_string(kind));
        const auto r = eval::grid_search(kind, s.grid_for(kind), ds, s.cv_splits, s.cv_test_fraction,
                                         config.stage_seed("cv"));
        write_grid_csv(ctx, "grids/" + name + ".csv", r);
        summary[name] = {{"selected_index", r.selected},
                         {"selected", ml::to_json(r.best)},
                         {"mean_accuracy", r.candidates[r.selected].mean_accuracy},
                         {"log", r.log}};
        ctx.stage_done(name);
    }
    ctx.summary = summary;
    write_json(ctx, "grid_search.json", summary);
    return ctx.finish();
}

nlohmann::json cmd_report(const RunConfig& config, const fs::path& in_dir) {
    RunContext ctx(config, "report");
    if (!fs::is_directory(in_dir)) throw DataError("report input directory not found: " + in_dir.string());
    nlohmann::json summary = nlohmann::json::object();
    const fs::path sum = in_dir / "summary.csv";
    if (fs::exists(sum)) {
        ctx.input(sum);
        std::ifstream in(sum);
        std::string line;
        std::getline(in, line);
        std::vector<std::string> labels;
        std::vector<double> accs;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string kind, val, test;
            std::getline(ss, kind, ',');
            std::getline(ss, val, ',');
            std::getline(ss, test, ',');
            labels.push_back(kind);
            accs.push_back(std::stod(test));
        }
        eval::write_accuracy_bar_svg(ctx.path("accuracy.svg"), labels, accs, "Test accuracy per model");
        ctx.record("accuracy.svg");
        summary["accuracy_bars"] = labels.size();
    }
    std::vector<std::string> rendered;
    if (fs::is_directory(in_dir / "reports")) {
        std::vector<fs::path> dirs;
        for (const auto& e : fs::directory_iterator(in_dir / "reports"))
            if (e.is_directory() && fs::exists(e.path() / "confusion.csv")) dirs.push_back(e.path());
        std::sort(dirs.begin(), dirs.end());
        for (const auto& d : dirs) {
            const std::string name = d.filename().string();
            std::vector<std::string> classes;
            ctx.input(d / "confusion.csv");
            const auto cm = eval::read_confusion_csv(d / "confusion.csv", &classes);
            const fs::path rel = fs::path("reports") / name;
            eval::write_confusion_svg(ctx.path(rel / "confusion.svg"), cm, classes, name + " confusion matrix");
            ctx.record(rel / "confusion.svg");
            eval::RocResult roc;
            double s = 0.0;
            std::size_t present = 0;
            for (const auto& c : classes) {
                const fs::path f = d / ("roc_" + c + ".csv");
                if (fs::exists(f)) {
                    ctx.input(f);
                    roc.curves.push_back(eval::read_roc_csv(f));
                    s += roc.curves.back().auc;
                    ++present;
                } else {
                    roc.curves.emplace_back();
                }
            }
            roc.macro_auc = present ? s / static_cast<double>(present) : 0.0;
            eval::write_roc_svg(ctx.path(rel / "roc.svg"), roc, classes, name + " ROC (one-vs-rest)");
            ctx.record(rel / "roc.svg");
            rendered.push_back(name);
        }
    }
    const fs::path hist = in_dir / "history.csv";
    if (fs::exists(hist)) {
        ctx.input(hist);
        const auto h = cnn::read_history_csv(hist);
        std::vector<std::string> labels;
        std::vector<double> accs;
        for (const auto& r : h) {
            labels.push_back("ep" + std::to_string(r.epoch));
            accs.push_back(r.val_acc);
        }
        eval::write_accuracy_bar_svg(ctx.path("val_accuracy.svg"), labels, accs, "Validation accuracy per epoch");
        ctx.record("val_accuracy.svg");
    }
    if (rendered.empty() && !fs::exists(sum) && !fs::exists(hist))
        throw DataError("nothing to report under " + in_dir.string());
    summary["reports"] = rendered;
    ctx.summary = summary;
    ctx.stage_done("report");
    return ctx.finish();
}

}  // namespace gnss::pipeline
