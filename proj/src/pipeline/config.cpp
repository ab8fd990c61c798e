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

#include "gnss/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <set>

#include "gnss/core/error.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::pipeline {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw UsageError("config: '" + where + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) {
            std::string msg = "config: unknown key '" + key + "' in " + where + "; valid:";
            for (const auto& a : allowed) msg += " " + a;
            throw UsageError(msg);
        }
}

std::uint64_t seed_value(const nlohmann::json& v) {
    if (v.is_string()) return parse_seed(v.get<std::string>());
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    throw UsageError("config: seeds must be non-negative integers");
}

SpoofingConfig spoofing_from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"csv", "n_per_class", "difficulty", "imbalance", "train_fraction", "balance", "balance_scope",
                    "smote_k", "cv_splits", "cv_test_fraction", "kinds", "grids"},
                   "spoofing");
    SpoofingConfig c;
    c.csv_path = j.value("csv", c.csv_path);
    c.n_per_class = j.value("n_per_class", c.n_per_class);
    c.difficulty = j.value("difficulty", c.difficulty);
    if (j.contains("imbalance")) c.imbalance = j.at("imbalance").get<std::vector<double>>();
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    if (j.contains("balance")) c.balance = balance::method_from_string(j.at("balance").get<std::string>());
    if (j.contains("balance_scope")) {
        const auto s = j.at("balance_scope").get<std::string>();
        if (s == "train") c.balance_scope = BalanceScope::TrainOnly;
        else if (s == "all") c.balance_scope = BalanceScope::All;
        else throw UsageError("config: balance_scope must be 'train' or 'all', got '" + s + "'");
    }
    c.smote_k = j.value("smote_k", c.smote_k);
    c.cv_splits = j.value("cv_splits", c.cv_splits);
    c.cv_test_fraction = j.value("cv_test_fraction", c.cv_test_fraction);
    if (j.contains("kinds")) {
        c.kinds.clear();
        for (const auto& k : j.at("kinds")) c.kinds.push_back(ml::kind_from_string(k.get<std::string>()));
        if (c.kinds.empty()) throw UsageError("config: spoofing.kinds is empty");
    }
    if (j.contains("grids")) {
        for (const auto& [name, list] : j.at("grids").items()) {
            const auto kind = ml::kind_from_string(name);
            std::vector<ml::HyperParams> grid;
            for (const auto& e : list) {
                grid.push_back(ml::hyperparams_from_json(kind, e));
                ml::validate(grid.back());
            }
            if (grid.empty()) throw UsageError("config: empty grid for " + name);
            c.grids[kind] = std::move(grid);
        }
    }
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw UsageError("config: train_fraction must be in (0,1)");
    if (!(c.cv_test_fraction > 0.0 && c.cv_test_fraction < 1.0))
        throw UsageError("config: cv_test_fraction must be in (0,1)");
    if (c.cv_splits == 0) throw UsageError("config: cv_splits must be >= 1");
    if (c.difficulty < 0.0 || c.difficulty > 1.0) throw UsageError("config: difficulty must be in [0,1]");
    if (!c.imbalance.empty() && c.imbalance.size() != 4) throw UsageError("config: imbalance needs one ratio per class");
    for (double r : c.imbalance)
        if (!(r > 0.0)) throw UsageError("config: imbalance ratios must be positive");
    return c;
}

ImageExperimentConfig image_from_json(const nlohmann::json& jam, const nlohmann::json& cnnj) {
    ImageExperimentConfig c;
    if (!jam.is_null()) {
        reject_unknown(jam,
                       {"per_class", "sample_rate_hz", "frames", "n_fft", "hop", "window", "image_size", "jsr_min_db",
                        "jsr_max_db", "classes", "image_dir", "split", "hybrid", "hybrid_forest"},
                       "jamming");
        nlohmann::json data = jam;
        for (const char* k : {"classes", "image_dir", "split", "hybrid", "hybrid_forest"}) data.erase(k);
        c.data = jamming_set_from_json(data);
        c.image_dir = jam.value("image_dir", c.image_dir);
        if (jam.contains("split")) c.split = jam.at("split").get<std::vector<double>>();
        c.hybrid = jam.value("hybrid", c.hybrid);
        if (jam.contains("hybrid_forest"))
            c.hybrid_forest = std::get<ml::ForestParams>(
                ml::hyperparams_from_json(ml::ClassifierKind::RandomForest, jam.at("hybrid_forest")));
    }
    if (c.split.size() != 3) throw UsageError("config: jamming.split needs train/val/test weights");
    for (double w : c.split)
        if (!(w > 0.0)) throw UsageError("config: jamming.split weights must be positive");
    c.arch.input_height = c.arch.input_width = c.data.image_size;
    if (!cnnj.is_null()) {
        reject_unknown(cnnj, {"preset", "arch", "train"}, "cnn");
        const auto preset = cnnj.value("preset", std::string("desk"));
        if (preset == "desk") c.arch = cnn::CnnArch::desk();
        else if (preset == "full_scale_guess") c.arch = cnn::CnnArch::full_scale_guess();
        else throw UsageError("config: cnn.preset must be 'desk' or 'full_scale_guess'");
        c.arch.input_height = c.arch.input_width = c.data.image_size;
        if (cnnj.contains("arch")) {
            nlohmann::json a = cnn::to_json(c.arch);
            a.update(cnnj.at("arch"));
            c.arch = cnn::arch_from_json(a);
        }
        if (cnnj.contains("train")) c.train = cnn::train_config_from_json(cnnj.at("train"));
    }
    if (c.arch.input_height != c.data.image_size || c.arch.input_width != c.data.image_size)
        throw UsageError("config: cnn input size must equal jamming.image_size");
    return c;
}

}  // namespace

std::vector<ml::HyperParams> SpoofingConfig::grid_for(ml::ClassifierKind kind) const {
    const auto it = grids.find(kind);
    return it != grids.end() ? it->second : ml::default_grid(kind);
}

std::uint64_t RunConfig::stage_seed(const std::string& stage) const {
    const auto it = stage_seeds.find(stage);
    return it != stage_seeds.end() ? it->second : derive_seed(seed, stage);
}

std::string_view to_string(BalanceScope s) noexcept { return s == BalanceScope::All ? "all" : "train"; }

std::uint64_t parse_seed(const std::string& text) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw UsageError("invalid seed '" + text + "': expected an unsigned 64-bit integer");
    return v;
}

std::uint64_t resolve_seed(std::uint64_t config_seed, const char* env_value, std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (env_value && *env_value) return parse_seed(env_value);
    return config_seed;
}

RunConfig config_from_json(const nlohmann::json& j) {
    try {
        reject_unknown(j, {"seed", "out", "threads", "stage_seeds", "jamming", "cnn", "spoofing"}, "config");
        RunConfig c;
        c.raw = j;
        if (j.contains("seed")) c.seed = seed_value(j.at("seed"));
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        c.threads = j.value("threads", c.threads);
        if (c.threads < 1) throw UsageError("config: threads must be >= 1");
        if (j.contains("stage_seeds"))
            for (const auto& [k, v] : j.at("stage_seeds").items()) c.stage_seeds[k] = seed_value(v);
        const nlohmann::json jam = j.contains("jamming") ? j.at("jamming") : nlohmann::json();
        if (jam.is_object() && jam.contains("classes")) {
            c.synth_classes.clear();
            for (const auto& n : jam.at("classes")) c.synth_classes.push_back(synth::jam_class_from_string(n.get<std::string>()));
            if (c.synth_classes.empty()) throw UsageError("config: jamming.classes is empty");
        }
        c.image = image_from_json(jam, j.contains("cnn") ? j.at("cnn") : nlohmann::json());
        if (j.contains("spoofing")) c.spoofing = spoofing_from_json(j.at("spoofing"));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file is not valid JSON: " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json classes = nlohmann::json::array();
    for (auto k : c.synth_classes) classes.push_back(std::string(synth::to_string(k)));
    nlohmann::json jam = to_json(c.image.data);
    jam["classes"] = classes;
    jam["image_dir"] = c.image.image_dir;
    jam["split"] = c.image.split;
    jam["hybrid"] = c.image.hybrid;
    jam["hybrid_forest"] = ml::to_json(ml::HyperParams{c.image.hybrid_forest});
    nlohmann::json kinds = nlohmann::json::array();
    nlohmann::json grids = nlohmann::json::object();
    for (auto k : c.spoofing.kinds) {
        kinds.push_back(std::string(ml::to_string(k)));
        nlohmann::json g = nlohmann::json::array();
        for (const auto& h : c.spoofing.grid_for(k)) g.push_back(ml::to_json(h));
        grids[std::string(ml::to_string(k))] = g;
    }
    const auto& s = c.spoofing;
    nlohmann::json stage = nlohmann::json::object();
    for (const auto& [k, v] : c.stage_seeds) stage[k] = v;
    return {{"seed", c.seed},
            {"out", c.out.string()},
            {"threads", c.threads},
            {"stage_seeds", stage},
            {"jamming", jam},
            {"cnn", {{"arch", cnn::to_json(c.image.arch)}, {"train", cnn::to_json(c.image.train)}}},
            {"spoofing",
             {{"csv", s.csv_path},
              {"n_per_class", s.n_per_class},
              {"difficulty", s.difficulty},
              {"imbalance", s.imbalance},
              {"train_fraction", s.train_fraction},
              {"balance", std::string(balance::to_string(s.balance))},
              {"balance_scope", std::string(to_string(s.balance_scope))},
              {"smote_k", s.smote_k},
              {"cv_splits", s.cv_splits},
              {"cv_test_fraction", s.cv_test_fraction},
              {"kinds", kinds},
              {"grids", grids}}}};
}

}  // namespace gnss::pipeline
