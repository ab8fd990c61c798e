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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnss/balance/balance.hpp"
#include "gnss/cnn/train.hpp"
#include "gnss/ml/hyperparams.hpp"
#include "gnss/pipeline/benchmark.hpp"
#include "json.hpp"

namespace gnss::pipeline {

enum class BalanceScope { TrainOnly, All };

struct SpoofingConfig {
    std::string csv_path;  // empty: use the synthetic generator
    std::size_t n_per_class = 2000;
    double difficulty = 0.5;
    std::vector<double> imbalance{10, 5, 2, 1};
    double train_fraction = 0.7;
    balance::Method balance = balance::Method::Undersample;
    BalanceScope balance_scope = BalanceScope::TrainOnly;
    std::size_t smote_k = 5;
    std::size_t cv_splits = 5;
    double cv_test_fraction = 0.2;
    std::vector<ml::ClassifierKind> kinds{ml::kAllKinds.begin(), ml::kAllKinds.end()};
    /// Per-kind candidate lists; kinds without an entry use default_grid.
    std::map<ml::ClassifierKind, std::vector<ml::HyperParams>> grids;

    std::vector<ml::HyperParams> grid_for(ml::ClassifierKind kind) const;
};

struct ImageExperimentConfig {
    JammingSetConfig data{};
    std::string image_dir;  // empty: generate the synthetic set in memory
    std::vector<double> split{6, 1, 1};  // train/val/test weights
    cnn::CnnArch arch = cnn::CnnArch::desk();
    cnn::TrainConfig train{};
    bool hybrid = true;  // also fit a forest on CNN features and on raw pixels
    ml::ForestParams hybrid_forest{};
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out = "gnss_run";
    int threads = 1;
    /// Explicit per-stage seeds; stages not listed derive theirs from `seed`.
    std::map<std::string, std::uint64_t> stage_seeds;
    std::vector<synth::JamClass> synth_classes{synth::kAllJamClasses.begin(), synth::kAllJamClasses.end()};
    SpoofingConfig spoofing{};
    ImageExperimentConfig image{};
    nlohmann::json raw = nlohmann::json::object();

    std::uint64_t stage_seed(const std::string& stage) const;
};

/// Parses a config document; unknown top-level keys are rejected so typos
/// surface as usage errors.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Effective config after defaults, as stored in the manifest.
nlohmann::json to_json(const RunConfig& c);

/// Seed precedence: config file < GNSS_SENTINEL_SEED < --seed.
std::uint64_t resolve_seed(std::uint64_t config_seed, const char* env_value, std::optional<std::uint64_t> flag);
std::uint64_t parse_seed(const std::string& text);

std::string_view to_string(BalanceScope s) noexcept;

}  // namespace gnss::pipeline
