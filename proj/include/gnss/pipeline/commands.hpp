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

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gnss/pipeline/config.hpp"
#include "json.hpp"

namespace gnss::pipeline {

/// Tracks files written by one command and the time spent per stage.
class RunContext {
public:
    RunContext(const RunConfig& config, std::string command);

    const RunConfig& config() const noexcept { return config_; }
    const std::filesystem::path& out() const noexcept { return config_.out; }
    /// Absolute path for `rel` under the output directory; parents are created.
    std::filesystem::path path(const std::filesystem::path& rel);
    /// Records a written file (relative to out) for the manifest.
    void record(const std::filesystem::path& rel);
    void input(const std::filesystem::path& file);
    void stage_done(const std::string& stage);

    nlohmann::json summary = nlohmann::json::object();

    /// Hashes every recorded output and writes manifests/<command>.json.
    nlohmann::json finish();

private:
    const RunConfig& config_;
    std::string command_;
    std::vector<std::string> outputs_;
    std::vector<std::filesystem::path> inputs_;
    nlohmann::json timings_ = nlohmann::json::object();
    std::chrono::steady_clock::time_point start_, stage_start_;
};

/// Manifest document of the last run of `command` under `out`.
nlohmann::json read_manifest(const std::filesystem::path& out, const std::string& command);

nlohmann::json cmd_synth(const RunConfig& config);
nlohmann::json cmd_spectrogram(const RunConfig& config, const std::filesystem::path& iq_dir);
nlohmann::json cmd_train_tabular(const RunConfig& config, const std::filesystem::path& data_csv = {});

struct ImageRunOptions {
    std::filesystem::path image_dir;  // overrides config; empty uses config or synthetic data
    std::filesystem::path resume;     // checkpoint to continue from
    std::optional<std::size_t> stop_after_epoch;
};
nlohmann::json cmd_train_image(const RunConfig& config, const ImageRunOptions& options = {});

/// Classifier JSON + CSV data, or CNN checkpoint + image directory.
nlohmann::json cmd_evaluate(const RunConfig& config, const std::filesystem::path& model_path,
                            const std::filesystem::path& data_path);
nlohmann::json cmd_grid_search(const RunConfig& config, const std::vector<ml::ClassifierKind>& kinds,
                               const std::filesystem::path& data_csv = {});
/// Re-renders SVG plots from the CSV reports found under `in_dir`.
nlohmann::json cmd_report(const RunConfig& config, const std::filesystem::path& in_dir);

/// Loads images/<Class>/*.pgm (files sorted by name within each class).
cnn::ImageSet load_image_tree(const std::filesystem::path& dir);

/// Spoofing data as configured: CSV or synthetic with imbalance applied.
tabular::TabularDataset spoofing_data(const RunConfig& config, const std::filesystem::path& data_csv,
                                      nlohmann::json* info = nullptr);

/// Stratified three-way split by weights; per-class counts are rounded and
/// the remainder goes to train.
struct ThreeWaySplit {
    std::vector<std::size_t> train, val, test;
};
ThreeWaySplit stratified_three_way(std::span<const int> y, std::span<const double> weights, std::uint64_t seed);

}  // namespace gnss::pipeline
