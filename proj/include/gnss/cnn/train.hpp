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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gnss/cnn/network.hpp"
#include "gnss/ml/classifier.hpp"
#include "json.hpp"

namespace gnss::cnn {

struct OneCyclePolicy {
    double lr_max = 0.05;
    std::size_t total_steps = 2;
    double pct_warmup = 0.25;
    double div_factor = 25.0;
    double final_div_factor = 1e4;
};

void validate(const OneCyclePolicy& p);
/// Warmup length: ceil(pct_warmup * total_steps), capped at total_steps - 1.
std::size_t warmup_steps(const OneCyclePolicy& p);
/// Linear ramp from lr_max/div_factor to lr_max over the warmup, then cosine
/// decay reaching lr_max/final_div_factor exactly at the last step.
double one_cycle_lr(const OneCyclePolicy& p, std::size_t step);

struct TrainConfig {
    std::size_t epochs = 15;
    std::size_t batch_size = 32;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    /// total_steps is recomputed from epochs and batch count during training.
    OneCyclePolicy policy{};
    std::uint64_t seed = 0;
};

void validate(const TrainConfig& c);
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Grayscale images stored as (n, h, w) raw 0..255 pixels.
struct ImageSet {
    std::size_t height = 0, width = 0;
    std::vector<float> pixels;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t image_size() const noexcept { return height * width; }
    /// Rows `idx` in order.
    ImageSet subset(std::span<const std::size_t> idx) const;
    void check() const;
};

/// Trained network plus the input normalization fitted on training pixels.
struct CnnModel {
    Network<float> net;
    float input_mean = 0.0f;
    float input_std = 1.0f;
    std::vector<std::string> class_names;
};

CnnModel make_model(const CnnArch& arch, std::uint64_t seed, std::vector<std::string> class_names = {});

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double lr_last = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

/// Everything needed to continue a run exactly where it stopped.
struct TrainState {
    std::size_t epochs_done = 0;
    std::size_t step = 0;
    bool normalization_fitted = false;
    std::vector<std::vector<float>> momentum;  // aligned with net.params()
    std::vector<EpochRecord> history;
};

struct TrainHooks {
    /// Stop after this many total epochs even if config.epochs is larger.
    std::optional<std::size_t> stop_after_epoch;
    std::function<void(const EpochRecord&)> on_epoch;
};

/// SGD with momentum and coupled weight decay under the one-cycle schedule.
/// The per-epoch shuffle is derived from (seed, epoch), so a resumed run
/// matches an uninterrupted one bit for bit. Throws NumericalError when a
/// batch loss turns non-finite.
void train(CnnModel& model, const ImageSet& train_set, const ImageSet& val_set, const TrainConfig& config,
           TrainState& state, const TrainHooks& hooks = {});

/// Normalized (n, 1, h, w) batch for rows [begin, end) of `order`.
Tensor<float> make_batch(const CnnModel& model, const ImageSet& set, std::span<const std::size_t> order);

struct EvalOutput {
    double loss = 0.0;
    double accuracy = 0.0;
    ml::ProbaMatrix proba;
};

/// Inference-mode pass over the whole set.
EvalOutput evaluate(CnnModel& model, const ImageSet& set, std::size_t batch_size = 64);
ml::ProbaMatrix predict_proba(CnnModel& model, const ImageSet& set, std::size_t batch_size = 64);
/// Pooled penultimate activations, one row of embedding_dim values per image.
std::vector<double> extract_features(CnnModel& model, const ImageSet& set, std::size_t batch_size = 64);

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);
std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path);

inline constexpr const char* kCheckpointFormat = "gnss-sentinel-cnn";
inline constexpr int kCheckpointVersion = 1;

nlohmann::json checkpoint_json(CnnModel& model, const TrainConfig& config, const TrainState& state);
void load_checkpoint_json(const nlohmann::json& j, CnnModel& model, TrainConfig& config, TrainState& state);
void save_checkpoint(const std::filesystem::path& path, CnnModel& model, const TrainConfig& config,
                     const TrainState& state);
void load_checkpoint(const std::filesystem::path& path, CnnModel& model, TrainConfig& config, TrainState& state);

}  // namespace gnss::cnn
