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

#include "gnss/cnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gnss/core/error.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::cnn {

void validate(const OneCyclePolicy& p) {
    if (!(p.lr_max > 0.0) || !(p.div_factor > 0.0) || !(p.final_div_factor > 0.0))
        throw UsageError("one-cycle policy: lr_max, div_factor and final_div_factor must be positive");
    if (!(p.pct_warmup > 0.0 && p.pct_warmup < 1.0)) throw UsageError("one-cycle policy: pct_warmup must be in (0,1)");
    if (p.total_steps < 2) throw UsageError("one-cycle policy: total_steps must be at least 2");
}

std::size_t warmup_steps(const OneCyclePolicy& p) {
    const auto w = static_cast<std::size_t>(std::ceil(p.pct_warmup * static_cast<double>(p.total_steps)));
    return std::clamp<std::size_t>(w, 1, p.total_steps - 1);
}

double one_cycle_lr(const OneCyclePolicy& p, std::size_t step) {
    validate(p);
    if (step >= p.total_steps)
        throw UsageError("one_cycle_lr: step " + std::to_string(step) + " outside [0, " +
                         std::to_string(p.total_steps) + ")");
    const double lr0 = p.lr_max / p.div_factor;
    const double lr_end = p.lr_max / p.final_div_factor;
    if (step == p.total_steps - 1) return lr_end;
    const std::size_t w = warmup_steps(p);
    if (step <= w) return lr0 + (p.lr_max - lr0) * static_cast<double>(step) / static_cast<double>(w);
    const double t = static_cast<double>(step - w) / static_cast<double>(p.total_steps - 1 - w);
    return lr_end + (p.lr_max - lr_end) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void validate(const TrainConfig& c) {
    if (c.epochs < 1) throw UsageError("train config: epochs must be >= 1");
    if (c.batch_size < 1) throw UsageError("train config: batch_size must be >= 1");
    if (c.momentum < 0.0 || c.momentum >= 1.0) throw UsageError("train config: momentum must be in [0,1)");
    if (c.weight_decay < 0.0) throw UsageError("train config: weight_decay must be >= 0");
    OneCyclePolicy p = c.policy;
    p.total_steps = std::max<std::size_t>(p.total_steps, 2);
    validate(p);
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"lr_max", c.policy.lr_max},
            {"pct_warmup", c.policy.pct_warmup},
            {"div_factor", c.policy.div_factor},
            {"final_div_factor", c.policy.final_div_factor},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.momentum = j.value("momentum", c.momentum);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.policy.lr_max = j.value("lr_max", c.policy.lr_max);
    c.policy.pct_warmup = j.value("pct_warmup", c.policy.pct_warmup);
    c.policy.div_factor = j.value("div_factor", c.policy.div_factor);
    c.policy.final_div_factor = j.value("final_div_factor", c.policy.final_div_factor);
    c.seed = j.value("seed", c.seed);
    validate(c);
    return c;
}

ImageSet ImageSet::subset(std::span<const std::size_t> idx) const {
    ImageSet out;
    out.height = height;
    out.width = width;
    out.class_names = class_names;
    out.pixels.reserve(idx.size() * image_size());
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) {
        if (i >= size()) throw UsageError("ImageSet::subset: index out of range");
        out.pixels.insert(out.pixels.end(), pixels.begin() + static_cast<std::ptrdiff_t>(i * image_size()),
                          pixels.begin() + static_cast<std::ptrdiff_t>((i + 1) * image_size()));
        out.labels.push_back(labels[i]);
    }
    return out;
}

void ImageSet::check() const {
    if (pixels.size() != labels.size() * image_size()) throw DataError("image set: pixel buffer size mismatch");
    for (int y : labels)
        if (y < 0 || (!class_names.empty() && static_cast<std::size_t>(y) >= class_names.size()))
            throw DataError("image set: label " + std::to_string(y) + " out of range");
    for (float v : pixels)
        if (!std::isfinite(v)) throw DataError("image set: non-finite pixel");
}

CnnModel make_model(const CnnArch& arch, std::uint64_t seed, std::vector<std::string> class_names) {
    CnnModel m;
    m.net = Network<float>(arch);
    m.net.init(seed);
    if (class_names.empty())
        for (std::size_t c = 0; c < arch.n_classes; ++c) class_names.push_back("class" + std::to_string(c));
    if (class_names.size() != arch.n_classes) throw UsageError("make_model: class name count differs from n_classes");
    m.class_names = std::move(class_names);
    return m;
}

Tensor<float> make_batch(const CnnModel& model, const ImageSet& set, std::span<const std::size_t> order) {
    const std::size_t sz = set.image_size();
    Tensor<float> x(order.size(), 1, set.height, set.width);
    const float inv = 1.0f / model.input_std;
    for (std::size_t b = 0; b < order.size(); ++b) {
        const float* src = set.pixels.data() + order[b] * sz;
        float* dst = x.sample(b);
        for (std::size_t j = 0; j < sz; ++j) dst[j] = (src[j] - model.input_mean) * inv;
    }
    return x;
}

namespace {

void check_geometry(const CnnModel& model, const ImageSet& set, const char* who) {
    const auto& a = model.net.arch;
    if (set.height != a.input_height || set.width != a.input_width || a.in_channels != 1)
        throw DataError(std::string(who) + ": images are " + std::to_string(set.height) + "x" +
                        std::to_string(set.width) + ", model expects " + std::to_string(a.input_height) + "x" +
                        std::to_string(a.input_width));
}

void fit_normalization(CnnModel& model, const ImageSet& set) {
    double s = 0.0, ss = 0.0;
    for (float v : set.pixels) s += v;
    const double n = static_cast<double>(set.pixels.size());
    const double mean = s / n;
    for (float v : set.pixels) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    model.input_mean = static_cast<float>(mean);
    model.input_std = sd > 1e-6 ? static_cast<float>(sd) : 1.0f;
}

}  // namespace

void train(CnnModel& model, const ImageSet& train_set, const ImageSet& val_set, const TrainConfig& config,
           TrainState& state, const TrainHooks& hooks) {
    validate(config);
    if (train_set.size() == 0 || val_set.size() == 0) throw DataError("train: training and validation sets must be non-empty");
    train_set.check();
    val_set.check();
    check_geometry(model, train_set, "train");
    check_geometry(model, val_set, "train");
    for (int y : train_set.labels)
        if (static_cast<std::size_t>(y) >= model.net.arch.n_classes)
            throw DataError("train: label " + std::to_string(y) + " outside model classes");

    if (!state.normalization_fitted) {
        fit_normalization(model, train_set);
        state.normalization_fitted = true;
    }
    auto params = model.net.params();
    if (state.momentum.empty()) {
        for (const auto& p : params) state.momentum.emplace_back(p.value->size(), 0.0f);
    } else if (state.momentum.size() != params.size()) {
        throw DataError("train: momentum state does not match network parameters");
    }

    const std::size_t n = train_set.size();
    const std::size_t per_epoch = (n + config.batch_size - 1) / config.batch_size;
    OneCyclePolicy policy = config.policy;
    // A single-step run still needs a two-point schedule; it uses the ramp start.
    policy.total_steps = std::max<std::size_t>(config.epochs * per_epoch, 2);

    const std::size_t last_epoch = std::min(config.epochs, hooks.stop_after_epoch.value_or(config.epochs));
    const float mu = static_cast<float>(config.momentum);
    const float wd = static_cast<float>(config.weight_decay);
    std::vector<int> batch_labels;
    for (std::size_t e = state.epochs_done; e < last_epoch; ++e) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(config.seed, "epoch", e));
        rng.shuffle(std::span<std::size_t>(order));

        double loss_sum = 0.0, lr = 0.0;
        for (std::size_t b = 0; b < per_epoch; ++b) {
            const std::size_t lo = b * config.batch_size, hi = std::min(n, lo + config.batch_size);
            const std::span<const std::size_t> idx(order.data() + lo, hi - lo);
            const Tensor<float> x = make_batch(model, train_set, idx);
            batch_labels.clear();
            for (std::size_t i : idx) batch_labels.push_back(train_set.labels[i]);

            lr = one_cycle_lr(policy, state.step);
            const double loss = model.net.loss_and_grad(x, batch_labels);
            if (!std::isfinite(loss))
                throw NumericalError("training diverged: non-finite loss at epoch " + std::to_string(e + 1) +
                                     ", step " + std::to_string(state.step));
            loss_sum += loss * static_cast<double>(idx.size());

            const float lrf = static_cast<float>(lr);
            for (std::size_t p = 0; p < params.size(); ++p) {
                auto& w = *params[p].value;
                const auto& g = *params[p].grad;
                auto& buf = state.momentum[p];
                for (std::size_t i = 0; i < w.size(); ++i) {
                    buf[i] = mu * buf[i] + (g[i] + wd * w[i]);
                    w[i] -= lrf * buf[i];
                }
            }
            ++state.step;
        }

        const EvalOutput val = evaluate(model, val_set);
        EpochRecord rec{e + 1, lr, loss_sum / static_cast<double>(n), val.loss, val.accuracy};
        if (!std::isfinite(rec.val_loss)) throw NumericalError("validation loss is non-finite at epoch " + std::to_string(e + 1));
        state.history.push_back(rec);
        state.epochs_done = e + 1;
        if (hooks.on_epoch) hooks.on_epoch(rec);
    }
}

EvalOutput evaluate(CnnModel& model, const ImageSet& set, std::size_t batch_size) {
    check_geometry(model, set, "evaluate");
    const std::size_t n = set.size(), k = model.net.arch.n_classes;
    EvalOutput out;
    out.proba = ml::ProbaMatrix{n, k, std::vector<double>(n * k)};
    std::vector<std::size_t> idx;
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t lo = 0; lo < n; lo += batch_size) {
        const std::size_t hi = std::min(n, lo + batch_size);
        idx.resize(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        const Tensor<float> logits = model.net.forward(make_batch(model, set, idx), false);
        for (std::size_t b = 0; b < idx.size(); ++b) {
            const float* z = logits.sample(b);
            auto row = out.proba.row(lo + b);
            const double m = *std::max_element(z, z + k);
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                row[j] = std::exp(static_cast<double>(z[j]) - m);
                s += row[j];
            }
            for (auto& v : row) v /= s;
            const int y = set.labels[lo + b];
            if (y >= 0 && static_cast<std::size_t>(y) < k) {
                loss += m + std::log(s) - z[y];
                if (ml::argmax(row) == y) ++correct;
            }
        }
    }
    out.loss = n ? loss / static_cast<double>(n) : 0.0;
    out.accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    return out;
}

ml::ProbaMatrix predict_proba(CnnModel& model, const ImageSet& set, std::size_t batch_size) {
    return evaluate(model, set, batch_size).proba;
}

std::vector<double> extract_features(CnnModel& model, const ImageSet& set, std::size_t batch_size) {
    check_geometry(model, set, "extract_features");
    const std::size_t n = set.size(), d = model.net.arch.embedding_dim();
    std::vector<double> out(n * d);
    std::vector<std::size_t> idx;
    for (std::size_t lo = 0; lo < n; lo += batch_size) {
        const std::size_t hi = std::min(n, lo + batch_size);
        idx.resize(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        model.net.forward(make_batch(model, set, idx), false);
        const auto& f = model.net.features();
        std::copy(f.data.begin(), f.data.end(), out.begin() + static_cast<std::ptrdiff_t>(lo * d));
    }
    return out;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write history: " + path.string());
    out << "epoch,lr_last,train_loss,val_loss,val_acc\n";
    out.precision(17);
    for (const auto& r : history)
        out << r.epoch << ',' << r.lr_last << ',' << r.train_loss << ',' << r.val_loss << ',' << r.val_acc << '\n';
}

std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open history: " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<EpochRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        EpochRecord r;
        if (!(ss >> r.epoch >> r.lr_last >> r.train_loss >> r.val_loss >> r.val_acc))
            throw DataError("malformed history row: " + line);
        out.push_back(r);
    }
    return out;
}

nlohmann::json checkpoint_json(CnnModel& model, const TrainConfig& config, const TrainState& state) {
    nlohmann::json params = nlohmann::json::object(), buffers = nlohmann::json::object(),
                   momentum = nlohmann::json::object();
    const auto prefs = model.net.params();
    for (std::size_t i = 0; i < prefs.size(); ++i) {
        params[prefs[i].name] = *prefs[i].value;
        if (i < state.momentum.size()) momentum[prefs[i].name] = state.momentum[i];
    }
    for (const auto& b : model.net.buffers()) buffers[b.name] = *b.value;
    nlohmann::json history = nlohmann::json::array();
    for (const auto& r : state.history)
        history.push_back({{"epoch", r.epoch},
                           {"lr_last", r.lr_last},
                           {"train_loss", r.train_loss},
                           {"val_loss", r.val_loss},
                           {"val_acc", r.val_acc}});
    return {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"arch", to_json(model.net.arch)},
            {"class_names", model.class_names},
            {"input_mean", model.input_mean},
            {"input_std", model.input_std},
            {"params", params},
            {"buffers", buffers},
            {"config", to_json(config)},
            {"state",
             {{"epochs_done", state.epochs_done},
              {"step", state.step},
              {"normalization_fitted", state.normalization_fitted},
              {"momentum", momentum},
              {"history", history}}}};
}

void load_checkpoint_json(const nlohmann::json& j, CnnModel& model, TrainConfig& config, TrainState& state) {
    try {
        if (j.at("format").get<std::string>() != kCheckpointFormat) throw DataError("not a CNN checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw DataError("unsupported CNN checkpoint version " + j.at("version").dump());
        CnnModel m;
        m.net = Network<float>(arch_from_json(j.at("arch")));
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.input_mean = j.at("input_mean").get<float>();
        m.input_std = j.at("input_std").get<float>();
        TrainState st;
        const auto& js = j.at("state");
        st.epochs_done = js.at("epochs_done").get<std::size_t>();
        st.step = js.at("step").get<std::size_t>();
        st.normalization_fitted = js.at("normalization_fitted").get<bool>();
        const auto& mom = js.at("momentum");
        for (auto& p : m.net.params()) {
            const auto v = j.at("params").at(p.name).get<std::vector<float>>();
            if (v.size() != p.value->size()) throw DataError("checkpoint: size mismatch for " + p.name);
            *p.value = v;
            if (!mom.empty()) {
                auto buf = mom.at(p.name).get<std::vector<float>>();
                if (buf.size() != v.size()) throw DataError("checkpoint: momentum size mismatch for " + p.name);
                st.momentum.push_back(std::move(buf));
            }
        }
        for (auto& b : m.net.buffers()) {
            const auto v = j.at("buffers").at(b.name).get<std::vector<float>>();
            if (v.size() != b.value->size()) throw DataError("checkpoint: size mismatch for " + b.name);
            *b.value = v;
        }
        for (const auto& r : js.at("history"))
            st.history.push_back({r.at("epoch").get<std::size_t>(), r.at("lr_last").get<double>(),
                                  r.at("train_loss").get<double>(), r.at("val_loss").get<double>(),
                                  r.at("val_acc").get<double>()});
        config = train_config_from_json(j.at("config"));
        model = std::move(m);
        state = std::move(st);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed CNN checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, CnnModel& model, const TrainConfig& config,
                     const TrainState& state) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out << checkpoint_json(model, config, state).dump() << '\n';
}

void load_checkpoint(const std::filesystem::path& path, CnnModel& model, TrainConfig& config, TrainState& state) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("checkpoint is not valid JSON: " + path.string() + ": " + e.what());
    }
    load_checkpoint_json(j, model, config, state);
}

}  // namespace gnss::cnn
