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
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gnss/ml/hyperparams.hpp"
#include "gnss/ml/tree.hpp"
#include "gnss/tabular/dataset.hpp"
#include "json.hpp"

namespace gnss::ml {

/// n x K row-major probability matrix.
struct ProbaMatrix {
    std::size_t rows = 0;
    std::size_t classes = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t i) const { return {values.data() + i * classes, classes}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * classes, classes}; }
    /// Column c as a contiguous vector.
    std::vector<double> column(std::size_t c) const;
};

/// Row of argmax with lowest-index tie-break.
int argmax(std::span<const double> values);

struct LogisticModel {
    tabular::Standardizer scaler;
    std::vector<double> weights;  // K x d row-major, on standardized features
    std::vector<double> bias;     // K
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
};

struct KnnModel {
    tabular::Standardizer scaler;
    std::vector<double> points;  // standardized training rows
    std::vector<int> labels;
    std::size_t k = 5;
};

struct NaiveBayesModel {
    std::vector<double> log_prior;  // K; -inf for classes absent from training
    std::vector<double> mean;       // K x d
    std::vector<double> var;        // K x d, smoothed
};

struct SvmModel {
    tabular::Standardizer scaler;
    std::vector<double> weights;  // K x d
    std::vector<double> bias;
};

struct TreeModel {
    Tree tree;
};

struct ForestModel {
    std::vector<Tree> trees;
};

struct GbmModel {
    std::vector<double> init;         // K initial scores (log priors)
    double learning_rate = 0.1;
    std::vector<std::vector<Tree>> rounds;  // rounds x K
    std::vector<double> train_deviance;     // mean multinomial deviance after each round
};

/// Fallback for training sets holding a single class.
struct ConstantModel {
    int label = 0;
};

using ModelState =
    std::variant<LogisticModel, KnnModel, NaiveBayesModel, SvmModel, TreeModel, ForestModel, GbmModel, ConstantModel>;

/// Trained classifier. Immutable after fit; safe to share across threads.
class ClassifierModel {
public:
    ClassifierKind kind = ClassifierKind::DecisionTree;
    HyperParams hyper = TreeParams{};
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    std::string schema_fingerprint;
    ModelState state;

    std::size_t n_features() const noexcept { return feature_names.size(); }
    std::size_t n_classes() const noexcept { return class_names.size(); }

    /// Writes K probabilities for one row; `out` must have n_classes() slots.
    void proba_row(std::span<const double> x, std::span<double> out) const;
    ProbaMatrix predict_proba(const tabular::TabularDataset& ds) const;
    ProbaMatrix predict_proba(MatrixView X) const;
    std::vector<int> predict(const tabular::TabularDataset& ds) const;
    std::vector<int> predict(MatrixView X) const;

    /// Throws DataError when the dataset's columns differ from the training schema.
    void check_compatible(const tabular::TabularDataset& ds) const;

    nlohmann::json to_json() const;
    static ClassifierModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static ClassifierModel load(const std::filesystem::path& path);
};

inline constexpr const char* kModelFormat = "gnss-sentinel-classifier";
inline constexpr int kModelFormatVersion = 1;

/// Trains `hyper`'s kind on `train`. Deterministic in `seed`; forests derive
/// per-tree streams from it so results do not depend on the thread count.
ClassifierModel fit(const HyperParams& hyper, const tabular::TabularDataset& train, std::uint64_t seed);

// Linear-model internals, exposed for verification.

/// Mean cross-entropy plus (l2/2)||W||^2 over standardized rows, and its
/// gradient laid out as [W (K x d) row-major, b (K)].
double logistic_objective(std::span<const double> params, MatrixView X, std::span<const int> y, std::size_t n_classes,
                          double l2, std::vector<double>* grad);

}  // namespace gnss::ml
