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

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace gnss::ml {

enum class ClassifierKind { LogisticRegression, Knn, GaussianNB, LinearSvm, DecisionTree, RandomForest, GradientBoosting };

inline constexpr std::array<ClassifierKind, 7> kAllKinds{
    ClassifierKind::LogisticRegression, ClassifierKind::Knn,          ClassifierKind::GaussianNB,
    ClassifierKind::LinearSvm,          ClassifierKind::DecisionTree, ClassifierKind::RandomForest,
    ClassifierKind::GradientBoosting};

std::string_view to_string(ClassifierKind k) noexcept;
/// Accepts the canonical names ("logistic_regression", "knn", "gaussian_nb",
/// "linear_svm", "decision_tree", "random_forest", "gradient_boosting") and a
/// few short aliases (lr, nb, svm, dt, rf, gbm, xgboost).
ClassifierKind kind_from_string(std::string_view name);

struct LogisticParams {
    double lr = 1.0;  // initial step of the backtracking line search
    double l2 = 1e-3;
    int max_iter = 3000;
    double tol = 1e-5;  // stop when the gradient 2-norm falls below this
};

struct KnnParams {
    std::size_t k = 5;
};

struct NaiveBayesParams {
    double var_smoothing = 1e-9;  // fraction of the largest feature variance added to every variance
};

struct SvmParams {
    double l2 = 1e-3;
    int epochs = 300;
    double lr = 0.5;
};

struct TreeParams {
    int max_depth = 10;
    std::size_t min_samples_split = 2;
    double min_impurity_decrease = 0.0;
};

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_features = 0;  // 0 = ceil(sqrt(n_features))
    bool bootstrap = true;
    TreeParams tree{};
};

struct GbmParams {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    double subsample = 1.0;
    std::size_t min_samples_split = 2;
};

using HyperParams =
    std::variant<LogisticParams, KnnParams, NaiveBayesParams, SvmParams, TreeParams, ForestParams, GbmParams>;

ClassifierKind kind_of(const HyperParams& hp) noexcept;
HyperParams default_params(ClassifierKind kind);
/// Throws UsageError when counts are < 1 or rates are not positive.
void validate(const HyperParams& hp);
std::string describe(const HyperParams& hp);

nlohmann::json to_json(const HyperParams& hp);
/// Missing fields take their defaults.
HyperParams hyperparams_from_json(ClassifierKind kind, const nlohmann::json& j);

/// Small default grid per kind, used when a run configuration gives none.
std::vector<HyperParams> default_grid(ClassifierKind kind);

}  // namespace gnss::ml
