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

#include "gnss/ml/hyperparams.hpp"

#include <sstream>

#include "gnss/core/error.hpp"

namespace gnss::ml {

namespace {

struct KindName {
    ClassifierKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 7> kNames{{
    {ClassifierKind::LogisticRegression, "logistic_regression"},
    {ClassifierKind::Knn, "knn"},
    {ClassifierKind::GaussianNB, "gaussian_nb"},
    {ClassifierKind::LinearSvm, "linear_svm"},
    {ClassifierKind::DecisionTree, "decision_tree"},
    {ClassifierKind::RandomForest, "random_forest"},
    {ClassifierKind::GradientBoosting, "gradient_boosting"},
}};

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw UsageError("hyperparameters: " + msg);
}

}  // namespace

std::string_view to_string(ClassifierKind k) noexcept {
    for (const auto& kn : kNames)
        if (kn.kind == k) return kn.name;
    return "unknown";
}

ClassifierKind kind_from_string(std::string_view name) {
    for (const auto& kn : kNames)
        if (kn.name == name) return kn.kind;
    if (name == "lr" || name == "logistic") return ClassifierKind::LogisticRegression;
    if (name == "nb") return ClassifierKind::GaussianNB;
    if (name == "svm") return ClassifierKind::LinearSvm;
    if (name == "dt" || name == "tree") return ClassifierKind::DecisionTree;
    if (name == "rf" || name == "forest") return ClassifierKind::RandomForest;
    if (name == "gbm" || name == "xgboost") return ClassifierKind::GradientBoosting;
    std::string msg = "unknown classifier kind '" + std::string(name) + "'; valid:";
    for (const auto& kn : kNames) msg += " " + std::string(kn.name);
    throw UsageError(msg);
}

ClassifierKind kind_of(const HyperParams& hp) noexcept { return static_cast<ClassifierKind>(hp.index()); }

HyperParams default_params(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::LogisticRegression: return LogisticParams{};
        case ClassifierKind::Knn: return KnnParams{};
        case ClassifierKind::GaussianNB: return NaiveBayesParams{};
        case ClassifierKind::LinearSvm: return SvmParams{};
        case ClassifierKind::DecisionTree: return TreeParams{};
        case ClassifierKind::RandomForest: return ForestParams{};
        case ClassifierKind::GradientBoosting: return GbmParams{};
    }
    return LogisticParams{};
}

void validate(const HyperParams& hp) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LogisticParams>) {
                require(p.lr > 0.0 && p.tol > 0.0 && p.l2 >= 0.0, "logistic lr and tol must be > 0, l2 >= 0");
                require(p.max_iter >= 1, "logistic max_iter must be >= 1");
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                require(p.k >= 1, "knn k must be >= 1");
            } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                require(p.var_smoothing >= 0.0, "var_smoothing must be >= 0");
            } else if constexpr (std::is_same_v<T, SvmParams>) {
                require(p.lr > 0.0 && p.l2 > 0.0, "svm lr and l2 must be > 0");
                require(p.epochs >= 1, "svm epochs must be >= 1");
            } else if constexpr (std::is_same_v<T, TreeParams>) {
                require(p.max_depth >= 1 && p.min_samples_split >= 2, "tree max_depth >= 1, min_samples_split >= 2");
                require(p.min_impurity_decrease >= 0.0, "min_impurity_decrease must be >= 0");
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                require(p.n_trees >= 1, "forest n_trees must be >= 1");
                require(p.tree.max_depth >= 1 && p.tree.min_samples_split >= 2, "forest tree params invalid");
            } else if constexpr (std::is_same_v<T, GbmParams>) {
                require(p.n_rounds >= 1 && p.max_depth >= 1, "gbm n_rounds and max_depth must be >= 1");
                require(p.learning_rate > 0.0, "gbm learning_rate must be > 0");
                require(p.subsample > 0.0 && p.subsample <= 1.0, "gbm subsample must lie in (0, 1]");
                require(p.min_samples_split >= 2, "gbm min_samples_split must be >= 2");
            }
        },
        hp);
}

std::string describe(const HyperParams& hp) { return to_json(hp).dump(); }

nlohmann::json to_json(const HyperParams& hp) {
    return std::visit(
        [](const auto& p) -> nlohmann::json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LogisticParams>) {
                return {{"lr", p.lr}, {"l2", p.l2}, {"max_iter", p.max_iter}, {"tol", p.tol}};
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                return {{"k", p.k}};
            } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                return {{"var_smoothing", p.var_smoothing}};
            } else if constexpr (std::is_same_v<T, SvmParams>) {
                return {{"l2", p.l2}, {"epochs", p.epochs}, {"lr", p.lr}};
            } else if constexpr (std::is_same_v<T, TreeParams>) {
                return {{"max_depth", p.max_depth},
                        {"min_samples_split", p.min_samples_split},
                        {"min_impurity_decrease", p.min_impurity_decrease}};
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                return {{"n_trees", p.n_trees},
                        {"max_features", p.max_features},
                        {"bootstrap", p.bootstrap},
                        {"max_depth", p.tree.max_depth},
                        {"min_samples_split", p.tree.min_samples_split},
                        {"min_impurity_decrease", p.tree.min_impurity_decrease}};
            } else {
                return {{"n_rounds", p.n_rounds},
                        {"learning_rate", p.learning_rate},
                        {"max_depth", p.max_depth},
                        {"subsample", p.subsample},
                        {"min_samples_split", p.min_samples_split}};
            }
        },
        hp);
}

HyperParams hyperparams_from_json(ClassifierKind kind, const nlohmann::json& j) {
    HyperParams hp;
    try {
        switch (kind) {
            case ClassifierKind::LogisticRegression: {
                LogisticParams p;
                hp = LogisticParams{field(j, "lr", p.lr), field(j, "l2", p.l2), field(j, "max_iter", p.max_iter),
                                    field(j, "tol", p.tol)};
                break;
            }
            case ClassifierKind::Knn: hp = KnnParams{field<std::size_t>(j, "k", 5)}; break;
            case ClassifierKind::GaussianNB: hp = NaiveBayesParams{field(j, "var_smoothing", 1e-9)}; break;
            case ClassifierKind::LinearSvm: {
                SvmParams p;
                hp = SvmParams{field(j, "l2", p.l2), field(j, "epochs", p.epochs), field(j, "lr", p.lr)};
                break;
            }
            case ClassifierKind::DecisionTree: {
                TreeParams p;
                hp = TreeParams{field(j, "max_depth", p.max_depth), field(j, "min_samples_split", p.min_samples_split),
                                field(j, "min_impurity_decrease", p.min_impurity_decrease)};
                break;
            }
            case ClassifierKind::RandomForest: {
                ForestParams p;
                p.n_trees = field(j, "n_trees", p.n_trees);
                p.max_features = field(j, "max_features", p.max_features);
                p.bootstrap = field(j, "bootstrap", p.bootstrap);
                p.tree.max_depth = field(j, "max_depth", p.tree.max_depth);
                p.tree.min_samples_split = field(j, "min_samples_split", p.tree.min_samples_split);
                p.tree.min_impurity_decrease = field(j, "min_impurity_decrease", p.tree.min_impurity_decrease);
                hp = p;
                break;
            }
            case ClassifierKind::GradientBoosting: {
                GbmParams p;
                p.n_rounds = field(j, "n_rounds", p.n_rounds);
                p.learning_rate = field(j, "learning_rate", p.learning_rate);
                p.max_depth = field(j, "max_depth", p.max_depth);
                p.subsample = field(j, "subsample", p.subsample);
                p.min_samples_split = field(j, "min_samples_split", p.min_samples_split);
                hp = p;
                break;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("hyperparameters for ") + std::string(to_string(kind)) + ": " + e.what());
    }
    validate(hp);
    return hp;
}

std::vector<HyperParams> default_grid(ClassifierKind kind) {
    std::vector<HyperParams> grid;
    switch (kind) {
        case ClassifierKind::LogisticRegression:
            for (double l2 : {1e-4, 1e-3, 1e-2}) grid.push_back(LogisticParams{1.0, l2, 3000, 1e-5});
            break;
        case ClassifierKind::Knn:
            for (std::size_t k : {3, 5, 9, 15}) grid.push_back(KnnParams{k});
            break;
        case ClassifierKind::GaussianNB:
            for (double v : {1e-9, 1e-6, 1e-3}) grid.push_back(NaiveBayesParams{v});
            break;
        case ClassifierKind::LinearSvm:
            for (double l2 : {1e-4, 1e-3, 1e-2}) grid.push_back(SvmParams{l2, 300, 0.5});
            break;
        case ClassifierKind::DecisionTree:
            for (int depth : {4, 6, 8, 12}) grid.push_back(TreeParams{depth, 2, 0.0});
            break;
        case ClassifierKind::RandomForest:
            for (int depth : {8, 16}) {
                ForestParams p;
                p.n_trees = 100;
                p.tree.max_depth = depth;
                grid.push_back(p);
            }
            break;
        case ClassifierKind::GradientBoosting:
            for (int depth : {2, 3})
                for (double rate : {0.1, 0.3}) grid.push_back(GbmParams{100, rate, depth, 1.0, 2});
            break;
    }
    return grid;
}

}  // namespace gnss::ml
