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
#include <functional>
#include <span>
#include <vector>

#include "gnss/core/rng.hpp"
#include "gnss/ml/hyperparams.hpp"
#include "json.hpp"

namespace gnss::ml {

/// Non-owning row-major matrix view.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return {data + i * cols, cols}; }
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    std::vector<double> value;  // class distribution, or a single regression output

    bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    const TreeNode& leaf_for(std::span<const double> x) const;
    int depth() const;
    std::size_t leaf_count() const;

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);
};

/// Settings shared by the CART growers. `max_features` < number of columns
/// draws that many candidate features per split (without replacement) from
/// `rng`; otherwise every feature is scanned.
struct GrowOptions {
    int max_depth = 10;
    std::size_t min_samples_split = 2;
    double min_impurity_decrease = 0.0;
    std::size_t max_features = 0;
};

/// CART with Gini impurity. Split candidates are midpoints between
/// consecutive distinct sorted values; the best weighted Gini gain wins and
/// ties go to the lower feature index, then the lower threshold. Leaves hold
/// class fractions. `rows` may contain repeats (bootstrap samples).
Tree grow_classification_tree(MatrixView X, std::span<const int> y, std::size_t n_classes,
                              std::span<const std::size_t> rows, const GrowOptions& options, Rng* rng = nullptr);

/// Least-squares regression tree; leaf outputs come from `leaf_value`
/// applied to the rows reaching the leaf.
using LeafValueFn = std::function<double(std::span<const std::size_t>)>;
Tree grow_regression_tree(MatrixView X, std::span<const double> target, std::span<const std::size_t> rows,
                          const GrowOptions& options, const LeafValueFn& leaf_value);

}  // namespace gnss::ml
