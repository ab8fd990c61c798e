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

#include "gnss/ml/tree.hpp"

#include <algorithm>
#include <numeric>

#include "gnss/core/error.hpp"

namespace gnss::ml {

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                         : nodes[i].right);
    return nodes[i];
}

int Tree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

nlohmann::json Tree::to_json() const {
    nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(), value = nlohmann::json::array();
    for (const auto& n : nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

Tree Tree::from_json(const nlohmann::json& j) {
    Tree t;
    const auto& feature = j.at("feature");
    t.nodes.resize(feature.size());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        auto& n = t.nodes[i];
        n.feature = feature.at(i).get<int>();
        n.threshold = j.at("threshold").at(i).get<double>();
        n.left = j.at("left").at(i).get<int>();
        n.right = j.at("right").at(i).get<int>();
        n.value = j.at("value").at(i).get<std::vector<double>>();
        const int limit = static_cast<int>(t.nodes.size());
        if (!n.is_leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) || n.left >= limit ||
                             n.right >= limit))
            throw DataError("tree: malformed child index at node " + std::to_string(i));
    }
    if (t.nodes.empty()) throw DataError("tree: no nodes");
    return t;
}

namespace {

struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double split_threshold(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    // Adjacent doubles can round the midpoint up onto hi.
    return mid < hi ? mid : lo;
}

std::vector<std::size_t> candidate_features(std::size_t n_cols, std::size_t max_features, Rng* rng) {
    std::vector<std::size_t> feats(n_cols);
    std::iota(feats.begin(), feats.end(), 0);
    if (max_features == 0 || max_features >= n_cols || rng == nullptr) return feats;
    for (std::size_t i = 0; i < max_features; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng->below(n_cols - i));
        std::swap(feats[i], feats[j]);
    }
    feats.resize(max_features);
    std::sort(feats.begin(), feats.end());
    return feats;
}

void sort_by_feature(MatrixView X, std::size_t f, std::vector<std::size_t>& order) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = X.at(a, f), xb = X.at(b, f);
        return xa < xb || (xa == xb && a < b);
    });
}

class ClassificationGrower {
public:
    ClassificationGrower(MatrixView X, std::span<const int> y, std::size_t k, const GrowOptions& opt, Rng* rng,
                         std::size_t total)
        : X_(X), y_(y), k_(k), opt_(opt), rng_(rng), total_(static_cast<double>(total)) {}

    int grow(std::vector<std::size_t> rows, int depth) {
        std::vector<double> counts(k_, 0.0);
        for (std::size_t r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
        const double n = static_cast<double>(rows.size());
        const double impurity = gini(counts, n);

        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        Candidate best;
        if (depth < opt_.max_depth && rows.size() >= opt_.min_samples_split && impurity > 0.0)
            best = find_split(rows, counts, impurity);
        if (best.feature < 0 || (n / total_) * best.gain < opt_.min_impurity_decrease) {
            auto& leaf = tree.nodes[static_cast<std::size_t>(id)];
            leaf.value = counts;
            for (auto& v : leaf.value) v /= n;
            return id;
        }
        std::vector<std::size_t> left, right;
        const auto f = static_cast<std::size_t>(best.feature);
        for (std::size_t r : rows) (X_.at(r, f) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Tree tree;

private:
    static double gini(const std::vector<double>& counts, double n) {
        if (n <= 0.0) return 0.0;
        double s = 0.0;
        for (double c : counts) s += c * c;
        return 1.0 - s / (n * n);
    }

    Candidate find_split(const std::vector<std::size_t>& rows, const std::vector<double>& counts, double impurity) {
        Candidate best;
        best.gain = -1e-12;
        std::vector<std::size_t> order = rows;
        std::vector<double> left(k_), right(k_);
        const double n = static_cast<double>(rows.size());
        for (std::size_t f : candidate_features(X_.cols, opt_.max_features, rng_)) {
            sort_by_feature(X_, f, order);
            std::fill(left.begin(), left.end(), 0.0);
            right = counts;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const auto c = static_cast<std::size_t>(y_[order[i]]);
                left[c] += 1.0;
                right[c] -= 1.0;
                const double xi = X_.at(order[i], f), xn = X_.at(order[i + 1], f);
                if (xi == xn) continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                const double weighted = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
                const double gain = impurity - weighted;
                if (gain > best.gain) best = {static_cast<int>(f), split_threshold(xi, xn), gain};
            }
        }
        if (best.feature >= 0) best.gain = std::max(best.gain, 0.0);
        return best;
    }

    MatrixView X_;
    std::span<const int> y_;
    std::size_t k_;
    GrowOptions opt_;
    Rng* rng_;
    double total_;
};

class RegressionGrower {
public:
    RegressionGrower(MatrixView X, std::span<const double> t, const GrowOptions& opt, const LeafValueFn& leaf)
        : X_(X), t_(t), opt_(opt), leaf_(leaf) {}

    int grow(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        Candidate best;
        if (depth < opt_.max_depth && rows.size() >= opt_.min_samples_split) best = find_split(rows);
        if (best.feature < 0) {
            tree.nodes[static_cast<std::size_t>(id)].value = {leaf_(rows)};
            return id;
        }
        std::vector<std::size_t> left, right;
        const auto f = static_cast<std::size_t>(best.feature);
        for (std::size_t r : rows) (X_.at(r, f) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Tree tree;

private:
    // Maximizes S_l^2/n_l + S_r^2/n_r - S^2/n, the squared-error reduction.
    Candidate find_split(const std::vector<std::size_t>& rows) {
        double total = 0.0;
        for (std::size_t r : rows) total += t_[r];
        const double n = static_cast<double>(rows.size());
        const double base = total * total / n;
        Candidate best;
        best.gain = 1e-12 * n;
        std::vector<std::size_t> order = rows;
        for (std::size_t f = 0; f < X_.cols; ++f) {
            sort_by_feature(X_, f, order);
            double sl = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                sl += t_[order[i]];
                const double xi = X_.at(order[i], f), xn = X_.at(order[i + 1], f);
                if (xi == xn) continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                const double sr = total - sl;
                const double gain = sl * sl / nl + sr * sr / nr - base;
                if (gain > best.gain) best = {static_cast<int>(f), split_threshold(xi, xn), gain};
            }
        }
        return best;
    }

    MatrixView X_;
    std::span<const double> t_;
    GrowOptions opt_;
    const LeafValueFn& leaf_;
};

}  // namespace

Tree grow_classification_tree(MatrixView X, std::span<const int> y, std::size_t n_classes,
                              std::span<const std::size_t> rows, const GrowOptions& options, Rng* rng) {
    if (rows.empty()) throw DataError("tree: no training rows");
    ClassificationGrower g(X, y, n_classes, options, rng, rows.size());
    g.grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
    return std::move(g.tree);
}

Tree grow_regression_tree(MatrixView X, std::span<const double> target, std::span<const std::size_t> rows,
                          const GrowOptions& options, const LeafValueFn& leaf_value) {
    if (rows.empty()) throw DataError("tree: no training rows");
    RegressionGrower g(X, target, options, leaf_value);
    g.grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
    return std::move(g.tree);
}

}  // namespace gnss::ml
