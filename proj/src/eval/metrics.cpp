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

#include "gnss/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gnss/core/error.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::eval {

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::row_sum(std::size_t i) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < k; ++j) s += at(i, j);
    return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t j) const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < k; ++i) s += at(i, j);
    return s;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < k; ++i) s += at(i, i);
    return s;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k) {
    if (y_true.size() != y_pred.size())
        throw DataError("confusion: " + std::to_string(y_true.size()) + " labels vs " + std::to_string(y_pred.size()) +
                        " predictions");
    ConfusionMatrix cm{k, std::vector<std::size_t>(k * k, 0)};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k)
            throw DataError("confusion: label outside 0.." + std::to_string(k - 1) + " at row " + std::to_string(i));
        ++cm.counts[static_cast<std::size_t>(t) * k + static_cast<std::size_t>(p)];
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw DataError("metrics: empty confusion matrix");
    MetricsReport r;
    r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    auto ratio = [&r](std::size_t a, std::size_t b, const std::string& what) {
        if (b == 0) {
            r.warnings.push_back(what + " is 0/0, reported as 0");
            return 0.0;
        }
        return static_cast<double>(a) / static_cast<double>(b);
    };
    for (std::size_t c = 0; c < cm.k; ++c) {
        const std::size_t tp = cm.at(c, c);
        const double p = ratio(tp, cm.col_sum(c), "precision of class " + std::to_string(c));
        const double rec = ratio(tp, cm.row_sum(c), "recall of class " + std::to_string(c));
        double f = 0.0;
        if (p + rec > 0.0)
            f = 2.0 * p * rec / (p + rec);
        else
            r.warnings.push_back("F1 of class " + std::to_string(c) + " is 0/0, reported as 0");
        r.precision.push_back(p);
        r.recall.push_back(rec);
        r.f1.push_back(f);
    }
    const double k = static_cast<double>(cm.k);
    r.macro_precision = std::accumulate(r.precision.begin(), r.precision.end(), 0.0) / k;
    r.macro_recall = std::accumulate(r.recall.begin(), r.recall.end(), 0.0) / k;
    r.macro_f1 = std::accumulate(r.f1.begin(), r.f1.end(), 0.0) / k;
    return r;
}

double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) throw DataError("accuracy: need equal non-empty vectors");
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) ok += y_true[i] == y_pred[i];
    return static_cast<double>(ok) / static_cast<double>(y_true.size());
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> positive) {
    if (scores.size() != positive.size()) throw DataError("roc_curve: score and label lengths differ");
    RocCurve c;
    std::size_t P = 0;
    for (int v : positive) P += v != 0;
    const std::size_t N = scores.size() - P;
    if (P == 0 || N == 0) return c;
    c.present = true;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    c.fpr.push_back(0.0);
    c.tpr.push_back(0.0);
    std::size_t tp = 0, fp = 0;
    double area = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        const std::size_t tp0 = tp, fp0 = fp;
        for (; i < order.size() && scores[order[i]] == s; ++i) (positive[order[i]] ? tp : fp) += 1;
        // Trapezoid in count units; normalized once at the end.
        area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0) / 2.0;
        c.fpr.push_back(static_cast<double>(fp) / static_cast<double>(N));
        c.tpr.push_back(static_cast<double>(tp) / static_cast<double>(P));
    }
    c.auc = area / (static_cast<double>(P) * static_cast<double>(N));
    return c;
}

RocResult roc_auc_ovr(std::span<const int> y_true, const ml::ProbaMatrix& proba) {
    if (y_true.size() != proba.rows) throw DataError("roc_auc_ovr: label count differs from probability rows");
    for (std::size_t i = 0; i < proba.rows; ++i) {
        const auto row = proba.row(i);
        double s = 0.0;
        for (double v : row) {
            if (!std::isfinite(v) || v < 0.0) throw DataError("roc_auc_ovr: invalid probability at row " + std::to_string(i));
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-6) throw DataError("roc_auc_ovr: row " + std::to_string(i) + " does not sum to 1");
    }
    RocResult r;
    std::vector<int> pos(y_true.size());
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < proba.classes; ++c) {
        for (std::size_t i = 0; i < y_true.size(); ++i) pos[i] = y_true[i] == static_cast<int>(c);
        const auto col = proba.column(c);
        r.curves.push_back(roc_curve(col, pos));
        if (r.curves.back().present) {
            sum += r.curves.back().auc;
            ++present;
        } else {
            r.warnings.push_back("class " + std::to_string(c) + " absent (or the only class); AUC undefined");
        }
    }
    r.macro_auc = present ? sum / static_cast<double>(present) : 0.0;
    return r;
}

std::vector<TrainTest> stratified_shuffle_splits(std::span<const int> y, std::size_t n_splits, double test_fraction,
                                                 std::uint64_t seed) {
    if (n_splits == 0) throw UsageError("stratified_shuffle_splits: n_splits must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw UsageError("stratified_shuffle_splits: test_fraction must be in (0,1)");
    int max_label = -1;
    for (int v : y) {
        if (v < 0) throw DataError("stratified_shuffle_splits: negative label");
        max_label = std::max(max_label, v);
    }
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_label + 1));
    for (std::size_t i = 0; i < y.size(); ++i) members[static_cast<std::size_t>(y[i])].push_back(i);
    for (std::size_t c = 0; c < members.size(); ++c)
        if (members[c].size() == 1)
            throw DataError("stratified_shuffle_splits: class " + std::to_string(c) + " has a single sample");

    std::vector<TrainTest> out(n_splits);
    for (std::size_t s = 0; s < n_splits; ++s) {
        auto& tt = out[s];
        for (std::size_t c = 0; c < members.size(); ++c) {
            if (members[c].empty()) continue;
            auto idx = members[c];
            Rng rng(derive_seed(derive_seed(seed, "shuffle_split", s), c));
            rng.shuffle(std::span<std::size_t>(idx));
            const auto n = idx.size();
            const auto t = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n))), 1, n - 1);
            tt.test.insert(tt.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(t));
            tt.train.insert(tt.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(t), idx.end());
        }
        std::sort(tt.train.begin(), tt.train.end());
        std::sort(tt.test.begin(), tt.test.end());
    }
    return out;
}

GridSearchResult grid_search(ml::ClassifierKind kind, const std::vector<ml::HyperParams>& grid,
                             const tabular::TabularDataset& ds, std::size_t n_splits, double test_fraction,
                             std::uint64_t seed) {
    if (grid.empty()) throw UsageError("grid_search: empty grid");
    for (const auto& h : grid)
        if (ml::kind_of(h) != kind)
            throw UsageError("grid_search: candidate " + ml::describe(h) + " is not of kind " +
                             std::string(ml::to_string(kind)));
    const auto splits = stratified_shuffle_splits(ds.y, n_splits, test_fraction, derive_seed(seed, "cv_splits"));
    std::vector<tabular::TabularDataset> train(n_splits), test(n_splits);
    for (std::size_t s = 0; s < n_splits; ++s) {
        train[s] = ds.subset(splits[s].train);
        test[s] = ds.subset(splits[s].test);
    }

    const std::size_t cells = grid.size() * n_splits;
    std::vector<double> acc(cells, 0.0);
    std::vector<std::string> err(cells);
    parallel_for(cells, [&](std::size_t cell) {
        const std::size_t g = cell / n_splits, s = cell % n_splits;
        try {
            const auto model = ml::fit(grid[g], train[s], derive_seed(seed, "cv_fit", s));
            acc[cell] = accuracy(test[s].y, model.predict(test[s]));
        } catch (const std::exception& e) {
            err[cell] = e.what();
        }
    });

    GridSearchResult r;
    bool have = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CandidateResult c;
        c.hyper = grid[g];
        for (std::size_t s = 0; s < n_splits; ++s) {
            const std::size_t cell = g * n_splits + s;
            if (!err[cell].empty() && !c.failed) {
                c.failed = true;
                c.error = err[cell];
            }
            c.split_accuracy.push_back(acc[cell]);
        }
        if (!c.failed) {
            const double m = std::accumulate(c.split_accuracy.begin(), c.split_accuracy.end(), 0.0) /
                             static_cast<double>(n_splits);
            double v = 0.0;
            for (double a : c.split_accuracy) v += (a - m) * (a - m);
            c.mean_accuracy = m;
            c.std_accuracy = std::sqrt(v / static_cast<double>(n_splits));
            r.log.push_back("candidate " + std::to_string(g) + " " + ml::describe(c.hyper) +
                            ": mean=" + std::to_string(m) + " std=" + std::to_string(c.std_accuracy));
            if (!have || m > r.candidates[r.selected].mean_accuracy) {
                r.selected = g;
                have = true;
            }
        } else {
            r.log.push_back("candidate " + std::to_string(g) + " " + ml::describe(c.hyper) + ": FAILED: " + c.error);
        }
        r.candidates.push_back(std::move(c));
    }
    if (!have) throw DataError("grid_search: every candidate failed; first error: " + r.candidates.front().error);
    r.best = r.candidates[r.selected].hyper;
    r.log.push_back("selected candidate " + std::to_string(r.selected) + " " + ml::describe(r.best));
    return r;
}

}  // namespace gnss::eval
