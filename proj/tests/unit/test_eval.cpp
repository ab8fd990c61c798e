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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "gnss/core/error.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/core/rng.hpp"
#include "gnss/eval/metrics.hpp"
#include "gnss/eval/report.hpp"

using namespace gnss;
using namespace gnss::eval;

namespace {

std::vector<int> random_labels(std::size_t n, int k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(k));
    return y;
}

double concordance_auc(const std::vector<double>& s, const std::vector<int>& pos) {
    double num = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (pos[i] && !pos[j]) {
                pairs += 1;
                num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return num / pairs;
}

ml::ProbaMatrix random_proba(std::size_t n, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    ml::ProbaMatrix p{n, k, std::vector<double>(n * k)};
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (auto& v : p.row(i)) s += (v = rng.uniform() + 1e-3);
        for (auto& v : p.row(i)) v /= s;
    }
    return p;
}

tabular::TabularDataset three_regions(std::uint64_t seed) {
    tabular::TabularDataset ds;
    ds.feature_names = {"x"};
    ds.class_names = {"a", "b"};
    Rng rng(seed);
    for (int i = 0; i < 90; ++i) {
        const double x = 3.0 * (i + rng.uniform()) / 90.0;
        ds.push_row(std::vector<double>{x}, (x >= 1.0 && x < 2.0) ? 1 : 0);
    }
    return ds;
}

}  // namespace

TEST_CASE("confusion examples") {
    const std::vector<int> t{0, 0, 1}, p{0, 1, 1};
    const auto cm = confusion(t, p, 2);
    CHECK(cm.counts == std::vector<std::size_t>{1, 1, 0, 1});
    CHECK(cm.total() == 3);
    CHECK(cm.row_sum(0) == 2);
    CHECK(cm.col_sum(1) == 2);
    const auto diag = confusion(t, t, 2);
    CHECK(diag.counts == std::vector<std::size_t>{2, 0, 0, 1});
    CHECK(metrics(diag).accuracy == 1.0);
    CHECK_THROWS_AS(confusion(std::vector<int>{0, 2}, std::vector<int>{0, 1}, 2), DataError);
    CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{0, 1}, 2), DataError);
}

TEST_CASE("confusion equals a naive counter") {
    const auto t = random_labels(500, 5, 1), p = random_labels(500, 5, 2);
    const auto cm = confusion(t, p, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            std::size_t n = 0;
            for (std::size_t r = 0; r < t.size(); ++r) n += t[r] == static_cast<int>(i) && p[r] == static_cast<int>(j);
            CHECK(cm.at(i, j) == n);
        }
    CHECK(std::abs(metrics(cm).accuracy - accuracy(t, p)) < 1e-12);
    std::size_t hit = 0;
    for (std::size_t r = 0; r < t.size(); ++r) hit += t[r] == p[r];
    CHECK(std::abs(accuracy(t, p) - hit / 500.0) < 1e-12);
}

TEST_CASE("metrics hand example and perfect diagonal") {
    ConfusionMatrix cm{2, {1, 1, 0, 1}};
    const auto m = metrics(cm);
    CHECK(m.precision[0] == doctest::Approx(1.0));
    CHECK(m.precision[1] == doctest::Approx(0.5));
    CHECK(m.recall[0] == doctest::Approx(0.5));
    CHECK(m.recall[1] == doctest::Approx(1.0));
    CHECK(m.f1[0] == doctest::Approx(2.0 / 3));
    CHECK(m.f1[1] == doctest::Approx(2.0 / 3));
    CHECK(m.macro_f1 == doctest::Approx(2.0 / 3));
    CHECK(m.accuracy == doctest::Approx(2.0 / 3));

    const auto p = metrics(ConfusionMatrix{3, {4, 0, 0, 0, 2, 0, 0, 0, 7}});
    for (double v : p.precision) CHECK(v == 1.0);
    for (double v : p.recall) CHECK(v == 1.0);
    for (double v : p.f1) CHECK(v == 1.0);
    CHECK(p.warnings.empty());
}

TEST_CASE("zero denominators become zero with a warning") {
    const auto m = metrics(ConfusionMatrix{2, {3, 0, 2, 0}});
    CHECK(m.precision[1] == 0.0);
    CHECK(m.recall[1] == 0.0);
    CHECK(m.f1[1] == 0.0);
    CHECK(!m.warnings.empty());
    CHECK_THROWS_AS(metrics(ConfusionMatrix{2, {0, 0, 0, 0}}), DataError);
}

TEST_CASE("metrics are equivariant under class relabeling") {
    const auto t = random_labels(300, 4, 3), p = random_labels(300, 4, 4);
    const std::vector<int> perm{2, 0, 3, 1};
    std::vector<int> tp(t.size()), pp(p.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        tp[i] = perm[t[i]];
        pp[i] = perm[p[i]];
    }
    const auto a = metrics(confusion(t, p, 4));
    const auto b = metrics(confusion(tp, pp, 4));
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.macro_f1 == doctest::Approx(b.macro_f1).epsilon(1e-12));
    CHECK(a.macro_precision == doctest::Approx(b.macro_precision).epsilon(1e-12));
    for (int c = 0; c < 4; ++c) {
        CHECK(a.precision[c] == b.precision[perm[c]]);
        CHECK(a.recall[c] == b.recall[perm[c]]);
        CHECK(a.f1[c] == b.f1[perm[c]]);
    }
}

TEST_CASE("ROC examples") {
    const std::vector<int> pos{0, 0, 1, 1};
    auto sep = roc_curve(std::vector<double>{0.1, 0.2, 0.8, 0.9}, pos);
    CHECK(sep.present);
    CHECK(sep.auc == 1.0);
    auto flat = roc_curve(std::vector<double>{0.5, 0.5, 0.5, 0.5}, pos);
    CHECK(flat.auc == 0.5);
    CHECK(flat.fpr == std::vector<double>{0.0, 1.0});
    CHECK(!roc_curve(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}).present);
}

TEST_CASE("trapezoid AUC equals concordance and curves are well formed") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        std::vector<double> s(50);
        std::vector<int> pos(50);
        for (std::size_t i = 0; i < 50; ++i) {
            pos[i] = static_cast<int>(i % 3 == 0);
            // Coarse scores force ties.
            s[i] = std::round(10.0 * (rng.uniform() + 0.3 * pos[i])) / 10.0;
        }
        const auto c = roc_curve(s, pos);
        CHECK(std::abs(c.auc - concordance_auc(s, pos)) < 1e-9);
        CHECK(c.fpr.front() == 0.0);
        CHECK(c.tpr.front() == 0.0);
        CHECK(c.fpr.back() == 1.0);
        CHECK(c.tpr.back() == 1.0);
        for (std::size_t i = 1; i < c.fpr.size(); ++i) {
            CHECK(c.fpr[i] >= c.fpr[i - 1]);
            CHECK(c.tpr[i] >= c.tpr[i - 1]);
        }
        // Strictly monotone transform leaves the area unchanged.
        std::vector<double> t(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
        CHECK(roc_curve(t, pos).auc == doctest::Approx(c.auc).epsilon(1e-12));
    }
}

TEST_CASE("one-vs-rest AUC with an absent class") {
    const auto p = random_proba(40, 3, 5);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 2);
    const auto r = roc_auc_ovr(y, p);
    REQUIRE(r.curves.size() == 3);
    CHECK(r.curves[0].present);
    CHECK(r.curves[1].present);
    CHECK(!r.curves[2].present);
    CHECK(!r.warnings.empty());
    CHECK(r.macro_auc == doctest::Approx((r.curves[0].auc + r.curves[1].auc) / 2));
    auto bad = p;
    bad.values[0] += 0.5;
    CHECK_THROWS_AS(roc_auc_ovr(y, bad), DataError);
}

TEST_CASE("stratified shuffle splits") {
    std::vector<int> y(100);
    for (std::size_t i = 0; i < 100; ++i) y[i] = i < 30 ? 0 : 1;
    const auto splits = stratified_shuffle_splits(y, 3, 0.3, 42);
    REQUIRE(splits.size() == 3);
    std::set<std::vector<std::size_t>> distinct;
    for (const auto& s : splits) {
        std::size_t t0 = 0, t1 = 0;
        for (auto i : s.test) (y[i] == 0 ? t0 : t1)++;
        CHECK(t0 == 9);
        CHECK(t1 == 21);
        std::vector<std::size_t> all = s.train;
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expect(100);
        std::iota(expect.begin(), expect.end(), 0);
        CHECK(all == expect);
        CHECK(std::is_sorted(s.test.begin(), s.test.end()));
        distinct.insert(s.test);
    }
    CHECK(distinct.size() == 3);
    CHECK(stratified_shuffle_splits(y, 3, 0.3, 42)[1].test == splits[1].test);
    CHECK_THROWS_AS(stratified_shuffle_splits(std::vector<int>{0, 0, 1}, 2, 0.3, 1), DataError);
    CHECK_THROWS_AS(stratified_shuffle_splits(y, 2, 1.0, 1), UsageError);
}

TEST_CASE("grid search selection") {
    const auto ds = three_regions(3);
    const std::vector<ml::HyperParams> grid{ml::TreeParams{1}, ml::TreeParams{3}};
    const auto r = grid_search(ml::ClassifierKind::DecisionTree, grid, ds, 4, 0.25, 7);
    REQUIRE(r.candidates.size() == 2);
    CHECK(r.candidates[0].mean_accuracy <= 2.0 / 3 + 0.1);
    CHECK(r.selected == 1);
    CHECK(std::get<ml::TreeParams>(r.best).max_depth == 3);
    CHECK(r.candidates[1].split_accuracy.size() == 4);
    CHECK(!r.log.empty());

    const auto single = grid_search(ml::ClassifierKind::DecisionTree, {ml::TreeParams{2}}, ds, 3, 0.25, 7);
    CHECK(single.selected == 0);
}

TEST_CASE("grid order affects only ties") {
    const auto ds = three_regions(5);
    std::vector<ml::HyperParams> grid{ml::TreeParams{1}, ml::TreeParams{2}, ml::TreeParams{3}, ml::TreeParams{4},
                                      ml::TreeParams{8}};
    const auto a = grid_search(ml::ClassifierKind::DecisionTree, grid, ds, 3, 0.3, 11);
    std::reverse(grid.begin(), grid.end());
    const auto b = grid_search(ml::ClassifierKind::DecisionTree, grid, ds, 3, 0.3, 11);
    CHECK(a.candidates[a.selected].mean_accuracy == b.candidates[b.selected].mean_accuracy);
    for (const auto& c : a.candidates) CHECK(c.mean_accuracy <= a.candidates[a.selected].mean_accuracy);
    // Ties resolve to the earliest entry of each ordering.
    for (std::size_t i = 0; i < a.selected; ++i) CHECK(a.candidates[i].mean_accuracy < a.candidates[a.selected].mean_accuracy);
    for (std::size_t i = 0; i < b.selected; ++i) CHECK(b.candidates[i].mean_accuracy < b.candidates[b.selected].mean_accuracy);
}

TEST_CASE("failed candidates are excluded") {
    const auto ds = three_regions(6);
    const std::vector<ml::HyperParams> grid{ml::KnnParams{0}, ml::KnnParams{3}};
    const auto r = grid_search(ml::ClassifierKind::Knn, grid, ds, 2, 0.25, 1);
    CHECK(r.candidates[0].failed);
    CHECK(!r.candidates[0].error.empty());
    CHECK(r.selected == 1);
    CHECK_THROWS_AS(grid_search(ml::ClassifierKind::Knn, {ml::KnnParams{0}}, ds, 2, 0.25, 1), DataError);
}

TEST_CASE("grid search is independent of the thread count") {
    const auto ds = three_regions(8);
    const std::vector<ml::HyperParams> grid{ml::ForestParams{5}, ml::ForestParams{9}};
    set_thread_count(1);
    const auto a = grid_search(ml::ClassifierKind::RandomForest, grid, ds, 3, 0.25, 3);
    set_thread_count(3);
    const auto b = grid_search(ml::ClassifierKind::RandomForest, grid, ds, 3, 0.25, 3);
    set_thread_count(1);
    for (std::size_t i = 0; i < 2; ++i) CHECK(a.candidates[i].split_accuracy == b.candidates[i].split_accuracy);
}

TEST_CASE("report CSVs parse back to the same values") {
    const auto dir = std::filesystem::temp_directory_path() / "gnss_test_report";
    std::filesystem::remove_all(dir);
    const auto y = random_labels(60, 3, 9);
    const auto p = random_proba(60, 3, 10);
    const std::vector<std::string> names{"alpha", "beta", "gamma"};
    const auto summary = write_eval_report(dir, y, p, names, "test");
    CHECK(summary.contains("accuracy"));

    std::vector<int> pred(60);
    for (std::size_t i = 0; i < 60; ++i) pred[i] = ml::argmax(p.row(i));
    const auto cm = confusion(y, pred, 3);
    std::vector<std::string> back_names;
    const auto cm_back = read_confusion_csv(dir / "confusion.csv", &back_names);
    CHECK(cm_back.counts == cm.counts);
    CHECK(back_names == names);

    const auto m = metrics(cm);
    const auto m_back = read_metrics_csv(dir / "metrics.csv");
    CHECK(m_back.precision == m.precision);
    CHECK(m_back.recall == m.recall);
    CHECK(m_back.f1 == m.f1);
    CHECK(m_back.accuracy == m.accuracy);

    const auto roc = roc_auc_ovr(y, p);
    const auto c_back = read_roc_csv(dir / "roc_beta.csv");
    CHECK(c_back.fpr == roc.curves[1].fpr);
    CHECK(c_back.tpr == roc.curves[1].tpr);
    for (const char* f : {"roc.svg", "confusion.svg", "auc.csv"}) CHECK(std::filesystem::exists(dir / f));
    std::filesystem::remove_all(dir);
}

TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
    CHECK(format_double(2.0) == "2");
}
