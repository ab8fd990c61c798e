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
#include <span>
#include <string>
#include <vector>

#include "gnss/ml/classifier.hpp"

namespace gnss::eval {

/// K x K counts; entry (i, j) is true class i predicted as j.
struct ConfusionMatrix {
    std::size_t k = 0;
    std::vector<std::size_t> counts;

    std::size_t at(std::size_t i, std::size_t j) const { return counts[i * k + j]; }
    std::size_t total() const;
    std::size_t row_sum(std::size_t i) const;
    std::size_t col_sum(std::size_t j) const;
    std::size_t trace() const;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k);

struct MetricsReport {
    double accuracy = 0.0;
    std::vector<double> precision, recall, f1;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    /// One entry per 0/0 ratio that was defined as 0.
    std::vector<std::string> warnings;
};

/// Throws DataError for an empty matrix.
MetricsReport metrics(const ConfusionMatrix& cm);
double accuracy(std::span<const int> y_true, std::span<const int> y_pred);

struct RocCurve {
    bool present = false;  // false when the class has no positives or no negatives
    std::vector<double> fpr, tpr;
    double auc = 0.0;
};

struct RocResult {
    std::vector<RocCurve> curves;
    double macro_auc = 0.0;  // over present classes only
    std::vector<std::string> warnings;
};

/// Binary ROC: thresholds at each distinct score (tied scores enter together),
/// trapezoidal area. Leaves `present` false if either class is empty.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> positive);

/// One-vs-rest ROC per column of a row-stochastic probability matrix.
RocResult roc_auc_ovr(std::span<const int> y_true, const ml::ProbaMatrix& proba);

struct TrainTest {
    std::vector<std::size_t> train, test;  // sorted ascending
};

/// Per split and class, round(test_fraction * count) members (clamped to
/// [1, count - 1]) go to test. Classes with zero members are ignored; a class
/// with a single member is an error.
std::vector<TrainTest> stratified_shuffle_splits(std::span<const int> y, std::size_t n_splits, double test_fraction,
                                                 std::uint64_t seed);

struct CandidateResult {
    ml::HyperParams hyper;
    std::vector<double> split_accuracy;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    bool failed = false;
    std::string error;
};

struct GridSearchResult {
    std::vector<CandidateResult> candidates;
    std::size_t selected = 0;
    ml::HyperParams best;
    std::vector<std::string> log;
};

/// Every candidate is scored on the same split list; the highest mean
/// accuracy wins and ties go to the earliest candidate. A candidate whose fit
/// throws is logged and excluded. Throws DataError if all candidates fail.
GridSearchResult grid_search(ml::ClassifierKind kind, const std::vector<ml::HyperParams>& grid,
                             const tabular::TabularDataset& ds, std::size_t n_splits, double test_fraction,
                             std::uint64_t seed);

}  // namespace gnss::eval
