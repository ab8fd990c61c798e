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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gnss::tabular {

enum class SpoofClass : int { Authentic = 0, Simplistic = 1, Intermediate = 2, Sophisticated = 3 };

inline constexpr std::size_t kSpoofFeatureCount = 13;
inline constexpr std::array<std::string_view, kSpoofFeatureCount> kSpoofFeatures{
    "PRN", "DO", "PD", "RX", "TOW", "CP", "EC", "LC", "PC", "PIP", "PQP", "TCD", "CN0"};
inline constexpr std::array<std::string_view, 4> kSpoofClassNames{"Authentic", "Simplistic", "Intermediate",
                                                                  "Sophisticated"};
inline constexpr std::string_view kLabelColumn = "class";

std::vector<std::string> spoof_feature_names();
std::vector<std::string> spoof_class_names();

/// Row-major n x d real matrix with integer class codes in [0, n_classes).
struct TabularDataset {
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    std::vector<double> X;
    std::vector<int> y;

    std::size_t rows() const noexcept { return y.size(); }
    std::size_t cols() const noexcept { return feature_names.size(); }
    std::size_t n_classes() const noexcept { return class_names.size(); }

    std::span<const double> row(std::size_t i) const { return {X.data() + i * cols(), cols()}; }
    std::span<double> row(std::size_t i) { return {X.data() + i * cols(), cols()}; }
    double at(std::size_t i, std::size_t j) const { return X[i * cols() + j]; }

    std::vector<std::size_t> class_counts() const;
    /// Rows in the given order (indices may repeat).
    TabularDataset subset(std::span<const std::size_t> indices) const;
    /// Empty dataset with the same schema.
    TabularDataset like() const;
    void push_row(std::span<const double> values, int label);
    /// Throws DataError when shapes disagree, labels are out of range or a
    /// value is non-finite.
    void check() const;
    /// Stable identifier of the schema (feature names in order).
    std::string schema_fingerprint() const;
};

TabularDataset make_spoof_dataset();

/// Parses a label cell: a class name (case-insensitive) or an integer code.
int parse_label(std::string_view cell, std::span<const std::string> class_names);

struct LoadStats {
    std::vector<std::size_t> rejected_rows;  // 0-based data-row indices with empty or non-finite cells
};

/// Reads a comma-separated file with a header row. Columns are matched by
/// name; extra columns are ignored. Rows holding non-finite or empty values
/// are skipped and reported through `stats`.
TabularDataset load_csv(const std::filesystem::path& path, std::span<const std::string> feature_names,
                        std::span<const std::string> class_names, LoadStats* stats = nullptr);
TabularDataset load_csv(const std::filesystem::path& path, LoadStats* stats = nullptr);

/// Writes features with 17 significant digits and the label as a class name.
void write_csv(const std::filesystem::path& path, const TabularDataset& ds);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per-class train count round(f x count), clamped to [1, count - 1];
/// indices are shuffled within each class, then returned in ascending order.
SplitIndices stratified_split_indices(std::span<const int> y, std::size_t n_classes, double train_fraction,
                                      std::uint64_t seed);

struct Split {
    TabularDataset train;
    TabularDataset test;
};

Split stratified_split(const TabularDataset& ds, double train_fraction, std::uint64_t seed);

/// Column-wise standardization with population std; zero-variance columns
/// keep std = 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;

    TabularDataset apply(const TabularDataset& ds) const;
    TabularDataset inverse(const TabularDataset& ds) const;
    void apply_row(std::span<const double> in, std::span<double> out) const;
};

Standardizer fit_standardizer(const TabularDataset& ds);

/// Synthetic four-class stand-in for the spoofing schema. Authentic rows are
/// Gaussian around receiver-like values; Simplistic rows shift strongly on DO
/// and CN0, Intermediate moderately on CP and PD, Sophisticated weakly on a
/// joint direction across EC, LC, PC, PIP, PQP, TCD with a PIP/PQP
/// correlation. All shifts scale with (1 - difficulty).
TabularDataset synth_spoof_dataset(std::size_t n_per_class, double difficulty, std::uint64_t seed);

/// Keeps round(count_c x ratio_c / max(ratio)) rows of each class, drawn
/// without replacement.
TabularDataset apply_imbalance(const TabularDataset& ds, std::span<const double> ratios, std::uint64_t seed);

}  // namespace gnss::tabular
