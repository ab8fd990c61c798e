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
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "gnss/core/error.hpp"
#include "gnss/tabular/dataset.hpp"

using namespace gnss;
using namespace gnss::tabular;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string header(const std::vector<std::string>& skip = {}) {
    std::string h;
    for (auto f : kSpoofFeatures)
        if (std::find(skip.begin(), skip.end(), std::string(f)) == skip.end()) h += std::string(f) + ",";
    return h + "class";
}

std::string row(double base, const std::string& label) {
    std::string r;
    for (std::size_t j = 0; j < kSpoofFeatureCount; ++j) r += std::to_string(base + j) + ",";
    return r + label;
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

TabularDataset labelled(const std::vector<std::size_t>& counts) {
    TabularDataset ds;
    ds.feature_names = {"a"};
    for (std::size_t c = 0; c < counts.size(); ++c) ds.class_names.push_back("c" + std::to_string(c));
    double v = 0;
    for (std::size_t c = 0; c < counts.size(); ++c)
        for (std::size_t i = 0; i < counts[c]; ++i) ds.push_row(std::vector<double>{v++}, static_cast<int>(c));
    return ds;
}

// Nearest class mean in standardized units, fitted on even rows and scored on odd rows.
double nearest_mean_accuracy(const TabularDataset& raw) {
    const auto ds = fit_standardizer(raw).apply(raw);
    const std::size_t d = ds.cols(), k = ds.n_classes();
    std::vector<double> mean(k * d, 0.0);
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < ds.rows(); i += 2) {
        count[ds.y[i]] += 1;
        for (std::size_t j = 0; j < d; ++j) mean[ds.y[i] * d + j] += ds.at(i, j);
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j) mean[c * d + j] /= count[c];
    std::size_t hit = 0, total = 0;
    for (std::size_t i = 1; i < ds.rows(); i += 2) {
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0;
            for (std::size_t j = 0; j < d; ++j) s += std::pow(ds.at(i, j) - mean[c * d + j], 2);
            if (s < best_d) {
                best_d = s;
                best = c;
            }
        }
        hit += static_cast<int>(best) == ds.y[i];
        ++total;
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("schema") {
    CHECK(kSpoofFeatures.size() == 13);
    CHECK(kSpoofFeatures.front() == "PRN");
    CHECK(kSpoofFeatures.back() == "CN0");
    const auto ds = make_spoof_dataset();
    CHECK(ds.cols() == 13);
    CHECK(ds.n_classes() == 4);
    CHECK(static_cast<int>(SpoofClass::Sophisticated) == 3);
    CHECK(ds.schema_fingerprint() == make_spoof_dataset().schema_fingerprint());
    auto other = ds;
    std::swap(other.feature_names[0], other.feature_names[1]);
    CHECK(other.schema_fingerprint() != ds.schema_fingerprint());
}

TEST_CASE("label parsing") {
    const auto names = spoof_class_names();
    CHECK(parse_label("Authentic", names) == 0);
    CHECK(parse_label("sophisticated", names) == 3);
    CHECK(parse_label("2", names) == 2);
    CHECK_THROWS_AS(parse_label("7", names), DataError);
    CHECK_THROWS_AS(parse_label("Replay", names), DataError);
}

TEST_CASE("load two rows with extra column and mixed labels") {
    TempDir tmp("gnss_test_csv_a");
    write_file(tmp.path / "a.csv", "extra," + header() + "\n9," + row(1, "Simplistic") + "\n9," + row(2, "0") + "\n");
    const auto ds = load_csv(tmp.path / "a.csv");
    CHECK(ds.rows() == 2);
    CHECK(ds.y == std::vector<int>{1, 0});
    CHECK(ds.at(0, 0) == 1.0);
    CHECK(ds.at(1, 12) == 14.0);
}

TEST_CASE("missing column is named") {
    TempDir tmp("gnss_test_csv_b");
    write_file(tmp.path / "b.csv", header({"CN0"}) + "\n");
    try {
        load_csv(tmp.path / "b.csv");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("CN0") != std::string::npos);
    }
}

TEST_CASE("empty file, unknown label, non-finite rows") {
    TempDir tmp("gnss_test_csv_c");
    write_file(tmp.path / "empty.csv", "");
    CHECK_THROWS_AS(load_csv(tmp.path / "empty.csv"), DataError);
    write_file(tmp.path / "label.csv", header() + "\n" + row(1, "Meaconing") + "\n");
    CHECK_THROWS_AS(load_csv(tmp.path / "label.csv"), DataError);

    std::string bad = row(1, "Authentic");
    bad.replace(0, bad.find(','), "nan");
    write_file(tmp.path / "nan.csv", header() + "\n" + row(1, "Authentic") + "\n" + bad + "\n" + row(3, "Authentic") + "\n");
    LoadStats stats;
    const auto ds = load_csv(tmp.path / "nan.csv", &stats);
    CHECK(ds.rows() == 2);
    CHECK(stats.rejected_rows == std::vector<std::size_t>{1});
}

TEST_CASE("write then load round trip") {
    TempDir tmp("gnss_test_csv_d");
    const auto ds = synth_spoof_dataset(25, 0.3, 4);
    write_csv(tmp.path / "rt.csv", ds);
    const auto back = load_csv(tmp.path / "rt.csv");
    REQUIRE(back.rows() == ds.rows());
    CHECK(back.y == ds.y);
    for (std::size_t i = 0; i < ds.X.size(); ++i) CHECK(std::abs(back.X[i] - ds.X[i]) <= 1e-9 * (1 + std::abs(ds.X[i])));
}

TEST_CASE("stratified split counts") {
    auto ds = labelled({100, 100, 100, 100});
    auto s = stratified_split(ds, 0.7, 1);
    CHECK(s.train.class_counts() == std::vector<std::size_t>{70, 70, 70, 70});
    CHECK(s.test.class_counts() == std::vector<std::size_t>{30, 30, 30, 30});

    ds = labelled({10, 3});
    s = stratified_split(ds, 0.7, 1);
    CHECK(s.train.class_counts() == std::vector<std::size_t>{7, 2});
    CHECK(s.test.class_counts() == std::vector<std::size_t>{3, 1});

    CHECK_THROWS_AS(stratified_split(labelled({10, 1}), 0.7, 1), DataError);
    CHECK_THROWS_AS(stratified_split(ds, 1.0, 1), UsageError);
    CHECK_THROWS_AS(stratified_split(ds, 0.0, 1), UsageError);
}

TEST_CASE("split is a deterministic partition") {
    const auto ds = labelled({37, 12, 5, 90});
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 12345ULL}) {
        const auto a = stratified_split_indices(ds.y, 4, 0.7, seed);
        const auto b = stratified_split_indices(ds.y, 4, 0.7, seed);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        std::vector<std::size_t> all = a.train;
        all.insert(all.end(), a.test.begin(), a.test.end());
        std::sort(all.begin(), all.end());
        REQUIRE(all.size() == ds.rows());
        for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    }
    CHECK(stratified_split_indices(ds.y, 4, 0.7, 1).train != stratified_split_indices(ds.y, 4, 0.7, 2).train);
}

TEST_CASE("standardizer examples") {
    TabularDataset ds;
    ds.feature_names = {"a", "b"};
    ds.class_names = {"x"};
    ds.push_row(std::vector<double>{1, 5}, 0);
    ds.push_row(std::vector<double>{2, 5}, 0);
    ds.push_row(std::vector<double>{3, 5}, 0);
    const auto st = fit_standardizer(ds);
    CHECK(st.std[1] == 1.0);
    const auto z = st.apply(ds);
    CHECK(z.at(0, 0) == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-12));
    CHECK(z.at(1, 0) == doctest::Approx(0.0));
    CHECK(z.at(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) CHECK(z.at(i, 1) == 0.0);
    CHECK_THROWS_AS(fit_standardizer(ds.like()), DataError);
}

TEST_CASE("standardized train columns have zero mean, unit variance, and invert") {
    const auto ds = synth_spoof_dataset(100, 0.4, 8);
    const auto st = fit_standardizer(ds);
    const auto z = st.apply(ds);
    for (std::size_t j = 0; j < z.cols(); ++j) {
        double m = 0, v = 0;
        for (std::size_t i = 0; i < z.rows(); ++i) m += z.at(i, j);
        m /= z.rows();
        for (std::size_t i = 0; i < z.rows(); ++i) v += std::pow(z.at(i, j) - m, 2);
        v /= z.rows();
        CHECK(std::abs(m) < 1e-9);
        CHECK(std::abs(v - 1.0) < 1e-9);
    }
    const auto back = st.inverse(z);
    for (std::size_t i = 0; i < ds.X.size(); ++i) CHECK(std::abs(back.X[i] - ds.X[i]) < 1e-9 * (1 + std::abs(ds.X[i])));
}

TEST_CASE("synthetic spoofing data: counts and separability") {
    const auto easy = synth_spoof_dataset(500, 0.0, 3);
    CHECK(easy.class_counts() == std::vector<std::size_t>{500, 500, 500, 500});
    CHECK_NOTHROW(easy.check());
    CHECK(nearest_mean_accuracy(easy) >= 0.99);
    const auto hard = synth_spoof_dataset(500, 1.0, 3);
    CHECK(nearest_mean_accuracy(hard) <= 0.45);
    CHECK(synth_spoof_dataset(20, 0.5, 9).X == synth_spoof_dataset(20, 0.5, 9).X);
    CHECK_THROWS_AS(synth_spoof_dataset(0, 0.5, 1), UsageError);
    CHECK_THROWS_AS(synth_spoof_dataset(10, 1.5, 1), UsageError);
}

TEST_CASE("imbalance ratios") {
    const auto ds = synth_spoof_dataset(200, 0.5, 1);
    const std::vector<double> r{10, 5, 2, 1};
    const auto im = apply_imbalance(ds, r, 2);
    CHECK(im.class_counts() == std::vector<std::size_t>{200, 100, 40, 20});
}

TEST_CASE("subset, push_row, check") {
    auto ds = labelled({2, 2});
    const std::vector<std::size_t> idx{3, 3, 0};
    const auto s = ds.subset(idx);
    CHECK(s.y == std::vector<int>{1, 1, 0});
    CHECK(s.at(0, 0) == 3.0);
    CHECK_THROWS_AS(ds.push_row(std::vector<double>{1, 2}, 0), DataError);
    ds.y[0] = 5;
    CHECK_THROWS_AS(ds.check(), DataError);
}
