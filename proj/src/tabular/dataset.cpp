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

#include "gnss/tabular/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "gnss/core/error.hpp"
#include "gnss/core/hash.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::tabular {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    std::string tmp(s);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size();
}

std::size_t clamp_count(double want, std::size_t total) {
    const auto r = static_cast<long long>(std::llround(want));
    return static_cast<std::size_t>(std::clamp<long long>(r, 1, static_cast<long long>(total) - 1));
}

}  // namespace

std::vector<std::string> spoof_feature_names() { return {kSpoofFeatures.begin(), kSpoofFeatures.end()}; }
std::vector<std::string> spoof_class_names() { return {kSpoofClassNames.begin(), kSpoofClassNames.end()}; }

TabularDataset make_spoof_dataset() {
    TabularDataset ds;
    ds.feature_names = spoof_feature_names();
    ds.class_names = spoof_class_names();
    return ds;
}

std::vector<std::size_t> TabularDataset::class_counts() const {
    std::vector<std::size_t> counts(n_classes(), 0);
    for (int label : y) ++counts.at(static_cast<std::size_t>(label));
    return counts;
}

TabularDataset TabularDataset::like() const {
    TabularDataset out;
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> indices) const {
    TabularDataset out = like();
    out.X.reserve(indices.size() * cols());
    out.y.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto r = row(i);
        out.X.insert(out.X.end(), r.begin(), r.end());
        out.y.push_back(y[i]);
    }
    return out;
}

void TabularDataset::push_row(std::span<const double> values, int label) {
    if (values.size() != cols()) throw DataError("push_row: expected " + std::to_string(cols()) + " values");
    X.insert(X.end(), values.begin(), values.end());
    y.push_back(label);
}

void TabularDataset::check() const {
    if (X.size() != rows() * cols()) throw DataError("dataset: X has " + std::to_string(X.size()) + " values for " +
                                                     std::to_string(rows()) + " rows of " + std::to_string(cols()));
    for (std::size_t i = 0; i < rows(); ++i) {
        if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= n_classes())
            throw DataError("dataset: label out of range at row " + std::to_string(i));
        for (double v : row(i))
            if (!std::isfinite(v)) throw DataError("dataset: non-finite value at row " + std::to_string(i));
    }
}

std::string TabularDataset::schema_fingerprint() const {
    std::string joined;
    for (const auto& n : feature_names) joined += n + '\n';
    return sha256_hex(joined).substr(0, 16);
}

int parse_label(std::string_view cell, std::span<const std::string> class_names) {
    const auto value = trim(cell);
    const std::string low = lower(value);
    for (std::size_t c = 0; c < class_names.size(); ++c)
        if (lower(class_names[c]) == low) return static_cast<int>(c);
    int code = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), code);
    if (ec == std::errc{} && ptr == value.data() + value.size() && code >= 0 &&
        static_cast<std::size_t>(code) < class_names.size())
        return code;
    // Codes exported as floats ("2.0").
    double as_double = 0.0;
    if (parse_double(value, as_double) && as_double == std::floor(as_double) && as_double >= 0.0 &&
        as_double < static_cast<double>(class_names.size()))
        return static_cast<int>(as_double);
    throw DataError("unknown label value '" + std::string(value) + "'");
}

TabularDataset load_csv(const std::filesystem::path& path, std::span<const std::string> feature_names,
                        std::span<const std::string> class_names, LoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV file: " + path.string());
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) position.emplace(std::string(header[i]), i);
    std::vector<std::size_t> cols;
    for (const auto& name : feature_names) {
        auto it = position.find(name);
        if (it == position.end()) throw DataError("CSV " + path.string() + " is missing column '" + name + "'");
        cols.push_back(it->second);
    }
    std::size_t label_col = 0;
    {
        auto it = std::find_if(position.begin(), position.end(),
                               [](const auto& kv) { return lower(kv.first) == kLabelColumn; });
        if (it == position.end()) throw DataError("CSV " + path.string() + " is missing column 'class'");
        label_col = it->second;
    }

    TabularDataset ds;
    ds.feature_names.assign(feature_names.begin(), feature_names.end());
    ds.class_names.assign(class_names.begin(), class_names.end());
    std::vector<double> values(cols.size());
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        const std::size_t r = data_row++;
        if (fields.size() != header.size())
            throw DataError("CSV row " + std::to_string(r) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        bool ok = true;
        for (std::size_t j = 0; j < cols.size(); ++j)
            ok = ok && parse_double(fields[cols[j]], values[j]) && std::isfinite(values[j]);
        if (!ok || fields[label_col].empty()) {
            if (stats) stats->rejected_rows.push_back(r);
            continue;
        }
        int label = 0;
        try {
            label = parse_label(fields[label_col], class_names);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at CSV row " + std::to_string(r));
        }
        ds.push_row(values, label);
    }
    if (ds.rows() == 0) throw DataError("CSV has no valid data rows: " + path.string());
    return ds;
}

TabularDataset load_csv(const std::filesystem::path& path, LoadStats* stats) {
    const auto names = spoof_feature_names();
    const auto classes = spoof_class_names();
    return load_csv(path, names, classes, stats);
}

void write_csv(const std::filesystem::path& path, const TabularDataset& ds) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write CSV: " + path.string());
    for (const auto& name : ds.feature_names) out << name << ',';
    out << kLabelColumn << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (double v : ds.row(i)) out << v << ',';
        out << ds.class_names.at(static_cast<std::size_t>(ds.y[i])) << '\n';
    }
}

SplitIndices stratified_split_indices(std::span<const int> y, std::size_t n_classes, double train_fraction,
                                      std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("split: train_fraction must lie in (0, 1)");
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) by_class.at(static_cast<std::size_t>(y[i])).push_back(i);
    SplitIndices out;
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;
        if (idx.size() < 2)
            throw DataError("split: class " + std::to_string(c) + " has fewer than 2 samples");
        Rng rng(derive_seed(seed, "stratified_split", c));
        rng.shuffle(std::span<std::size_t>(idx));
        const std::size_t n_train = clamp_count(train_fraction * static_cast<double>(idx.size()), idx.size());
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Split stratified_split(const TabularDataset& ds, double train_fraction, std::uint64_t seed) {
    const auto idx = stratified_split_indices(ds.y, ds.n_classes(), train_fraction, seed);
    return {ds.subset(idx.train), ds.subset(idx.test)};
}

Standardizer fit_standardizer(const TabularDataset& ds) {
    if (ds.rows() == 0) throw DataError("standardizer: empty dataset");
    const std::size_t d = ds.cols();
    const double n = static_cast<double>(ds.rows());
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std.assign(d, 0.0);
    for (std::size_t i = 0; i < ds.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += ds.at(i, j);
    for (auto& m : s.mean) m /= n;
    for (std::size_t i = 0; i < ds.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = ds.at(i, j) - s.mean[j];
            s.std[j] += c * c;
        }
    for (auto& v : s.std) {
        v = std::sqrt(v / n);
        if (!(v > 0.0)) v = 1.0;
    }
    return s;
}

void Standardizer::apply_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / std[j];
}

TabularDataset Standardizer::apply(const TabularDataset& ds) const {
    if (ds.cols() != mean.size()) throw DataError("standardizer: dimension mismatch");
    TabularDataset out = ds;
    for (std::size_t i = 0; i < ds.rows(); ++i) apply_row(ds.row(i), out.row(i));
    return out;
}

TabularDataset Standardizer::inverse(const TabularDataset& ds) const {
    if (ds.cols() != mean.size()) throw DataError("standardizer: dimension mismatch");
    TabularDataset out = ds;
    for (std::size_t i = 0; i < ds.rows(); ++i)
        for (std::size_t j = 0; j < ds.cols(); ++j) out.row(i)[j] = ds.at(i, j) * std[j] + mean[j];
    return out;
}

namespace {

// Physical centre and spread per feature, in schema order.
struct FeatureScale {
    double centre;
    double spread;
};
constexpr std::array<FeatureScale, kSpoofFeatureCount> kScales{{
    {16.5, 0.0},     // PRN: uniform satellite id, drawn separately
    {0.0, 1500.0},   // DO [Hz]
    {2.2e7, 2.0e6},  // PD [m]
    {3.0e5, 1.0e4},  // RX [s]
    {3.0e5, 1.0e4},  // TOW [s]
    {1.0e8, 1.0e7},  // CP [cycles]
    {45.0, 15.0},    // EC [deg]
    {5.0e4, 2.0e4},  // LC
    {1.0e3, 100.0},  // PC
    {0.0, 30.0},     // PIP
    {0.0, 30.0},     // PQP
    {0.0, 1e-4},     // TCD [s]
    {42.0, 3.0},     // CN0 [dB-Hz]
}};

enum Feature : std::size_t { PRN, DO, PD, RX, TOW, CP, EC, LC, PC, PIP, PQP, TCD, CN0 };

}  // namespace

TabularDataset synth_spoof_dataset(std::size_t n_per_class, double difficulty, std::uint64_t seed) {
    if (n_per_class < 1) throw UsageError("synth_spoof_dataset: n_per_class must be >= 1");
    if (!(difficulty >= 0.0 && difficulty <= 1.0)) throw UsageError("synth_spoof_dataset: difficulty must lie in [0, 1]");
    const double s = 1.0 - difficulty;
    TabularDataset ds = make_spoof_dataset();
    ds.X.reserve(4 * n_per_class * kSpoofFeatureCount);
    std::array<double, kSpoofFeatureCount> z{};
    std::array<double, kSpoofFeatureCount> row{};
    for (int c = 0; c < 4; ++c) {
        Rng rng(derive_seed(seed, "synth_spoof", static_cast<std::uint64_t>(c)));
        for (std::size_t i = 0; i < n_per_class; ++i) {
            for (auto& v : z) v = rng.normal();
            switch (static_cast<SpoofClass>(c)) {
                case SpoofClass::Authentic: break;
                case SpoofClass::Simplistic:
                    z[DO] += 10.0 * s;
                    z[CN0] += 10.0 * s;
                    break;
                case SpoofClass::Intermediate:
                    z[CP] += 9.0 * s;
                    z[PD] += 6.0 * s;
                    break;
                case SpoofClass::Sophisticated: {
                    for (std::size_t f : {EC, LC, PC, PIP, PQP, TCD}) z[f] += 4.0 * s;
                    const double rho = 0.8 * s;
                    z[PQP] = rho * (z[PIP] - 4.0 * s) + std::sqrt(1.0 - rho * rho) * (z[PQP] - 4.0 * s) + 4.0 * s;
                    break;
                }
            }
            for (std::size_t f = 0; f < kSpoofFeatureCount; ++f) row[f] = kScales[f].centre + kScales[f].spread * z[f];
            row[PRN] = static_cast<double>(1 + rng.below(32));
            ds.push_row(row, c);
        }
    }
    return ds;
}

TabularDataset apply_imbalance(const TabularDataset& ds, std::span<const double> ratios, std::uint64_t seed) {
    if (ratios.size() != ds.n_classes()) throw UsageError("apply_imbalance: one ratio per class required");
    const double top = *std::max_element(ratios.begin(), ratios.end());
    if (!(top > 0.0)) throw UsageError("apply_imbalance: ratios must be positive");
    std::vector<std::vector<std::size_t>> by_class(ds.n_classes());
    for (std::size_t i = 0; i < ds.rows(); ++i) by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& idx = by_class[c];
        Rng rng(derive_seed(seed, "imbalance", c));
        rng.shuffle(std::span<std::size_t>(idx));
        const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * ratios[c] / top));
        keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(n, idx.size())));
    }
    std::sort(keep.begin(), keep.end());
    return ds.subset(keep);
}

}  // namespace gnss::tabular
