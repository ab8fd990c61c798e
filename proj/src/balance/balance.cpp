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

#include "gnss/balance/balance.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "gnss/core/error.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::balance {

namespace {

using tabular::TabularDataset;

std::vector<std::vector<std::size_t>> rows_by_class(const TabularDataset& ds) {
    if (ds.rows() == 0) throw DataError("balance: empty dataset");
    std::vector<std::vector<std::size_t>> out(ds.n_classes());
    for (std::size_t i = 0; i < ds.rows(); ++i) out[static_cast<std::size_t>(ds.y[i])].push_back(i);
    for (std::size_t c = 0; c < out.size(); ++c)
        if (out[c].empty()) throw DataError("balance: class '" + ds.class_names[c] + "' has no samples");
    return out;
}

std::size_t largest(const std::vector<std::vector<std::size_t>>& groups) {
    std::size_t m = 0;
    for (const auto& g : groups) m = std::max(m, g.size());
    return m;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::None: return "none";
        case Method::Undersample: return "undersample";
        case Method::Oversample: return "oversample";
        case Method::Smote: return "smote";
    }
    return "none";
}

Method method_from_string(std::string_view name) {
    for (Method m : {Method::None, Method::Undersample, Method::Oversample, Method::Smote})
        if (std::ranges::equal(name, to_string(m), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == b;
            }))
            return m;
    throw UsageError("unknown balancing method '" + std::string(name) + "'; valid: none, undersample, oversample, smote");
}

TabularDataset random_undersample(const TabularDataset& ds, std::uint64_t seed) {
    auto groups = rows_by_class(ds);
    std::size_t target = groups.front().size();
    for (const auto& g : groups) target = std::min(target, g.size());
    std::vector<std::size_t> keep;
    keep.reserve(target * groups.size());
    for (std::size_t c = 0; c < groups.size(); ++c) {
        Rng rng(derive_seed(seed, "undersample", c));
        rng.shuffle(std::span<std::size_t>(groups[c]));
        keep.insert(keep.end(), groups[c].begin(), groups[c].begin() + static_cast<std::ptrdiff_t>(target));
    }
    Rng order(derive_seed(seed, "undersample_order"));
    order.shuffle(std::span<std::size_t>(keep));
    return ds.subset(keep);
}

TabularDataset random_oversample(const TabularDataset& ds, std::uint64_t seed) {
    const auto groups = rows_by_class(ds);
    const std::size_t target = largest(groups);
    std::vector<std::size_t> rows(ds.rows());
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t c = 0; c < groups.size(); ++c) {
        Rng rng(derive_seed(seed, "oversample", c));
        for (std::size_t extra = groups[c].size(); extra < target; ++extra)
            rows.push_back(groups[c][rng.below(groups[c].size())]);
    }
    return ds.subset(rows);
}

SmoteResult smote_with_log(const TabularDataset& ds, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw UsageError("smote: k must be >= 1");
    const auto groups = rows_by_class(ds);
    const std::size_t target = largest(groups);
    const std::size_t d = ds.cols();
    SmoteResult result{ds, {}};

    for (std::size_t c = 0; c < groups.size(); ++c) {
        const auto& members = groups[c];
        if (members.size() >= target) continue;
        if (members.size() <= k)
            throw DataError("smote: class '" + ds.class_names[c] + "' has " + std::to_string(members.size()) +
                            " samples, which does not exceed k = " + std::to_string(k) + "; use a smaller k");
        // k nearest same-class neighbours of every member, by exhaustive scan.
        std::vector<std::vector<std::size_t>> neighbours(members.size());
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t a = 0; a < members.size(); ++a) {
            dist.clear();
            const auto xa = ds.row(members[a]);
            for (std::size_t b = 0; b < members.size(); ++b) {
                if (a == b) continue;
                const auto xb = ds.row(members[b]);
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += (xa[j] - xb[j]) * (xa[j] - xb[j]);
                dist.emplace_back(s, members[b]);
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            for (std::size_t j = 0; j < k; ++j) neighbours[a].push_back(dist[j].second);
        }
        Rng rng(derive_seed(seed, "smote", c));
        std::vector<double> point(d);
        for (std::size_t made = members.size(); made < target; ++made) {
            const std::size_t a = static_cast<std::size_t>(rng.below(members.size()));
            const std::size_t nb = neighbours[a][rng.below(k)];
            const double gap = rng.uniform();
            const auto xa = ds.row(members[a]);
            const auto xn = ds.row(nb);
            for (std::size_t j = 0; j < d; ++j) point[j] = xa[j] + gap * (xn[j] - xa[j]);
            result.data.push_row(point, static_cast<int>(c));
            result.log.push_back({members[a], nb, gap});
        }
    }
    return result;
}

TabularDataset smote(const TabularDataset& ds, std::size_t k, std::uint64_t seed) {
    return smote_with_log(ds, k, seed).data;
}

TabularDataset rebalance(const TabularDataset& ds, Method method, std::uint64_t seed, std::size_t smote_k) {
    switch (method) {
        case Method::None: return ds;
        case Method::Undersample: return random_undersample(ds, seed);
        case Method::Oversample: return random_oversample(ds, seed);
        case Method::Smote: return smote(ds, smote_k, seed);
    }
    return ds;
}

}  // namespace gnss::balance
