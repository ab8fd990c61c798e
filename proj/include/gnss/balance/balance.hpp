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

#include <cstdint>
#include <string_view>
#include <vector>

#include "gnss/tabular/dataset.hpp"

namespace gnss::balance {

enum class Method { None, Undersample, Oversample, Smote };

std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view name);

/// Every class reduced, without replacement, to the smallest class count.
/// Output rows are shuffled by `seed`.
tabular::TabularDataset random_undersample(const tabular::TabularDataset& ds, std::uint64_t seed);

/// Every class raised to the largest class count by duplicating its own rows
/// (with replacement). Original rows come first, unchanged and in order.
tabular::TabularDataset random_oversample(const tabular::TabularDataset& ds, std::uint64_t seed);

/// Provenance of one SMOTE point: synthetic = base + gap * (neighbor - base),
/// where base and neighbor are row indices into the input dataset.
struct SmoteSample {
    std::size_t base;
    std::size_t neighbor;
    double gap;
};

struct SmoteResult {
    tabular::TabularDataset data;     // originals first, then synthetic rows
    std::vector<SmoteSample> log;     // one entry per synthetic row, same order
};

/// SMOTE with Euclidean k-nearest same-class neighbours (distance ties go to
/// the lower row index). Requires count > k for every class that needs
/// synthetic rows.
SmoteResult smote_with_log(const tabular::TabularDataset& ds, std::size_t k, std::uint64_t seed);
tabular::TabularDataset smote(const tabular::TabularDataset& ds, std::size_t k = 5, std::uint64_t seed = 0);

tabular::TabularDataset rebalance(const tabular::TabularDataset& ds, Method method, std::uint64_t seed,
                                  std::size_t smote_k = 5);

}  // namespace gnss::balance
