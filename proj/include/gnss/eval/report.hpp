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

#include <filesystem>
#include <string>
#include <vector>

#include "gnss/eval/metrics.hpp"
#include "json.hpp"

namespace gnss::eval {

/// Header row ",<class>..." then one row per true class.
void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                         const std::vector<std::string>& class_names);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path, std::vector<std::string>* class_names = nullptr);

/// Rows: one per class (precision, recall, f1), then "macro" and "accuracy".
void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report,
                       const std::vector<std::string>& class_names);
MetricsReport read_metrics_csv(const std::filesystem::path& path);

/// fpr,tpr pairs for one class.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);
RocCurve read_roc_csv(const std::filesystem::path& path);

void write_roc_svg(const std::filesystem::path& path, const RocResult& roc, const std::vector<std::string>& class_names,
                   const std::string& title);
void write_confusion_svg(const std::filesystem::path& path, const ConfusionMatrix& cm,
                         const std::vector<std::string>& class_names, const std::string& title);
void write_accuracy_bar_svg(const std::filesystem::path& path, const std::vector<std::string>& labels,
                            const std::vector<double>& values, const std::string& title);

/// Writes confusion.csv, metrics.csv, roc_<class>.csv, auc.csv, roc.svg and
/// confusion.svg under `dir` and returns a summary document.
nlohmann::json write_eval_report(const std::filesystem::path& dir, std::span<const int> y_true,
                                 const ml::ProbaMatrix& proba, const std::vector<std::string>& class_names,
                                 const std::string& title);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace gnss::eval
