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

#include "gnss/eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gnss/core/error.hpp"

namespace gnss::eval {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

double parse_double(const std::string& s, const fs::path& path) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("bad number '" + s + "' in " + path.string());
    return v;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string fixed(double v, int digits = 2) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string svg_open(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
    return "<text x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
           std::to_string(size) + "\">" + xml_escape(s) + "</text>\n";
}

}  // namespace

void write_confusion_csv(const fs::path& path, const ConfusionMatrix& cm, const std::vector<std::string>& names) {
    if (names.size() != cm.k) throw UsageError("write_confusion_csv: class name count differs from K");
    auto out = open_out(path);
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < cm.k; ++i) {
        out << names[i];
        for (std::size_t j = 0; j < cm.k; ++j) out << ',' << cm.at(i, j);
        out << '\n';
    }
}

ConfusionMatrix read_confusion_csv(const fs::path& path, std::vector<std::string>* class_names) {
    const auto rows = read_rows(path);
    if (rows.empty()) throw DataError("empty confusion CSV: " + path.string());
    const std::size_t k = rows[0].size() - 1;
    if (rows.size() != k + 1) throw DataError("confusion CSV is not square: " + path.string());
    ConfusionMatrix cm{k, std::vector<std::size_t>(k * k)};
    if (class_names) class_names->assign(rows[0].begin() + 1, rows[0].end());
    for (std::size_t i = 0; i < k; ++i) {
        if (rows[i + 1].size() != k + 1) throw DataError("confusion CSV row width mismatch: " + path.string());
        for (std::size_t j = 0; j < k; ++j) cm.counts[i * k + j] = std::stoull(rows[i + 1][j + 1]);
    }
    return cm;
}

void write_metrics_csv(const fs::path& path, const MetricsReport& r, const std::vector<std::string>& names) {
    if (names.size() != r.precision.size()) throw UsageError("write_metrics_csv: class name count mismatch");
    auto out = open_out(path);
    out << "class,precision,recall,f1\n";
    for (std::size_t c = 0; c < names.size(); ++c)
        out << names[c] << ',' << format_double(r.precision[c]) << ',' << format_double(r.recall[c]) << ','
            << format_double(r.f1[c]) << '\n';
    out << "macro," << format_double(r.macro_precision) << ',' << format_double(r.macro_recall) << ','
        << format_double(r.macro_f1) << '\n';
    out << "accuracy," << format_double(r.accuracy) << ",,\n";
}

MetricsReport read_metrics_csv(const fs::path& path) {
    const auto rows = read_rows(path);
    MetricsReport r;
    bool macro = false, acc = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 2) throw DataError("malformed metrics row in " + path.string());
        if (row[0] == "accuracy") {
            r.accuracy = parse_double(row[1], path);
            acc = true;
            continue;
        }
        if (row.size() < 4) throw DataError("malformed metrics row in " + path.string());
        const double p = parse_double(row[1], path), rc = parse_double(row[2], path), f = parse_double(row[3], path);
        if (row[0] == "macro") {
            r.macro_precision = p;
            r.macro_recall = rc;
            r.macro_f1 = f;
            macro = true;
        } else {
            r.precision.push_back(p);
            r.recall.push_back(rc);
            r.f1.push_back(f);
        }
    }
    if (!macro || !acc) throw DataError("metrics CSV lacks macro/accuracy rows: " + path.string());
    return r;
}

void write_roc_csv(const fs::path& path, const RocCurve& c) {
    auto out = open_out(path);
    out << "fpr,tpr\n";
    for (std::size_t i = 0; i < c.fpr.size(); ++i) out << format_double(c.fpr[i]) << ',' << format_double(c.tpr[i]) << '\n';
}

RocCurve read_roc_csv(const fs::path& path) {
    const auto rows = read_rows(path);
    RocCurve c;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw DataError("malformed ROC row in " + path.string());
        c.fpr.push_back(parse_double(rows[i][0], path));
        c.tpr.push_back(parse_double(rows[i][1], path));
    }
    c.present = !c.fpr.empty();
    double a = 0.0;
    for (std::size_t i = 1; i < c.fpr.size(); ++i) a += (c.fpr[i] - c.fpr[i - 1]) * (c.tpr[i] + c.tpr[i - 1]) / 2.0;
    c.auc = a;
    return c;
}

void write_roc_svg(const fs::path& path, const RocResult& roc, const std::vector<std::string>& names,
                   const std::string& title) {
    const int W = 520, H = 460, L = 60, T = 40, S = 360;
    std::string s = svg_open(W, H);
    s += text(W / 2.0, 24, title, "middle", 14);
    s += "<rect x=\"" + std::to_string(L) + "\" y=\"" + std::to_string(T) + "\" width=\"" + std::to_string(S) +
         "\" height=\"" + std::to_string(S) + "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + std::to_string(L) + "\" y1=\"" + std::to_string(T + S) + "\" x2=\"" + std::to_string(L + S) +
         "\" y2=\"" + std::to_string(T) + "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        s += text(L + v * S, T + S + 16, fixed(v));
        s += text(L - 6, T + S - v * S + 4, fixed(v), "end");
    }
    s += text(L + S / 2.0, T + S + 34, "False positive rate");
    s += "<text x=\"16\" y=\"" + fixed(T + S / 2.0) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fixed(T + S / 2.0) + ")\">True positive rate</text>\n";
    int legend = 0;
    for (std::size_t c = 0; c < roc.curves.size(); ++c) {
        const auto& cv = roc.curves[c];
        if (!cv.present) continue;
        const char* color = kPalette[c % 8];
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < cv.fpr.size(); ++i)
            s += fixed(L + cv.fpr[i] * S) + "," + fixed(T + S - cv.tpr[i] * S) + " ";
        s += "\"/>\n";
        const double ly = T + 12 + 16 * legend++;
        s += "<rect x=\"" + std::to_string(L + S + 8) + "\" y=\"" + fixed(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
             color + "\"/>\n";
        const std::string label = (c < names.size() ? names[c] : std::to_string(c)) + " " + fixed(cv.auc, 3);
        s += text(L + S + 22, ly, label, "start", 10);
    }
    s += "</svg>\n";
    open_out(path) << s;
}

void write_confusion_svg(const fs::path& path, const ConfusionMatrix& cm, const std::vector<std::string>& names,
                         const std::string& title) {
    const int cell = 56, L = 120, T = 60;
    const int W = L + cell * static_cast<int>(cm.k) + 20, H = T + cell * static_cast<int>(cm.k) + 50;
    std::string s = svg_open(W, H);
    s += text(W / 2.0, 24, title, "middle", 14);
    for (std::size_t i = 0; i < cm.k; ++i) {
        const double row = static_cast<double>(std::max<std::size_t>(cm.row_sum(i), 1));
        for (std::size_t j = 0; j < cm.k; ++j) {
            const double f = static_cast<double>(cm.at(i, j)) / row;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - f)));
            const std::string fill = "rgb(" + std::to_string(shade) + "," + std::to_string(shade) + ",255)";
            const int x = L + static_cast<int>(j) * cell, y = T + static_cast<int>(i) * cell;
            s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
                 std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + fill +
                 "\" stroke=\"white\"/>\n";
            s += text(x + cell / 2.0, y + cell / 2.0 + 4, std::to_string(cm.at(i, j)));
        }
        const std::string name = i < names.size() ? names[i] : std::to_string(i);
        s += text(L - 6, T + static_cast<double>(i) * cell + cell / 2.0 + 4, name, "end", 10);
        s += text(L + static_cast<double>(i) * cell + cell / 2.0, T - 6, name, "middle", 10);
    }
    s += text(L + cell * static_cast<double>(cm.k) / 2.0, H - 16, "Predicted class (rows: true class)");
    s += "</svg>\n";
    open_out(path) << s;
}

void write_accuracy_bar_svg(const fs::path& path, const std::vector<std::string>& labels,
                            const std::vector<double>& values, const std::string& title) {
    if (labels.size() != values.size()) throw UsageError("write_accuracy_bar_svg: label/value count mismatch");
    const int bar = 56, gap = 18, L = 60, T = 40, Hp = 300;
    const int W = L + static_cast<int>(labels.size()) * (bar + gap) + 20, H = T + Hp + 80;
    std::string s = svg_open(W, H);
    s += text(W / 2.0, 24, title, "middle", 14);
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0, y = T + Hp - v * Hp;
        s += "<line x1=\"" + std::to_string(L) + "\" y1=\"" + fixed(y) + "\" x2=\"" + std::to_string(W - 20) + "\" y2=\"" +
             fixed(y) + "\" stroke=\"#dddddd\"/>\n";
        s += text(L - 6, y + 4, fixed(v, 1), "end");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double v = std::clamp(values[i], 0.0, 1.0);
        const double x = L + gap / 2.0 + static_cast<double>(i) * (bar + gap);
        s += "<rect x=\"" + fixed(x) + "\" y=\"" + fixed(T + Hp - v * Hp) + "\" width=\"" + std::to_string(bar) +
             "\" height=\"" + fixed(v * Hp) + "\" fill=\"" + kPalette[i % 8] + "\"/>\n";
        s += text(x + bar / 2.0, T + Hp - v * Hp - 4, fixed(100.0 * values[i]) + "%", "middle", 10);
        s += text(x + bar / 2.0, T + Hp + 16, labels[i], "middle", 9);
    }
    s += "</svg>\n";
    open_out(path) << s;
}

nlohmann::json write_eval_report(const fs::path& dir, std::span<const int> y_true, const ml::ProbaMatrix& proba,
                                 const std::vector<std::string>& names, const std::string& title) {
    fs::create_directories(dir);
    std::vector<int> pred(proba.rows);
    for (std::size_t i = 0; i < proba.rows; ++i) pred[i] = ml::argmax(proba.row(i));
    const auto cm = confusion(y_true, pred, proba.classes);
    const auto rep = metrics(cm);
    const auto roc = roc_auc_ovr(y_true, proba);
    write_confusion_csv(dir / "confusion.csv", cm, names);
    write_metrics_csv(dir / "metrics.csv", rep, names);
    auto auc_out = open_out(dir / "auc.csv");
    auc_out << "class,present,auc\n";
    nlohmann::json aucs = nlohmann::json::object();
    for (std::size_t c = 0; c < roc.curves.size(); ++c) {
        const auto& cv = roc.curves[c];
        auc_out << names[c] << ',' << (cv.present ? 1 : 0) << ',' << (cv.present ? format_double(cv.auc) : "") << '\n';
        if (cv.present) {
            write_roc_csv(dir / ("roc_" + names[c] + ".csv"), cv);
            aucs[names[c]] = cv.auc;
        } else {
            aucs[names[c]] = nullptr;
        }
    }
    write_roc_svg(dir / "roc.svg", roc, names, title + " ROC (one-vs-rest)");
    write_confusion_svg(dir / "confusion.svg", cm, names, title + " confusion matrix");
    nlohmann::json warnings = rep.warnings;
    for (const auto& w : roc.warnings) warnings.push_back(w);
    return {{"n", proba.rows},
            {"accuracy", rep.accuracy},
            {"macro_precision", rep.macro_precision},
            {"macro_recall", rep.macro_recall},
            {"macro_f1", rep.macro_f1},
            {"macro_auc", roc.macro_auc},
            {"auc", aucs},
            {"warnings", warnings}};
}

}  // namespace gnss::eval
