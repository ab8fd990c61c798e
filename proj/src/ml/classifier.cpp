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

#include "gnss/ml/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "gnss/core/error.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::ml {

using tabular::Standardizer;
using tabular::TabularDataset;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void softmax_inplace(std::span<double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (auto& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (auto& v : z) v /= s;
}

void log_normalize_to_proba(std::span<double> logp) {
    const double m = *std::max_element(logp.begin(), logp.end());
    if (m == kNegInf) {
        std::fill(logp.begin(), logp.end(), 1.0 / static_cast<double>(logp.size()));
        return;
    }
    double s = 0.0;
    for (auto& v : logp) {
        v = std::exp(v - m);
        s += v;
    }
    for (auto& v : logp) v /= s;
}

std::vector<double> standardized(const TabularDataset& ds, const Standardizer& s) {
    std::vector<double> out(ds.X.size());
    for (std::size_t i = 0; i < ds.rows(); ++i)
        s.apply_row(ds.row(i), std::span<double>(out.data() + i * ds.cols(), ds.cols()));
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

GrowOptions grow_options(const TreeParams& p, std::size_t max_features = 0) {
    return {p.max_depth, p.min_samples_split, p.min_impurity_decrease, max_features};
}

// --- logistic regression --------------------------------------------------

LogisticModel fit_logistic(const LogisticParams& p, const TabularDataset& train) {
    LogisticModel m;
    m.scaler = tabular::fit_standardizer(train);
    const auto xs = standardized(train, m.scaler);
    const MatrixView X{xs.data(), train.rows(), train.cols()};
    const std::size_t k = train.n_classes(), d = train.cols();
    std::vector<double> params(k * d + k, 0.0), grad, trial(params.size()), trial_grad;
    double step = p.lr;
    double f = logistic_objective(params, X, train.y, k, p.l2, &grad);
    int it = 0;
    for (; it < p.max_iter; ++it) {
        const double gnorm2 = dot(grad, grad);
        if (std::sqrt(gnorm2) <= p.tol) {
            m.converged = true;
            break;
        }
        // Armijo backtracking from the last accepted step.
        for (;;) {
            for (std::size_t i = 0; i < params.size(); ++i) trial[i] = params[i] - step * grad[i];
            const double ft = logistic_objective(trial, X, train.y, k, p.l2, &trial_grad);
            if (ft <= f - 0.5 * step * gnorm2 || step < 1e-14) {
                params.swap(trial);
                grad.swap(trial_grad);
                f = ft;
                break;
            }
            step *= 0.5;
        }
        if (!std::isfinite(f)) throw NumericalError("logistic regression: objective became non-finite");
        step = std::min(step * 2.0, p.lr);
    }
    m.iterations = it;
    m.grad_norm = std::sqrt(dot(grad, grad));
    m.converged = m.grad_norm <= p.tol;
    m.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(k * d));
    m.bias.assign(params.begin() + static_cast<std::ptrdiff_t>(k * d), params.end());
    return m;
}

// --- k nearest neighbours -------------------------------------------------

KnnModel fit_knn(const KnnParams& p, const TabularDataset& train) {
    KnnModel m;
    m.scaler = tabular::fit_standardizer(train);
    m.points = standardized(train, m.scaler);
    m.labels = train.y;
    m.k = p.k;
    return m;
}

void knn_proba(const KnnModel& m, std::span<const double> x, std::span<double> out) {
    const std::size_t d = x.size();
    const std::size_t n = m.labels.size();
    std::vector<double> q(d);
    m.scaler.apply_row(x, q);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* p = m.points.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) s += (q[j] - p[j]) * (q[j] - p[j]);
        dist[i] = {s, i};
    }
    const std::size_t k = std::min(m.k, n);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) out[static_cast<std::size_t>(m.labels[dist[j].second])] += 1.0;
    for (auto& v : out) v /= static_cast<double>(k);
}

// --- Gaussian naive Bayes -------------------------------------------------

NaiveBayesModel fit_naive_bayes(const NaiveBayesParams& p, const TabularDataset& train) {
    const std::size_t k = train.n_classes(), d = train.cols();
    const double n = static_cast<double>(train.rows());
    NaiveBayesModel m;
    m.mean.assign(k * d, 0.0);
    m.var.assign(k * d, 0.0);
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const auto c = static_cast<std::size_t>(train.y[i]);
        count[c] += 1.0;
        for (std::size_t j = 0; j < d; ++j) m.mean[c * d + j] += train.at(i, j);
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j)
            if (count[c] > 0.0) m.mean[c * d + j] /= count[c];
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const auto c = static_cast<std::size_t>(train.y[i]);
        for (std::size_t j = 0; j < d; ++j) {
            const double e = train.at(i, j) - m.mean[c * d + j];
            m.var[c * d + j] += e * e;
        }
    }
    const auto overall = tabular::fit_standardizer(train);
    double max_var = 0.0;
    for (double s : overall.std) max_var = std::max(max_var, s * s);
    const double eps = p.var_smoothing * max_var;
    m.log_prior.assign(k, kNegInf);
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] > 0.0) m.log_prior[c] = std::log(count[c] / n);
        for (std::size_t j = 0; j < d; ++j) {
            double& v = m.var[c * d + j];
            v = (count[c] > 0.0 ? v / count[c] : 1.0) + eps;
            if (!(v > 0.0)) v = 1e-12;  // zero spread and no smoothing
        }
    }
    return m;
}

void naive_bayes_proba(const NaiveBayesModel& m, std::span<const double> x, std::span<double> out) {
    const std::size_t d = x.size();
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (m.log_prior[c] == kNegInf) {
            out[c] = kNegInf;
            continue;
        }
        double s = m.log_prior[c];
        for (std::size_t j = 0; j < d; ++j) {
            const double v = m.var[c * d + j];
            const double e = x[j] - m.mean[c * d + j];
            s -= 0.5 * std::log(2.0 * std::numbers::pi * v) + e * e / (2.0 * v);
        }
        out[c] = s;
    }
    log_normalize_to_proba(out);
}

// --- linear SVM, one-vs-rest ----------------------------------------------

SvmModel fit_svm(const SvmParams& p, const TabularDataset& train) {
    SvmModel m;
    m.scaler = tabular::fit_standardizer(train);
    const auto xs = standardized(train, m.scaler);
    const std::size_t k = train.n_classes(), d = train.cols(), n = train.rows();
    m.weights.assign(k * d, 0.0);
    m.bias.assign(k, 0.0);
    parallel_for(k, [&](std::size_t c) {
        std::vector<double> w(d, 0.0), g(d);
        double b = 0.0;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (int t = 0; t < p.epochs; ++t) {
            const double eta = p.lr / std::sqrt(1.0 + t);
            for (std::size_t j = 0; j < d; ++j) g[j] = p.l2 * w[j];
            double gb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double yi = train.y[i] == static_cast<int>(c) ? 1.0 : -1.0;
                const std::span<const double> xi(xs.data() + i * d, d);
                if (yi * (dot(w, xi) + b) < 1.0) {
                    for (std::size_t j = 0; j < d; ++j) g[j] -= yi * xi[j] * inv_n;
                    gb -= yi * inv_n;
                }
            }
            for (std::size_t j = 0; j < d; ++j) w[j] -= eta * g[j];
            b -= eta * gb;
        }
        std::copy(w.begin(), w.end(), m.weights.begin() + static_cast<std::ptrdiff_t>(c * d));
        m.bias[c] = b;
    });
    return m;
}

void linear_scores(const Standardizer& s, const std::vector<double>& w, const std::vector<double>& b,
                   std::span<const double> x, std::span<double> out) {
    const std::size_t d = x.size();
    std::vector<double> q(d);
    s.apply_row(x, q);
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = b[c] + dot(std::span<const double>(w.data() + c * d, d), q);
}

// --- forest ---------------------------------------------------------------

ForestModel fit_forest(const ForestParams& p, const TabularDataset& train, std::uint64_t seed) {
    const MatrixView X{train.X.data(), train.rows(), train.cols()};
    const std::size_t mf =
        p.max_features == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(train.cols()))))
                            : p.max_features;
    ForestModel m;
    m.trees.resize(p.n_trees);
    parallel_for(p.n_trees, [&](std::size_t t) {
        Rng rng(derive_seed(seed, "forest_tree", t));
        std::vector<std::size_t> rows(train.rows());
        if (p.bootstrap) {
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(train.rows()));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        m.trees[t] = grow_classification_tree(X, train.y, train.n_classes(), rows, grow_options(p.tree, mf), &rng);
    });
    return m;
}

// --- gradient boosting ----------------------------------------------------

double mean_deviance(const std::vector<double>& scores, std::span<const int> y, std::size_t k) {
    double s = 0.0;
    std::vector<double> z(k);
    for (std::size_t i = 0; i < y.size(); ++i) {
        std::copy_n(scores.begin() + static_cast<std::ptrdiff_t>(i * k), k, z.begin());
        const double m = *std::max_element(z.begin(), z.end());
        double lse = 0.0;
        for (double v : z) lse += std::exp(v - m);
        s += m + std::log(lse) - z[static_cast<std::size_t>(y[i])];
    }
    return s / static_cast<double>(y.size());
}

GbmModel fit_gbm(const GbmParams& p, const TabularDataset& train, std::uint64_t seed) {
    const std::size_t n = train.rows(), k = train.n_classes();
    const MatrixView X{train.X.data(), n, train.cols()};
    GbmModel m;
    m.learning_rate = p.learning_rate;
    const auto counts = train.class_counts();
    m.init.resize(k);
    for (std::size_t c = 0; c < k; ++c)
        m.init[c] = std::log(std::max(static_cast<double>(counts[c]) / static_cast<double>(n), 1e-12));

    std::vector<double> scores(n * k);
    for (std::size_t i = 0; i < n; ++i) std::copy(m.init.begin(), m.init.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * k));
    std::vector<double> proba(n * k);
    std::vector<std::vector<double>> residual(k, std::vector<double>(n));
    const double kfactor = static_cast<double>(k - 1) / static_cast<double>(k);
    const GrowOptions opt{p.max_depth, p.min_samples_split, 0.0, 0};

    for (std::size_t round = 0; round < p.n_rounds; ++round) {
        proba = scores;
        for (std::size_t i = 0; i < n; ++i) softmax_inplace(std::span<double>(proba.data() + i * k, k));
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t i = 0; i < n; ++i)
                residual[c][i] = (train.y[i] == static_cast<int>(c) ? 1.0 : 0.0) - proba[i * k + c];

        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        if (p.subsample < 1.0) {
            Rng rng(derive_seed(seed, "gbm_subsample", round));
            rng.shuffle(std::span<std::size_t>(rows));
            const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.subsample * static_cast<double>(n))));
            rows.resize(keep);
            std::sort(rows.begin(), rows.end());
        }

        std::vector<Tree> trees(k);
        parallel_for(k, [&](std::size_t c) {
            const auto& r = residual[c];
            // One Newton step per leaf for the multinomial deviance.
            const LeafValueFn leaf = [&r, kfactor](std::span<const std::size_t> leaf_rows) {
                double num = 0.0, den = 0.0;
                for (std::size_t i : leaf_rows) {
                    num += r[i];
                    den += std::abs(r[i]) * (1.0 - std::abs(r[i]));
                }
                return den < 1e-150 ? 0.0 : kfactor * num / den;
            };
            trees[c] = grow_regression_tree(X, r, rows, opt, leaf);
        });
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) scores[i * k + c] += p.learning_rate * trees[c].leaf_for(X.row(i)).value[0];
        const double dev = mean_deviance(scores, train.y, k);
        if (!std::isfinite(dev)) throw NumericalError("gradient boosting: deviance became non-finite");
        m.train_deviance.push_back(dev);
        m.rounds.push_back(std::move(trees));
    }
    return m;
}

// --- serialization helpers ------------------------------------------------

nlohmann::json scaler_json(const Standardizer& s) { return {{"mean", s.mean}, {"std", s.std}}; }

Standardizer scaler_from(const nlohmann::json& j) {
    return {j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
}

nlohmann::json encode_log(const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return a;
}

std::vector<double> decode_log(const nlohmann::json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(x.is_null() ? kNegInf : x.get<double>());
    return v;
}

}  // namespace

std::vector<double> ProbaMatrix::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = values[i * classes + c];
    return out;
}

int argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return static_cast<int>(best);
}

double logistic_objective(std::span<const double> params, MatrixView X, std::span<const int> y, std::size_t k,
                          double l2, std::vector<double>* grad) {
    const std::size_t d = X.cols, n = X.rows;
    const double* W = params.data();
    const double* b = params.data() + k * d;
    if (grad) grad->assign(params.size(), 0.0);
    std::vector<double> z(k);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = X.row(i);
        for (std::size_t c = 0; c < k; ++c) z[c] = b[c] + dot(std::span<const double>(W + c * d, d), x);
        const double m = *std::max_element(z.begin(), z.end());
        double lse = 0.0;
        for (double v : z) lse += std::exp(v - m);
        lse = m + std::log(lse);
        loss += lse - z[static_cast<std::size_t>(y[i])];
        if (grad) {
            for (std::size_t c = 0; c < k; ++c) {
                const double g = std::exp(z[c] - lse) - (y[i] == static_cast<int>(c) ? 1.0 : 0.0);
                double* gw = grad->data() + c * d;
                for (std::size_t j = 0; j < d; ++j) gw[j] += g * x[j];
                (*grad)[k * d + c] += g;
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double reg = 0.0;
    for (std::size_t i = 0; i < k * d; ++i) reg += W[i] * W[i];
    if (grad) {
        for (auto& g : *grad) g *= inv_n;
        for (std::size_t i = 0; i < k * d; ++i) (*grad)[i] += l2 * W[i];
    }
    return loss * inv_n + 0.5 * l2 * reg;
}

void ClassifierModel::proba_row(std::span<const double> x, std::span<double> out) const {
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LogisticModel>) {
                linear_scores(s.scaler, s.weights, s.bias, x, out);
                softmax_inplace(out);
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                knn_proba(s, x, out);
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                naive_bayes_proba(s, x, out);
            } else if constexpr (std::is_same_v<T, SvmModel>) {
                // Softmax over one-vs-rest margins; not calibrated.
                linear_scores(s.scaler, s.weights, s.bias, x, out);
                softmax_inplace(out);
            } else if constexpr (std::is_same_v<T, TreeModel>) {
                const auto& v = s.tree.leaf_for(x).value;
                std::copy(v.begin(), v.end(), out.begin());
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                std::fill(out.begin(), out.end(), 0.0);
                for (const auto& t : s.trees) out[static_cast<std::size_t>(argmax(t.leaf_for(x).value))] += 1.0;
                for (auto& v : out) v /= static_cast<double>(s.trees.size());
            } else if constexpr (std::is_same_v<T, GbmModel>) {
                std::copy(s.init.begin(), s.init.end(), out.begin());
                for (const auto& round : s.rounds)
                    for (std::size_t c = 0; c < out.size(); ++c)
                        out[c] += s.learning_rate * round[c].leaf_for(x).value[0];
                softmax_inplace(out);
            } else {
                std::fill(out.begin(), out.end(), 0.0);
                out[static_cast<std::size_t>(s.label)] = 1.0;
            }
        },
        state);
}

void ClassifierModel::check_compatible(const TabularDataset& ds) const {
    if (ds.cols() != n_features())
        throw DataError("model expects " + std::to_string(n_features()) + " features, data has " +
                        std::to_string(ds.cols()));
    if (ds.schema_fingerprint() != schema_fingerprint)
        throw DataError("model/data schema mismatch: fingerprint " + schema_fingerprint + " vs " +
                        ds.schema_fingerprint());
}

ProbaMatrix ClassifierModel::predict_proba(MatrixView X) const {
    if (X.cols != n_features())
        throw DataError("predict: model expects " + std::to_string(n_features()) + " features, got " +
                        std::to_string(X.cols));
    ProbaMatrix out{X.rows, n_classes(), std::vector<double>(X.rows * n_classes())};
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto x = X.row(i);
        for (double v : x)
            if (!std::isfinite(v)) throw DataError("predict: non-finite feature at row " + std::to_string(i));
        proba_row(x, out.row(i));
    }
    return out;
}

ProbaMatrix ClassifierModel::predict_proba(const TabularDataset& ds) const {
    check_compatible(ds);
    return predict_proba(MatrixView{ds.X.data(), ds.rows(), ds.cols()});
}

std::vector<int> ClassifierModel::predict(MatrixView X) const {
    const auto p = predict_proba(X);
    std::vector<int> out(p.rows);
    for (std::size_t i = 0; i < p.rows; ++i) out[i] = argmax(p.row(i));
    return out;
}

std::vector<int> ClassifierModel::predict(const TabularDataset& ds) const {
    check_compatible(ds);
    return predict(MatrixView{ds.X.data(), ds.rows(), ds.cols()});
}

ClassifierModel fit(const HyperParams& hyper, const TabularDataset& train, std::uint64_t seed) {
    validate(hyper);
    if (train.n_classes() < 2) throw UsageError("fit: at least two classes are required");
    if (train.rows() == 0) throw DataError("fit: empty training set");
    train.check();

    ClassifierModel model;
    model.kind = kind_of(hyper);
    model.hyper = hyper;
    model.feature_names = train.feature_names;
    model.class_names = train.class_names;
    model.schema_fingerprint = train.schema_fingerprint();

    const std::set<int> present(train.y.begin(), train.y.end());
    if (present.size() == 1) {
        model.state = ConstantModel{*present.begin()};
        return model;
    }
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LogisticParams>) {
                model.state = fit_logistic(p, train);
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                model.state = fit_knn(p, train);
            } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                model.state = fit_naive_bayes(p, train);
            } else if constexpr (std::is_same_v<T, SvmParams>) {
                model.state = fit_svm(p, train);
            } else if constexpr (std::is_same_v<T, TreeParams>) {
                std::vector<std::size_t> rows(train.rows());
                std::iota(rows.begin(), rows.end(), 0);
                const MatrixView X{train.X.data(), train.rows(), train.cols()};
                model.state = TreeModel{grow_classification_tree(X, train.y, train.n_classes(), rows, grow_options(p))};
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                model.state = fit_forest(p, train, seed);
            } else {
                model.state = fit_gbm(p, train, seed);
            }
        },
        hyper);
    return model;
}

nlohmann::json ClassifierModel::to_json() const {
    nlohmann::json st = std::visit(
        [](const auto& s) -> nlohmann::json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LogisticModel>) {
                return {{"scaler", scaler_json(s.scaler)}, {"weights", s.weights},     {"bias", s.bias},
                        {"iterations", s.iterations},      {"grad_norm", s.grad_norm}, {"converged", s.converged}};
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                return {{"scaler", scaler_json(s.scaler)}, {"points", s.points}, {"labels", s.labels}, {"k", s.k}};
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                return {{"log_prior", encode_log(s.log_prior)}, {"mean", s.mean}, {"var", s.var}};
            } else if constexpr (std::is_same_v<T, SvmModel>) {
                return {{"scaler", scaler_json(s.scaler)}, {"weights", s.weights}, {"bias", s.bias}};
            } else if constexpr (std::is_same_v<T, TreeModel>) {
                return {{"tree", s.tree.to_json()}};
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                nlohmann::json trees = nlohmann::json::array();
                for (const auto& t : s.trees) trees.push_back(t.to_json());
                return {{"trees", trees}};
            } else if constexpr (std::is_same_v<T, GbmModel>) {
                nlohmann::json rounds = nlohmann::json::array();
                for (const auto& r : s.rounds) {
                    nlohmann::json per_class = nlohmann::json::array();
                    for (const auto& t : r) per_class.push_back(t.to_json());
                    rounds.push_back(per_class);
                }
                return {{"init", s.init},
                        {"learning_rate", s.learning_rate},
                        {"rounds", rounds},
                        {"train_deviance", s.train_deviance}};
            } else {
                return {{"constant_label", s.label}};
            }
        },
        state);
    return {{"format", kModelFormat},
            {"version", kModelFormatVersion},
            {"kind", to_string(kind)},
            {"hyperparams", ml::to_json(hyper)},
            {"feature_names", feature_names},
            {"class_names", class_names},
            {"schema_fingerprint", schema_fingerprint},
            {"state", st}};
}

ClassifierModel ClassifierModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw DataError("not a classifier model document");
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw DataError("unsupported classifier model version " + j.at("version").dump());
        ClassifierModel m;
        m.kind = kind_from_string(j.at("kind").get<std::string>());
        m.hyper = hyperparams_from_json(m.kind, j.at("hyperparams"));
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
        const auto& s = j.at("state");
        if (s.contains("constant_label")) {
            m.state = ConstantModel{s.at("constant_label").get<int>()};
            return m;
        }
        switch (m.kind) {
            case ClassifierKind::LogisticRegression: {
                LogisticModel lm;
                lm.scaler = scaler_from(s.at("scaler"));
                lm.weights = s.at("weights").get<std::vector<double>>();
                lm.bias = s.at("bias").get<std::vector<double>>();
                lm.iterations = s.at("iterations").get<int>();
                lm.grad_norm = s.at("grad_norm").get<double>();
                lm.converged = s.at("converged").get<bool>();
                m.state = std::move(lm);
                break;
            }
            case ClassifierKind::Knn:
                m.state = KnnModel{scaler_from(s.at("scaler")), s.at("points").get<std::vector<double>>(),
                                   s.at("labels").get<std::vector<int>>(), s.at("k").get<std::size_t>()};
                break;
            case ClassifierKind::GaussianNB:
                m.state = NaiveBayesModel{decode_log(s.at("log_prior")), s.at("mean").get<std::vector<double>>(),
                                          s.at("var").get<std::vector<double>>()};
                break;
            case ClassifierKind::LinearSvm:
                m.state = SvmModel{scaler_from(s.at("scaler")), s.at("weights").get<std::vector<double>>(),
                                   s.at("bias").get<std::vector<double>>()};
                break;
            case ClassifierKind::DecisionTree: m.state = TreeModel{Tree::from_json(s.at("tree"))}; break;
            case ClassifierKind::RandomForest: {
                ForestModel fm;
                for (const auto& t : s.at("trees")) fm.trees.push_back(Tree::from_json(t));
                m.state = std::move(fm);
                break;
            }
            case ClassifierKind::GradientBoosting: {
                GbmModel gm;
                gm.init = s.at("init").get<std::vector<double>>();
                gm.learning_rate = s.at("learning_rate").get<double>();
                for (const auto& r : s.at("rounds")) {
                    std::vector<Tree> per_class;
                    for (const auto& t : r) per_class.push_back(Tree::from_json(t));
                    gm.rounds.push_back(std::move(per_class));
                }
                gm.train_deviance = s.at("train_deviance").get<std::vector<double>>();
                m.state = std::move(gm);
                break;
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed classifier model: ") + e.what());
    }
}

void ClassifierModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write model: " + path.string());
    out << to_json().dump() << '\n';
}

ClassifierModel ClassifierModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file is not valid JSON: " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace gnss::ml
