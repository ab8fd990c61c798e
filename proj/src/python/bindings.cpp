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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "gnss/balance/balance.hpp"
#include "gnss/core/error.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/eval/metrics.hpp"
#include "gnss/ml/classifier.hpp"
#include "gnss/pipeline/cli.hpp"
#include "gnss/spectro/spectrogram.hpp"
#include "gnss/synth/signal_synth.hpp"
#include "gnss/tabular/dataset.hpp"

namespace py = pybind11;
using namespace gnss;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

tabular::TabularDataset to_dataset(DArray X, IArray y, std::vector<std::string> feature_names,
                                   std::vector<std::string> class_names) {
    if (X.ndim() != 2) throw UsageError("X must be a 2-d array");
    if (y.ndim() != 1 || y.shape(0) != X.shape(0)) throw UsageError("y must be 1-d with one label per row of X");
    const auto n = static_cast<std::size_t>(X.shape(0)), d = static_cast<std::size_t>(X.shape(1));
    tabular::TabularDataset ds;
    if (feature_names.empty())
        for (std::size_t j = 0; j < d; ++j) feature_names.push_back("f" + std::to_string(j));
    if (class_names.empty()) {
        int k = 0;
        for (py::ssize_t i = 0; i < y.shape(0); ++i) k = std::max(k, y.at(i) + 1);
        for (int c = 0; c < k; ++c) class_names.push_back("c" + std::to_string(c));
    }
    ds.feature_names = std::move(feature_names);
    ds.class_names = std::move(class_names);
    ds.X.assign(X.data(), X.data() + n * d);
    ds.y.assign(y.data(), y.data() + n);
    ds.check();
    return ds;
}

py::tuple from_dataset(const tabular::TabularDataset& ds) {
    DArray X({ds.rows(), ds.cols()});
    std::copy(ds.X.begin(), ds.X.end(), X.mutable_data());
    py::array_t<int> y(static_cast<py::ssize_t>(ds.y.size()), ds.y.data());
    return py::make_tuple(X, y, ds.feature_names, ds.class_names);
}

DArray proba_array(const ml::ProbaMatrix& p) {
    DArray out({p.rows, p.classes});
    std::copy(p.values.begin(), p.values.end(), out.mutable_data());
    return out;
}

ml::MatrixView view(const DArray& X) {
    if (X.ndim() != 2) throw UsageError("X must be a 2-d array");
    return {X.data(), static_cast<std::size_t>(X.shape(0)), static_cast<std::size_t>(X.shape(1))};
}

py::array_t<std::complex<double>> complex_array(const std::vector<std::complex<double>>& v) {
    py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

synth::SynthParams params_for(double fs, double duration, double jsr_db) {
    return synth::SynthParams::defaults(fs, duration, jsr_db);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "GNSS jamming and spoofing classification toolkit";
    m.attr("__version__") = GNSS_SENTINEL_VERSION;

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("set_thread_count", &set_thread_count, py::arg("n"));
    m.def("jam_class_names", [] {
        std::vector<std::string> out;
        for (auto c : synth::kAllJamClasses) out.emplace_back(synth::to_string(c));
        return out;
    });

    m.def(
        "synth_signal",
        [](const std::string& cls, double fs, double duration, double jsr_db, std::uint64_t seed, bool jammer) {
            const auto c = synth::jam_class_from_string(cls);
            const auto p = params_for(fs, duration, jsr_db);
            return complex_array(jammer ? synth::jammer_only(c, p, seed).samples : synth::synth_signal(c, p, seed).samples);
        },
        py::arg("cls"), py::arg("sample_rate_hz"), py::arg("duration_s"), py::arg("jsr_db") = 0.0, py::arg("seed") = 0,
        py::arg("jammer_only") = false,
        "Default-parameter IQ signal of one class; jammer_only drops the noise floor.");

    m.def(
        "stft",
        [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> x, double fs, std::size_t n_fft,
           std::size_t hop, const std::string& window) {
            if (x.ndim() != 1) throw UsageError("samples must be 1-d");
            const spectro::StftConfig cfg{n_fft, hop, spectro::window_from_string(window)};
            const auto s = spectro::stft(std::span(x.data(), static_cast<std::size_t>(x.shape(0))), fs, cfg);
            DArray grid({s.frames, s.bins});
            std::copy(s.grid.begin(), s.grid.end(), grid.mutable_data());
            std::vector<double> freqs(s.bins);
            for (std::size_t k = 0; k < s.bins; ++k) freqs[k] = s.bin_frequency(k);
            return py::make_tuple(grid, freqs);
        },
        py::arg("samples"), py::arg("sample_rate_hz"), py::arg("n_fft") = 256, py::arg("hop") = 128,
        py::arg("window") = "hann", "dB power grid (frames x bins, fft-shifted) and bin centre frequencies.");

    m.def(
        "spectrogram_image",
        [](DArray grid, std::size_t width, std::size_t height) {
            if (grid.ndim() != 2) throw UsageError("grid must be 2-d");
            spectro::Spectrogram s;
            s.frames = static_cast<std::size_t>(grid.shape(0));
            s.bins = static_cast<std::size_t>(grid.shape(1));
            s.grid.assign(grid.data(), grid.data() + s.frames * s.bins);
            const auto img = spectro::to_image(s, width, height);
            py::array_t<std::uint8_t> out({img.height, img.width});
            std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
            return out;
        },
        py::arg("grid"), py::arg("width") = 64, py::arg("height") = 64);

    m.def("synth_spoof_dataset",
          [](std::size_t n_per_class, double difficulty, std::uint64_t seed) {
              return from_dataset(tabular::synth_spoof_dataset(n_per_class, difficulty, seed));
          },
          py::arg("n_per_class"), py::arg("difficulty") = 0.5, py::arg("seed") = 0,
          "Returns (X, y, feature_names, class_names).");

    m.def(
        "rebalance",
        [](DArray X, IArray y, const std::string& method, std::uint64_t seed, std::size_t k) {
            const auto ds = to_dataset(X, y, {}, {});
            const auto out = balance::rebalance(ds, balance::method_from_string(method), seed, k);
            auto t = from_dataset(out);
            return py::make_tuple(t[0], t[1]);
        },
        py::arg("X"), py::arg("y"), py::arg("method") = "undersample", py::arg("seed") = 0, py::arg("smote_k") = 5);

    py::class_<ml::ClassifierModel>(m, "Classifier")
        .def_property_readonly("kind", [](const ml::ClassifierModel& c) { return std::string(ml::to_string(c.kind)); })
        .def_readonly("feature_names", &ml::ClassifierModel::feature_names)
        .def_readonly("class_names", &ml::ClassifierModel::class_names)
        .def("predict_proba", [](const ml::ClassifierModel& c, DArray X) { return proba_array(c.predict_proba(view(X))); })
        .def("predict", [](const ml::ClassifierModel& c, DArray X) { return c.predict(view(X)); })
        .def("to_json", [](const ml::ClassifierModel& c) { return c.to_json().dump(); })
        .def_static("from_json", [](const std::string& s) { return ml::ClassifierModel::from_json(nlohmann::json::parse(s)); })
        .def("save", [](const ml::ClassifierModel& c, const std::string& path) { c.save(path); })
        .def_static("load", [](const std::string& path) { return ml::ClassifierModel::load(path); });

    m.def(
        "fit",
        [](const std::string& kind, DArray X, IArray y, const std::string& params_json, std::uint64_t seed,
           std::vector<std::string> feature_names, std::vector<std::string> class_names) {
            const auto k = ml::kind_from_string(kind);
            const auto hp = ml::hyperparams_from_json(k, nlohmann::json::parse(params_json.empty() ? "{}" : params_json));
            return ml::fit(hp, to_dataset(X, y, std::move(feature_names), std::move(class_names)), seed);
        },
        py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("params") = "{}", py::arg("seed") = 0,
        py::arg("feature_names") = std::vector<std::string>{}, py::arg("class_names") = std::vector<std::string>{},
        "Train a classifier; params is a JSON object of hyperparameters.");

    m.def(
        "confusion_matrix",
        [](IArray t, IArray p, std::size_t k) {
            const auto cm = eval::confusion(std::span(t.data(), static_cast<std::size_t>(t.size())),
                                            std::span(p.data(), static_cast<std::size_t>(p.size())), k);
            py::array_t<std::size_t> out({k, k});
            std::copy(cm.counts.begin(), cm.counts.end(), out.mutable_data());
            return out;
        },
        py::arg("y_true"), py::arg("y_pred"), py::arg("n_classes"));

    m.def(
        "roc_auc_ovr",
        [](IArray y, DArray proba) {
            const auto mv = view(proba);
            ml::ProbaMatrix pm{mv.rows, mv.cols, std::vector<double>(mv.data, mv.data + mv.rows * mv.cols)};
            const auto r = eval::roc_auc_ovr(std::span(y.data(), static_cast<std::size_t>(y.size())), pm);
            std::vector<py::object> per;
            for (const auto& c : r.curves) per.push_back(c.present ? py::object(py::float_(c.auc)) : py::object(py::none()));
            return py::make_tuple(r.macro_auc, per);
        },
        py::arg("y_true"), py::arg("proba"), "Returns (macro AUC, per-class AUC or None for absent classes).");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args, std::optional<std::string> env_seed) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = pipeline::run_cli(args, out, err, env_seed ? env_seed->c_str() : nullptr);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), py::arg("env_seed") = py::none(), "Runs the command line in-process: (exit code, stdout, stderr).");
}
