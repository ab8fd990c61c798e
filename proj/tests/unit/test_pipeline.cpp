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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gnss/core/error.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/cnn/train.hpp"
#include "gnss/eval/report.hpp"
#include "gnss/pipeline/cli.hpp"
#include "gnss/pipeline/commands.hpp"
#include "gnss/pipeline/config.hpp"
#include "gnss/spectro/spectrogram.hpp"

using namespace gnss;
using namespace gnss::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const nlohmann::json kSmallJamming = {
    {"per_class", 4}, {"frames", 16}, {"n_fft", 64}, {"hop", 32}, {"image_size", 16}, {"split", {2, 1, 1}}};
const nlohmann::json kSmallCnn = {
    {"arch", {{"stem_channels", 4}, {"stages", {{{"channels", 4}}, {{"channels", 8}}}}}},
    {"train", {{"epochs", 3}, {"batch_size", 4}, {"lr_max", 0.02}}}};
const nlohmann::json kSmallSpoofing = {
    {"n_per_class", 80},
    {"kinds", {"decision_tree", "gaussian_nb", "knn"}},
    {"cv_splits", 2},
    {"grids", {{"decision_tree", {{{"max_depth", 3}}, {{"max_depth", 6}}}}, {"knn", {{{"k", 3}}}}}}};

nlohmann::json small_config(std::uint64_t seed = 5) {
    return {{"seed", seed}, {"jamming", kSmallJamming}, {"cnn", kSmallCnn}, {"spoofing", kSmallSpoofing}};
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli(const std::vector<std::string>& args, const char* env_seed = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err, env_seed);
    set_thread_count(1);
    return {code, out.str(), err.str()};
}

RunConfig config_at(const fs::path& out, std::uint64_t seed = 5) {
    auto c = config_from_json(small_config(seed));
    c.out = out;
    return c;
}

std::size_t count_ext(const fs::path& dir, const std::string& ext) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) ++n;
    return n;
}

}  // namespace

TEST_CASE("synth writes one file and sidecar per signal") {
    TempDir tmp("gnss_test_pipe_synth");
    const auto m = cmd_synth(config_at(tmp.path / "run"));
    CHECK(count_ext(tmp.path / "run" / "iq", ".giq") == 24);
    CHECK(m.at("outputs").size() == 48);
    CHECK(m.at("summary").at("files") == 24);
    CHECK(fs::exists(tmp.path / "run" / "manifests" / "synth.json"));
    CHECK(read_manifest(tmp.path / "run", "synth").at("outputs_digest") == m.at("outputs_digest"));
}

TEST_CASE("invalid class name lists the valid set") {
    auto j = small_config();
    j["jamming"]["classes"] = {"NoJam", "Pulsed"};
    try {
        config_from_json(j);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("Pulsed") != std::string::npos);
        CHECK(msg.find("DME") != std::string::npos);
        CHECK(msg.find("Chirp") != std::string::npos);
    }
}

TEST_CASE("unknown config keys are rejected") {
    auto j = small_config();
    j["sed"] = 3;
    CHECK_THROWS_AS(config_from_json(j), UsageError);
    j = small_config();
    j["spoofing"]["balanse"] = "smote";
    CHECK_THROWS_AS(config_from_json(j), UsageError);
    j = small_config();
    j["jamming"]["image_size"] = 20;  // cnn input follows it, still valid
    CHECK(config_from_json(j).image.arch.input_height == 20);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), UsageError);
}

TEST_CASE("spectrogram images match inputs") {
    TempDir tmp("gnss_test_pipe_spec");
    const auto cfg = config_at(tmp.path / "run");
    cmd_synth(cfg);
    const auto m = cmd_spectrogram(cfg, {});
    CHECK(m.at("summary").at("images") == 24);
    for (const auto& name : jam_class_names()) {
        const fs::path d = tmp.path / "run" / "images" / name;
        CHECK(count_ext(d, ".pgm") == 4);
        for (const auto& e : fs::directory_iterator(d)) {
            std::ifstream in(e.path(), std::ios::binary);
            std::string magic;
            std::size_t w = 0, h = 0, maxv = 0;
            in >> magic >> w >> h >> maxv;
            CHECK(magic == "P5");
            CHECK(w == 16);
            CHECK(h == 16);
            CHECK(maxv == 255);
        }
    }
    // The written tree loads back in class-major order.
    const auto set = load_image_tree(tmp.path / "run" / "images");
    CHECK(set.size() == 24);
    CHECK(set.labels.front() == 0);
    CHECK(set.labels.back() == 5);
    CHECK_THROWS_AS(cmd_spectrogram(cfg, tmp.path / "missing"), DataError);
}

TEST_CASE("three-way split rounds per class and partitions") {
    std::vector<int> y;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 40; ++i) y.push_back(c);
    const std::vector<double> w{6, 1, 1};
    const auto s = stratified_three_way(y, w, 3);
    CHECK(s.train.size() == 3 * 30);
    CHECK(s.val.size() == 3 * 5);
    CHECK(s.test.size() == 3 * 5);
    std::vector<int> seen(y.size(), 0);
    for (auto* part : {&s.train, &s.val, &s.test})
        for (auto i : *part) ++seen[i];
    for (int v : seen) CHECK(v == 1);
    const std::vector<double> even{1, 1, 1};
    CHECK_THROWS_AS(stratified_three_way(std::vector<int>{0, 0}, even, 1), DataError);
}

TEST_CASE("train-tabular artifacts, evaluate, and schema checks") {
    TempDir tmp("gnss_test_pipe_tab");
    const fs::path run = tmp.path / "run";
    const auto m = cmd_train_tabular(config_at(run));
    for (const char* f : {"accuracy.svg", "summary.csv", "summary.json", "models/decision_tree.json",
                          "reports/knn/confusion.csv", "grids/decision_tree.csv", "data/train.csv"})
        CHECK_MESSAGE(fs::exists(run / f), f);
    const auto& models = m.at("summary").at("models");
    CHECK(models.size() == 3);
    CHECK(models.at("decision_tree").at("selected_index").get<std::size_t>() < 2);
    const auto train_counts = m.at("summary").at("data").at("train_counts").get<std::vector<std::size_t>>();
    for (auto c : train_counts) CHECK(c == train_counts[0]);

    // Own training set scores at least as well as the held-out set.
    const auto ev_train = cmd_evaluate(config_at(tmp.path / "ev1"), run / "models/decision_tree.json", run / "data/train.csv");
    const auto ev_test = cmd_evaluate(config_at(tmp.path / "ev2"), run / "models/decision_tree.json", run / "data/test.csv");
    CHECK(ev_train.at("summary").at("accuracy").get<double>() >= ev_test.at("summary").at("accuracy").get<double>());
    CHECK(ev_test.at("summary").at("accuracy").get<double>() ==
          doctest::Approx(models.at("decision_tree").at("test_accuracy").get<double>()));

    // A CSV without the model's features is refused.
    std::ofstream(tmp.path / "other.csv") << "a,b,class\n1,2,Authentic\n";
    CHECK_THROWS_AS(cmd_evaluate(config_at(tmp.path / "ev3"), run / "models/decision_tree.json", tmp.path / "other.csv"),
                    DataError);

    // Report CSVs match what the summary recorded, and report re-renders them.
    std::vector<std::string> names;
    const auto cm = eval::read_confusion_csv(run / "reports/knn/confusion.csv", &names);
    const auto test_counts = m.at("summary").at("data").at("test_counts").get<std::vector<std::size_t>>();
    for (std::size_t c = 0; c < 4; ++c) CHECK(cm.row_sum(c) == test_counts[c]);
    CHECK(names.size() == 4);
    const auto rep = cmd_report(config_at(tmp.path / "rep"), run);
    CHECK(rep.at("summary").at("accuracy_bars") == 3);
    CHECK(fs::exists(tmp.path / "rep" / "reports" / "knn" / "roc.svg"));
    CHECK(fs::exists(tmp.path / "rep" / "reports" / "knn" / "confusion.svg"));
}

TEST_CASE("grid-search command") {
    TempDir tmp("gnss_test_pipe_grid");
    const auto m = cmd_grid_search(config_at(tmp.path / "run"), {ml::ClassifierKind::DecisionTree});
    CHECK(m.at("summary").contains("decision_tree"));
    CHECK(!m.at("summary").contains("knn"));
    CHECK(fs::exists(tmp.path / "run" / "grids" / "decision_tree.csv"));
}

TEST_CASE("train-image history, resume equality, and hybrid reports") {
    TempDir tmp("gnss_test_pipe_img");
    const auto full = cmd_train_image(config_at(tmp.path / "full"));
    const auto hist = cnn::read_history_csv(tmp.path / "full" / "history.csv");
    CHECK(hist.size() == 3);
    CHECK(full.at("summary").at("epochs_done") == 3);
    CHECK(full.at("summary").contains("cnn"));
    CHECK(full.at("summary").contains("hybrid_features"));
    CHECK(full.at("summary").contains("hybrid_pixels"));
    CHECK(fs::exists(tmp.path / "full" / "reports" / "cnn" / "roc.svg"));

    ImageRunOptions stop;
    stop.stop_after_epoch = 1;
    const auto part = cmd_train_image(config_at(tmp.path / "part"), stop);
    CHECK(part.at("summary").at("epochs_done") == 1);
    CHECK(!part.at("summary").contains("cnn"));
    ImageRunOptions resume;
    resume.resume = tmp.path / "part" / "cnn_checkpoint.json";
    const auto resumed = cmd_train_image(config_at(tmp.path / "resumed"), resume);
    CHECK(resumed.at("outputs").at("cnn_checkpoint.json") == full.at("outputs").at("cnn_checkpoint.json"));
    CHECK(resumed.at("outputs").at("history.csv") == full.at("outputs").at("history.csv"));
    CHECK(resumed.at("outputs").at("reports/cnn/confusion.csv") == full.at("outputs").at("reports/cnn/confusion.csv"));

    // Evaluating the checkpoint on a written image tree.
    const auto cfg = config_at(tmp.path / "data");
    cmd_synth(cfg);
    cmd_spectrogram(cfg, {});
    const auto ev = cmd_evaluate(config_at(tmp.path / "ev"), tmp.path / "full" / "cnn_checkpoint.json",
                                 tmp.path / "data" / "images");
    CHECK(ev.at("summary").at("accuracy").get<double>() >= 0.0);
    CHECK(fs::exists(tmp.path / "ev" / "reports" / "evaluate" / "confusion.csv"));
}

TEST_CASE("resume rejects a different training config") {
    TempDir tmp("gnss_test_pipe_resume");
    ImageRunOptions stop;
    stop.stop_after_epoch = 1;
    cmd_train_image(config_at(tmp.path / "part"), stop);
    auto j = small_config();
    j["cnn"]["train"]["epochs"] = 4;
    auto cfg = config_from_json(j);
    cfg.out = tmp.path / "other";
    ImageRunOptions resume;
    resume.resume = tmp.path / "part" / "cnn_checkpoint.json";
    CHECK_THROWS_AS(cmd_train_image(cfg, resume), UsageError);
}

TEST_CASE("seed precedence") {
    CHECK(resolve_seed(1, nullptr, std::nullopt) == 1);
    CHECK(resolve_seed(1, "", std::nullopt) == 1);
    CHECK(resolve_seed(1, "7", std::nullopt) == 7);
    CHECK(resolve_seed(1, "7", 9) == 9);
    CHECK_THROWS_AS(resolve_seed(1, "seven", std::nullopt), UsageError);
    CHECK_THROWS_AS(parse_seed("-1"), UsageError);
    CHECK(parse_seed("18446744073709551615") == 18446744073709551615ULL);

    TempDir tmp("gnss_test_pipe_seed");
    const auto cfgp = write_config(tmp.path, small_config(1));
    const auto out = (tmp.path / "o").string();
    REQUIRE(cli({"--config", cfgp.string(), "--out", out, "--seed", "9", "synth"}, "7").code == 0);
    CHECK(read_manifest(out, "synth").at("config").at("seed") == 9);
    REQUIRE(cli({"--config", cfgp.string(), "--out", out, "synth"}, "7").code == 0);
    CHECK(read_manifest(out, "synth").at("config").at("seed") == 7);
    REQUIRE(cli({"--config", cfgp.string(), "--out", out, "synth"}).code == 0);
    CHECK(read_manifest(out, "synth").at("config").at("seed") == 1);
}

TEST_CASE("stage seeds are independent") {
    TempDir tmp("gnss_test_pipe_stage");
    auto a = config_at(tmp.path / "a");
    auto b = config_at(tmp.path / "b");
    b.stage_seeds["cv"] = 12345;
    const auto ma = cmd_train_tabular(a), mb = cmd_train_tabular(b);
    // Data stages are untouched by a different cross-validation seed.
    CHECK(ma.at("outputs").at("data/train.csv") == mb.at("outputs").at("data/train.csv"));
    CHECK(ma.at("outputs").at("data/test.csv") == mb.at("outputs").at("data/test.csv"));
    CHECK(ma.at("outputs").at("grids/decision_tree.csv") != mb.at("outputs").at("grids/decision_tree.csv"));
}

TEST_CASE("exit codes") {
    TempDir tmp("gnss_test_pipe_exit");
    const auto out = (tmp.path / "o").string();
    CHECK(cli({}).code == 1);
    CHECK(cli({"bogus"}).code == 1);
    CHECK(cli({"--seed", "abc", "--out", out, "synth"}).code == 1);
    CHECK(cli({"--threads", "0", "synth"}).code == 1);

    auto bad_key = small_config();
    bad_key["typo"] = 1;
    CHECK(cli({"--config", write_config(tmp.path, bad_key).string(), "--out", out, "synth"}).code == 1);

    auto bad_class = small_config();
    bad_class["jamming"]["classes"] = {"Pulsed"};
    const auto r = cli({"--config", write_config(tmp.path, bad_class).string(), "--out", out, "synth"});
    CHECK(r.code == 1);
    CHECK(r.err.find("NoJam") != std::string::npos);

    CHECK(cli({"--out", out, "spectrogram", "--in", (tmp.path / "none").string()}).code == 2);
    CHECK(cli({"--out", out, "train-tabular", "--data", (tmp.path / "none.csv").string()}).code == 2);
    std::ofstream(tmp.path / "bad.csv") << "PRN,class\n";
    CHECK(cli({"--out", out, "train-tabular", "--data", (tmp.path / "bad.csv").string()}).code == 2);

    auto diverge = small_config();
    diverge["cnn"]["train"]["lr_max"] = 1e30;
    diverge["jamming"]["hybrid"] = false;
    const auto d = cli({"--config", write_config(tmp.path, diverge).string(), "--out", out, "train-image"});
    CHECK(d.code == 3);
    CHECK(d.err.find("numerical") != std::string::npos);
}

TEST_CASE("every command is bit-reproducible across thread counts") {
    TempDir tmp("gnss_test_pipe_det");
    const auto cfgp = write_config(tmp.path, small_config(21)).string();
    auto run_all = [&](const std::string& tag, const std::string& threads) {
        const std::string out = (tmp.path / tag).string();
        const std::vector<std::string> base{"--config", cfgp, "--threads", threads, "--out", out};
        auto with = [&](std::vector<std::string> extra) {
            auto a = base;
            a.insert(a.end(), extra.begin(), extra.end());
            return a;
        };
        std::vector<std::string> digests;
        for (const auto& args :
             {with({"synth"}), with({"spectrogram"}), with({"train-tabular"}),
              with({"train-image", "--images", out + "/images"}), with({"grid-search", "--kind", "knn"})}) {
            const auto r = cli(args);
            REQUIRE_MESSAGE(r.code == 0, r.err);
        }
        REQUIRE(cli(with({"evaluate", "--model", out + "/models/knn.json", "--data", out + "/data/test.csv"})).code == 0);
        REQUIRE(cli(with({"report", "--in", out})).code == 0);
        for (const char* c : {"synth", "spectrogram", "train-tabular", "train-image", "grid-search", "evaluate", "report"})
            digests.push_back(read_manifest(out, c).at("outputs").dump());
        return digests;
    };
    const auto a = run_all("a", "1");
    const auto b = run_all("b", "1");
    const auto c = run_all("c", "2");
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i] == c[i]);
    }
}
