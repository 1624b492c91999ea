// Copyright 2026 the docbin authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "docbin/learner.hpp"
#include "docbin/rng.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace docbin;

namespace {

FeatureMatrix matrix_from(const SampleSet& set) {
    FeatureMatrix m;
    m.dim = set.dim;
    m.schema_fingerprint = set.schema_fingerprint;
    m.values = set.rows;
    return m;
}

std::vector<char> file_bytes(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Re-walks a row through a tree and checks that every branch predicate on
// the path holds for the row that reached the leaf.
bool replay_path(const ErtTree& tree, const float* row) {
    std::uint32_t i = 0;
    while (!tree.nodes[i].is_leaf()) {
        const ErtNode& n = tree.nodes[i];
        const bool go_left = row[n.feature] < n.threshold;
        const std::uint32_t next = go_left ? n.left : n.right;
        if (go_left && !(row[n.feature] < n.threshold)) {
            return false;
        }
        if (!go_left && row[n.feature] < n.threshold) {
            return false;
        }
        if (next <= i || next >= tree.nodes.size()) {
            return false; // malformed link
        }
        i = next;
    }
    return tree.leaf_for(row) == i;
}

} // namespace

TEST_SUITE("learner") {

TEST_CASE("gnb recovers class statistics in closed form") {
    SampleSet set;
    set.dim = 1;
    set.schema_fingerprint = 1;
    const float zeros[] = {-1.0f, -1.2f, -0.8f};
    const float ones[] = {1.0f, 1.1f, 0.9f, 1.0f, 1.0f, 1.0f, 1.0f};
    for (const float v : zeros) {
        set.append_row(&v, 0, 0, 0);
    }
    for (const float v : ones) {
        set.append_row(&v, 1, 0, 0);
    }
    const GnbModel m = gnb_fit(set);
    CHECK(m.mean[0][0] == doctest::Approx(-1.0));
    CHECK(m.mean[1][0] == doctest::Approx(1.0));
    CHECK(std::exp(m.log_prior[0]) == doctest::Approx(0.3));
    CHECK(std::exp(m.log_prior[1]) == doctest::Approx(0.7));
    CHECK(m.var[0][0] > 0.0);

    const float probe = -0.9f;
    CHECK(gnb_predict_row(m, &probe) == 0);
}

TEST_CASE("gnb posterior matches the closed-form oracle") {
    const SampleSet set = synth::gaussian_toy(7, 400, 5);
    const GnbModel m = gnb_fit(set);
    Rng rng(8);
    std::vector<float> row(5);
    for (int t = 0; t < 200; ++t) {
        for (float& v : row) {
            v = static_cast<float>(rng.uniform_real(-4.0, 4.0));
        }
        const double expected =
            oracle::gnb_log_joint(std::exp(m.log_prior[1]), m.mean[1], m.var[1],
                                  row.data(), 5) -
            oracle::gnb_log_joint(std::exp(m.log_prior[0]), m.mean[0], m.var[0],
                                  row.data(), 5);
        CHECK(gnb_log_odds(m, row.data()) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("gnb ties resolve to background") {
    SampleSet set;
    set.dim = 1;
    set.schema_fingerprint = 1;
    const float v = 0.5f;
    for (int i = 0; i < 10; ++i) {
        set.append_row(&v, static_cast<std::uint8_t>(i % 2), 0, 0);
    }
    const GnbModel m = gnb_fit(set); // identical classes, equal priors
    CHECK(gnb_log_odds(m, &v) == doctest::Approx(0.0));
    CHECK(gnb_predict_row(m, &v) == 0);
}

TEST_CASE("gnb rejects single-class input") {
    SampleSet set;
    set.dim = 1;
    set.schema_fingerprint = 1;
    const float v = 1.0f;
    set.append_row(&v, 1, 0, 0);
    set.append_row(&v, 1, 0, 0);
    CHECK_THROWS_AS(gnb_fit(set), DataError);
}

TEST_CASE("ert separates axis-aligned toy data") {
    const SampleSet train = synth::separable_toy(100, 2000);
    ErtHyperParams hp;
    hp.n_trees = 30;
    const ErtModel m = ert_fit(train, hp, 55, 2);
    const std::vector<std::uint8_t> pred = ert_predict(m, matrix_from(train), 2);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        correct += pred[i] == train.labels[i] ? 1 : 0;
    }
    CHECK(correct == pred.size()); // grown to purity: training accuracy 1.0
}

TEST_CASE("ert on single-class input predicts that class") {
    SampleSet set;
    set.dim = 2;
    set.schema_fingerprint = 3;
    const float a[] = {0.1f, 0.2f};
    const float b[] = {0.5f, -0.1f};
    set.append_row(a, 1, 0, 0);
    set.append_row(b, 1, 0, 0);
    ErtHyperParams hp;
    hp.n_trees = 5;
    const ErtModel m = ert_fit(set, hp, 9, 1);
    for (const ErtTree& tree : m.trees) {
        CHECK(tree.nodes.size() == 1);
    }
    const std::vector<std::uint8_t> pred = ert_predict(m, matrix_from(set), 1);
    CHECK(pred[0] == 1);
    CHECK(pred[1] == 1);
}

TEST_CASE("ert training is deterministic and serialization round-trips") {
    const SampleSet train = synth::separable_toy(200, 500);
    ErtHyperParams hp;
    hp.n_trees = 12;
    const ErtModel m1 = ert_fit(train, hp, 77, 4);
    const ErtModel m2 = ert_fit(train, hp, 77, 1); // thread count must not matter

    const auto dir = std::filesystem::temp_directory_path();
    save_model(m1, dir / "docbin_m1.bin");
    save_model(m2, dir / "docbin_m2.bin");
    CHECK(file_bytes(dir / "docbin_m1.bin") == file_bytes(dir / "docbin_m2.bin"));

    const ErtModel loaded = load_model(dir / "docbin_m1.bin");
    Rng rng(3);
    SampleSet probes = synth::separable_toy(300, 1000);
    const FeatureMatrix rows = matrix_from(probes);
    CHECK(ert_predict(m1, rows, 1) == ert_predict(loaded, rows, 1));
    CHECK(loaded.train_seed == m1.train_seed);

    // Truncated files are rejected.
    const auto bytes = file_bytes(dir / "docbin_m1.bin");
    std::ofstream cut(dir / "docbin_cut.bin", std::ios::binary | std::ios::trunc);
    cut.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    cut.close();
    CHECK_THROWS_AS(load_model(dir / "docbin_cut.bin"), ModelError);

    std::filesystem::remove(dir / "docbin_m1.bin");
    std::filesystem::remove(dir / "docbin_m2.bin");
    std::filesystem::remove(dir / "docbin_cut.bin");
}

TEST_CASE("ert refuses rows from a different schema") {
    const SampleSet train = synth::separable_toy(400, 100);
    ErtHyperParams hp;
    hp.n_trees = 3;
    const ErtModel m = ert_fit(train, hp, 5, 1);
    FeatureMatrix rows = matrix_from(train);
    rows.schema_fingerprint ^= 0xDEAD;
    CHECK_THROWS_AS(ert_predict(m, rows, 1), ModelError);
}

TEST_CASE("hand-built forest predicts along traced paths") {
    // Tree A: x0 < 0.5 -> class 1 leaf, else class 0 leaf.
    ErtTree a;
    a.nodes.resize(3);
    a.nodes[0].feature = 0;
    a.nodes[0].threshold = 0.5f;
    a.nodes[0].left = 1;
    a.nodes[0].right = 2;
    a.nodes[0].counts[0] = 5;
    a.nodes[0].counts[1] = 5;
    a.nodes[1].counts[1] = 5; // pure foreground
    a.nodes[2].counts[0] = 5; // pure background

    // Tree B: x1 < -0.25 -> pure class 0, else mixed 1:3 foreground leaf.
    ErtTree b;
    b.nodes.resize(3);
    b.nodes[0].feature = 1;
    b.nodes[0].threshold = -0.25f;
    b.nodes[0].left = 1;
    b.nodes[0].right = 2;
    b.nodes[0].counts[0] = 6;
    b.nodes[0].counts[1] = 3;
    b.nodes[1].counts[0] = 5;
    b.nodes[2].counts[0] = 1;
    b.nodes[2].counts[1] = 3;

    ErtModel m;
    m.dim = 2;
    m.schema_fingerprint = 11;
    m.hp.n_trees = 2;
    m.trees = {a, b};

    FeatureMatrix rows;
    rows.dim = 2;
    rows.schema_fingerprint = 11;
    rows.values = {0.0f, 0.0f,    // A: left (1.0), B: right (0.75) -> 0.875 -> 1
                   1.0f, -0.5f,   // A: right (0.0), B: left (0.0) -> 0.0 -> 0
                   0.6f, 0.1f};   // A: right (0.0), B: right (0.75) -> 0.375 -> 0
    const std::vector<float> proba = ert_predict_proba(m, rows, 1);
    CHECK(proba[0] == doctest::Approx(0.875));
    CHECK(proba[1] == doctest::Approx(0.0));
    CHECK(proba[2] == doctest::Approx(0.375));
    const std::vector<std::uint8_t> pred = ert_predict(m, rows, 1);
    CHECK(pred[0] == 1);
    CHECK(pred[1] == 0);
    CHECK(pred[2] == 0);
}

TEST_CASE("a 50/50 pure split is a tie and goes to background") {
    ErtTree fg, bg;
    fg.nodes.resize(1);
    fg.nodes[0].counts[1] = 4;
    bg.nodes.resize(1);
    bg.nodes[0].counts[0] = 4;
    ErtModel m;
    m.dim = 1;
    m.schema_fingerprint = 2;
    m.hp.n_trees = 2;
    m.trees = {fg, bg};
    FeatureMatrix rows;
    rows.dim = 1;
    rows.schema_fingerprint = 2;
    rows.values = {0.0f};
    CHECK(ert_predict_proba(m, rows, 1)[0] == doctest::Approx(0.5));
    CHECK(ert_predict(m, rows, 1)[0] == 0);
}

TEST_CASE("every leaf assignment survives path replay") {
    const SampleSet train = synth::separable_toy(500, 800);
    ErtHyperParams hp;
    hp.n_trees = 10;
    const ErtModel m = ert_fit(train, hp, 21, 2);
    const SampleSet probes = synth::separable_toy(501, 500);
    for (const ErtTree& tree : m.trees) {
        for (std::size_t r = 0; r < probes.size(); ++r) {
            CHECK(replay_path(tree, probes.row(r)));
        }
    }
}

TEST_CASE("feature importances concentrate on the informative channel") {
    // Feature 0 carries the label; 1..3 are noise; 4 is constant.
    Rng rng(31);
    SampleSet set;
    set.dim = 5;
    set.schema_fingerprint = 4;
    std::vector<float> row(5);
    for (int i = 0; i < 2000; ++i) {
        const bool fg = rng.uniform_real() < 0.5;
        row[0] = static_cast<float>(fg ? rng.uniform_real(0.6, 1.0)
                                       : rng.uniform_real(0.0, 0.4));
        for (int f = 1; f < 4; ++f) {
            row[static_cast<std::size_t>(f)] = static_cast<float>(rng.uniform_real());
        }
        row[4] = 0.25f;
        set.append_row(row.data(), fg ? 1 : 0, 0, 0);
    }
    ErtHyperParams hp;
    hp.n_trees = 40;
    hp.k_features = 3;
    const ErtModel m = ert_fit(set, hp, 13, 2);
    const std::vector<double> imp = feature_importances(m);
    double total = 0.0;
    for (const double v : imp) {
        CHECK(v >= 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(imp[0] > 0.9);
    CHECK(imp[4] == 0.0); // constant channels can never split

    const auto fams = family_importances(imp, FeatureSchema::instance());
    (void)fams; // exercised properly in the pipeline tests
}

TEST_CASE("cross-validation picks from the grid deterministically") {
    const SampleSet set = synth::separable_toy(600, 400);
    ErtHyperParams base;
    base.n_trees = 10;
    const CvReport report = cross_validate(set, {base}, 71, 2);
    CHECK(report.fold_f1.size() == 10);
    CHECK(report.chosen.n_trees == 10);
    CHECK(report.mean_f1 >= 99.0); // separable
    const CvReport again = cross_validate(set, {base}, 71, 1);
    CHECK(report.fold_f1 == again.fold_f1);

    SampleSet tiny = synth::separable_toy(601, 12);
    CHECK_THROWS_AS(cross_validate(tiny, {base}, 1, 1), DataError);
}

TEST_CASE("stratified folds partition the samples") {
    const SampleSet set = synth::separable_toy(602, 250);
    const std::vector<int> folds = stratified_folds(set.labels, 10, 99);
    REQUIRE(folds.size() == set.size());
    std::array<std::size_t, 10> sizes{};
    for (const int f : folds) {
        REQUIRE(f >= 0);
        REQUIRE(f < 10);
        ++sizes[static_cast<std::size_t>(f)];
    }
    std::size_t total = 0;
    for (const std::size_t s : sizes) {
        CHECK(s >= 20); // 250 samples over 10 folds, stratified
        total += s;
    }
    CHECK(total == set.size());
}

} // TEST_SUITE
