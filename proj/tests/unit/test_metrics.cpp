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

#include "docbin/io.hpp"
#include "docbin/metrics.hpp"
#include "docbin/rng.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace docbin;

namespace {

LabelImage transpose(const LabelImage& im) {
    LabelImage out = LabelImage::create(im.height, im.width);
    for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x) {
            out.at(y, x) = im.at(x, y);
        }
    }
    return out;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("f1 on the worked examples") {
    LabelImage gt = LabelImage::create(10, 10, 0);
    for (int y = 4; y < 6; ++y) {
        for (int x = 4; x < 6; ++x) {
            gt.at(x, y) = 1;
        }
    }
    CHECK(f1_percent(gt, gt) == doctest::Approx(100.0));

    const LabelImage blank = LabelImage::create(10, 10, 0);
    CHECK(f1_percent(blank, gt) == doctest::Approx(0.0));
    CHECK(f1_percent(blank, blank) == doctest::Approx(100.0)); // both empty

    LabelImage half = blank;
    half.at(4, 4) = 1;
    half.at(5, 4) = 1; // two of the four square pixels, nothing else
    CHECK(f1_percent(half, gt) == doctest::Approx(200.0 / 3.0)); // P=1, R=0.5
}

TEST_CASE("psnr caps, scales, and zeroes") {
    const LabelImage a = LabelImage::create(10, 10, 0);
    CHECK(psnr_db(a, a) == doctest::Approx(100.0));

    LabelImage one_wrong = a;
    one_wrong.at(3, 3) = 1;
    LabelImage gt = a;
    gt.at(7, 7) = 1; // keep gt nonempty but disjoint: 2 wrong pixels
    // exact single-error case:
    CHECK(psnr_db(one_wrong, a) == doctest::Approx(20.0)); // MSE 1/100

    LabelImage complement = LabelImage::create(10, 10, 1);
    CHECK(psnr_db(complement, a) == doctest::Approx(0.0));
}

TEST_CASE("drd is zero only on identity and matches the weighted-sum rule") {
    // 32x32 GT with a centered 16x16 foreground square.
    LabelImage gt = LabelImage::create(32, 32, 0);
    for (int y = 10; y < 22; ++y) {
        for (int x = 10; x < 22; ++x) {
            gt.at(x, y) = 1;
        }
    }
    CHECK(drd(gt, gt) == doctest::Approx(0.0));

    // One flipped pixel deep inside the foreground: its whole 5x5
    // neighborhood disagrees, so DRD_k is the full weight sum (1).
    LabelImage pred = gt;
    pred.at(15, 15) = 0;
    const std::uint64_t blocks = nubn(gt);
    CHECK(blocks > 0);
    CHECK(drd(pred, gt) == doctest::Approx(1.0 / static_cast<double>(blocks)).epsilon(1e-12));

    const LabelImage uniform = LabelImage::create(32, 32, 0);
    CHECK_THROWS_AS(drd(gt, uniform), MetricError);
}

TEST_CASE("metrics match brute-force oracles on random pairs") {
    Rng rng(111);
    for (int trial = 0; trial < 50; ++trial) {
        const LabelImage pred = synth::random_labels(rng, 32, 32);
        const LabelImage gt = synth::random_labels(rng, 32, 32);
        CHECK(f1_percent(pred, gt) == oracle::f1(pred, gt));
        CHECK(psnr_db(pred, gt) == oracle::psnr(pred, gt));
        CHECK(drd(pred, gt) == doctest::Approx(oracle::drd(pred, gt)).epsilon(1e-9));
    }
}

TEST_CASE("flipping a correct pixel never improves f1 or psnr") {
    Rng rng(112);
    const LabelImage gt = synth::random_labels(rng, 16, 16);
    LabelImage pred = synth::random_labels(rng, 16, 16);
    const double f1_before = f1_percent(pred, gt);
    const double psnr_before = psnr_db(pred, gt);
    for (int t = 0; t < 30; ++t) {
        const std::size_t i = rng.uniform_index(pred.size());
        if (pred.data[i] != gt.data[i]) {
            continue;
        }
        LabelImage flipped = pred;
        flipped.data[i] ^= 1;
        CHECK(f1_percent(flipped, gt) <= f1_before);
        CHECK(psnr_db(flipped, gt) <= psnr_before);
    }
}

TEST_CASE("metrics are invariant under simultaneous transposition") {
    Rng rng(113);
    const LabelImage pred = synth::random_labels(rng, 24, 16);
    const LabelImage gt = synth::random_labels(rng, 24, 16);
    CHECK(f1_percent(pred, gt) == f1_percent(transpose(pred), transpose(gt)));
    CHECK(psnr_db(pred, gt) == psnr_db(transpose(pred), transpose(gt)));
    CHECK(drd(pred, gt) == doctest::Approx(drd(transpose(pred), transpose(gt))).epsilon(1e-12));
}

TEST_CASE("dimension mismatches are rejected") {
    const LabelImage a = LabelImage::create(4, 4, 0);
    const LabelImage b = LabelImage::create(4, 5, 0);
    CHECK_THROWS_AS(f1_percent(a, b), DataError);
    CHECK_THROWS_AS(psnr_db(a, b), DataError);
    CHECK_THROWS_AS(drd(a, b), DataError);
}

TEST_CASE("corpus evaluation aggregates with an unweighted mean") {
    Rng rng(114);
    std::vector<std::string> names{"a", "b"};
    std::vector<LabelImage> gts, preds;
    for (int i = 0; i < 2; ++i) {
        gts.push_back(synth::random_labels(rng, 32, 32));
        LabelImage p = gts.back();
        for (int flips = 0; flips < 40 * (i + 1); ++flips) {
            p.data[rng.uniform_index(p.size())] ^= 1;
        }
        preds.push_back(std::move(p));
    }
    const EvalReport report = evaluate_pairs(names, preds, gts);
    REQUIRE(report.images.size() == 2);
    CHECK(report.mean_f1 ==
          doctest::Approx((report.images[0].f1 + report.images[1].f1) / 2.0));
    CHECK(report.mean_psnr ==
          doctest::Approx((report.images[0].psnr + report.images[1].psnr) / 2.0));
}

TEST_CASE("directory evaluation pairs by stem and reports mismatches") {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "docbin_eval_test";
    fs::remove_all(root);
    fs::create_directories(root / "pred");
    fs::create_directories(root / "gt");

    Rng rng(115);
    const LabelImage x = synth::random_labels(rng, 24, 24);
    const LabelImage y = synth::random_labels(rng, 24, 24);
    save_label_png(root / "pred" / "x.png", x);
    save_label_png(root / "gt" / "x.png", x);
    save_label_png(root / "pred" / "y.png", y);
    save_label_png(root / "gt" / "y.png", y);
    save_label_png(root / "pred" / "orphan.png", x);

    std::vector<std::string> unmatched;
    const EvalReport report = evaluate_corpus(root / "pred", root / "gt", &unmatched);
    CHECK(report.images.size() == 2);
    for (const ImageEval& e : report.images) {
        CHECK(e.f1 == doctest::Approx(100.0));
        CHECK(e.psnr == doctest::Approx(100.0));
    }
    REQUIRE(unmatched.size() == 1);
    CHECK(unmatched[0] == "pred:orphan");

    // Disjoint stems: an error naming the strays.
    fs::create_directories(root / "gt2");
    save_label_png(root / "gt2" / "z.png", x);
    CHECK_THROWS_AS(evaluate_corpus(root / "pred", root / "gt2"), DataError);
    fs::remove_all(root);
}

} // TEST_SUITE
