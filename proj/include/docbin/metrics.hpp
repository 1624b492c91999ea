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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "docbin/image.hpp"

namespace docbin {

/// Raised when a metric is undefined on the given pair (e.g. DRD with a
/// uniform ground truth).
class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

ConfusionCounts confusion(const LabelImage& pred, const LabelImage& gt);

/// F-measure in percent, foreground positive. Degenerate cases: both
/// foregrounds empty -> 100; otherwise an empty precision or recall
/// denominator -> 0.
double f1_from_counts(const ConfusionCounts& c);
double f1_percent(const LabelImage& pred, const LabelImage& gt);

/// 10*log10(1/MSE) with MSE the disagreeing-pixel fraction; identical
/// images capped at 100 dB.
double psnr_db(const LabelImage& pred, const LabelImage& gt);

/// Distance reciprocal distortion: per mislabeled pixel, the 5x5
/// inverse-distance-weighted disagreement against the ground truth,
/// normalized by NUBN (the number of complete non-uniform 8x8 GT blocks).
/// Throws MetricError when NUBN is zero.
double drd(const LabelImage& pred, const LabelImage& gt);

/// Complete 8x8 ground-truth blocks containing both labels.
std::uint64_t nubn(const LabelImage& gt);

struct ImageEval {
    std::string name;
    double f1 = 0.0;
    double psnr = 0.0;
    double drd = 0.0;
    bool drd_defined = true;
    std::uint64_t tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
    std::vector<ImageEval> images;
    double mean_f1 = 0.0;
    double mean_psnr = 0.0;
    double mean_drd = 0.0; // over images with defined DRD

    void finalize();
};

/// Evaluates every stem-matched (prediction, ground truth) PNG pair of the
/// two directories. Unmatched stems on either side are reported through
/// `unmatched`; no matches at all is an error.
EvalReport evaluate_corpus(const std::filesystem::path& pred_dir,
                           const std::filesystem::path& gt_dir,
                           std::vector<std::string>* unmatched = nullptr);

EvalReport evaluate_pairs(const std::vector<std::string>& names,
                          const std::vector<LabelImage>& preds,
                          const std::vector<LabelImage>& gts);

} // namespace docbin
