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
#include <optional>
#include <string>
#include <vector>

#include "docbin/features.hpp"
#include "docbin/sampler.hpp"

namespace docbin {

/// Raised on model/schema mismatches and model file corruption.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Gaussian Naive Bayes (bootstrap classifier for error mining)
// ---------------------------------------------------------------------------

struct GnbModel {
    int dim = 0;
    double log_prior[2] = {0.0, 0.0};
    std::vector<double> mean[2]; // per class, per feature
    std::vector<double> var[2];  // smoothed, always > 0
};

GnbModel gnb_fit(const SampleSet& samples);

/// Joint log-likelihood difference log p(x, c=1) - log p(x, c=0).
double gnb_log_odds(const GnbModel& m, const float* row);

/// Argmax class; exact ties resolve to background (0).
std::uint8_t gnb_predict_row(const GnbModel& m, const float* row);
std::vector<std::uint8_t> gnb_predict(const GnbModel& m, const FeatureMatrix& rows);

// ---------------------------------------------------------------------------
// Extremely Randomized Trees
// ---------------------------------------------------------------------------

struct ErtHyperParams {
    int n_trees = 100;
    int k_features = 12; // ceil(sqrt(142))
    int min_samples_split = 2;
    int max_depth = 0; // 0 = unlimited
};

struct ErtNode {
    static constexpr std::uint16_t kLeaf = 0xFFFF;
    std::uint16_t feature = kLeaf;
    float threshold = 0.0f;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t counts[2] = {0, 0}; // training class histogram at the node

    bool is_leaf() const { return feature == kLeaf; }
};

struct ErtTree {
    std::vector<ErtNode> nodes; // preorder; root at 0

    /// Index of the leaf a row lands in.
    std::uint32_t leaf_for(const float* row) const {
        std::uint32_t i = 0;
        while (!nodes[i].is_leaf()) {
            i = row[nodes[i].feature] < nodes[i].threshold ? nodes[i].left
                                                           : nodes[i].right;
        }
        return i;
    }
};

struct ErtModel {
    ErtHyperParams hp;
    int dim = 0;
    std::uint64_t schema_fingerprint = 0;
    std::uint64_t train_seed = 0;
    std::vector<ErtTree> trees;
};

/// Grows hp.n_trees extremely randomized trees: every tree sees all
/// samples (no bootstrap); each node draws K candidate features and one
/// uniform cut in the node's (min, max) per candidate, keeping the best
/// Gini decrease. Deterministic for a given seed (per-tree streams).
ErtModel ert_fit(const SampleSet& samples, const ErtHyperParams& hp,
                 std::uint64_t seed, int threads = 1);

/// Mean foreground fraction of the reached leaves.
float ert_proba_row(const ErtModel& m, const float* row);
std::vector<float> ert_predict_proba(const ErtModel& m, const FeatureMatrix& rows,
                                     int threads = 1);
/// Label 1 iff probability > 0.5 (ties to background).
std::vector<std::uint8_t> ert_predict(const ErtModel& m, const FeatureMatrix& rows,
                                      int threads = 1);

/// Mean decrease in Gini impurity per feature, normalized to sum 1
/// (all zeros for a degenerate split-free forest).
std::vector<double> feature_importances(const ErtModel& m);

struct FamilyImportance {
    std::string family;
    int dim = 0;
    double overall = 0.0;     // sum of member channels
    double dimensional = 0.0; // overall / dim
};
std::vector<FamilyImportance> family_importances(const std::vector<double>& importances,
                                                 const FeatureSchema& schema);

struct CvReport {
    std::vector<double> fold_f1; // chosen hyperparams, one entry per fold
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    ErtHyperParams chosen;
};

/// Per-sample fold ids: each class is shuffled and dealt round-robin, so
/// folds partition the set and stay stratified.
std::vector<int> stratified_folds(const std::vector<std::uint8_t>& labels, int n_folds,
                                  std::uint64_t seed);

/// Stratified 10-fold cross-validation over a hyperparameter grid; the
/// grid entry with the best mean F1 wins (first on ties).
CvReport cross_validate(const SampleSet& samples,
                        const std::vector<ErtHyperParams>& grid, std::uint64_t seed,
                        int threads = 1);

/// The CV grid used by the training pipeline when CV is requested.
std::vector<ErtHyperParams> default_cv_grid(const ErtHyperParams& base);

void save_model(const ErtModel& m, const std::filesystem::path& path);
ErtModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Two-pass training pipeline & whole-image prediction
// ---------------------------------------------------------------------------

struct TrainingImage {
    GrayImage image;
    LabelImage gt;
    std::string name;
};

struct PipelineConfig {
    std::size_t pass1_budget = 9600;
    std::size_t pass2_budget = 9600;
    FeatureConfig features;
    double niblack_k = -0.2; // subclass-labeling Niblack
    ErtHyperParams ert;
    bool run_cv = false;
    std::uint64_t seed = 42;
    int threads = 0; // 0 = hardware concurrency
};

struct PipelineResult {
    ErtModel model;
    SampleSet samples; // everything the final model was trained on
    std::optional<CvReport> cv;
    std::vector<double> importances;
};

/// Pass 1: balanced samples + Gaussian Naive Bayes; decode the training
/// images with it; pass 2: balanced erroneous samples; final ExtraTrees on
/// the union.
PipelineResult train_pipeline(const std::vector<TrainingImage>& corpus,
                              const PipelineConfig& config);

/// Per-pixel forest decision over a whole image (row-streamed, parallel).
LabelImage predict_image(const ErtModel& m, const GrayImage& im,
                         const FeatureConfig& cfg = {}, int threads = 0,
                         std::vector<float>* proba_out = nullptr);

/// Same streaming decode with the bootstrap classifier.
LabelImage gnb_predict_image(const GnbModel& m, const GrayImage& im,
                             const FeatureConfig& cfg = {}, int threads = 0);

} // namespace docbin
