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

#include "docbin/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "docbin/metrics.hpp"
#include "docbin/parallel.hpp"
#include "docbin/rng.hpp"

namespace docbin {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Pipeline stream tags; image streams are fork(2*i) / fork(2*i + 1).
constexpr std::uint64_t kForestStream = 0xF07E57;
constexpr std::uint64_t kCvStream = 0xC5;

} // namespace

// ---------------------------------------------------------------------------
// Gaussian Naive Bayes
// ---------------------------------------------------------------------------

GnbModel gnb_fit(const SampleSet& samples) {
    const std::size_t n = samples.size();
    if (n == 0) {
        throw DataError("gnb_fit: empty sample set");
    }
    const int dim = samples.dim;
    std::size_t count[2] = {0, 0};
    for (const std::uint8_t l : samples.labels) {
        ++count[l ? 1 : 0];
    }
    if (count[0] == 0 || count[1] == 0) {
        throw DataError("gnb_fit: both classes must be present");
    }

    GnbModel m;
    m.dim = dim;
    for (int c = 0; c < 2; ++c) {
        m.mean[c].assign(dim, 0.0);
        m.var[c].assign(dim, 0.0);
        m.log_prior[c] = std::log(static_cast<double>(count[c]) / n);
    }
    for (std::size_t r = 0; r < n; ++r) {
        const int c = samples.labels[r] ? 1 : 0;
        const float* row = samples.row(r);
        for (int f = 0; f < dim; ++f) {
            m.mean[c][f] += row[f];
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (int f = 0; f < dim; ++f) {
            m.mean[c][f] /= static_cast<double>(count[c]);
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        const int c = samples.labels[r] ? 1 : 0;
        const float* row = samples.row(r);
        for (int f = 0; f < dim; ++f) {
            const double d = row[f] - m.mean[c][f];
            m.var[c][f] += d * d;
        }
    }
    // Smoothing: 1e-9 of the largest per-class feature variance, with an
    // absolute floor for fully constant inputs.
    double max_var = 0.0;
    for (int c = 0; c < 2; ++c) {
        for (int f = 0; f < dim; ++f) {
            m.var[c][f] /= static_cast<double>(count[c]);
            max_var = std::max(max_var, m.var[c][f]);
        }
    }
    const double eps = std::max(1e-9 * max_var, 1e-12);
    for (int c = 0; c < 2; ++c) {
        for (int f = 0; f < dim; ++f) {
            m.var[c][f] += eps;
        }
    }
    return m;
}

double gnb_log_odds(const GnbModel& m, const float* row) {
    double ll[2];
    for (int c = 0; c < 2; ++c) {
        double acc = m.log_prior[c];
        for (int f = 0; f < m.dim; ++f) {
            const double v = m.var[c][f];
            const double d = row[f] - m.mean[c][f];
            acc += -0.5 * std::log(kTwoPi * v) - d * d / (2.0 * v);
        }
        ll[c] = acc;
    }
    return ll[1] - ll[0];
}

std::uint8_t gnb_predict_row(const GnbModel& m, const float* row) {
    return gnb_log_odds(m, row) > 0.0 ? 1 : 0;
}

std::vector<std::uint8_t> gnb_predict(const GnbModel& m, const FeatureMatrix& rows) {
    if (rows.dim != m.dim) {
        throw ModelError("gnb_predict: feature dimension mismatch");
    }
    std::vector<std::uint8_t> out(rows.rows());
    for (std::size_t r = 0; r < out.size(); ++r) {
        out[r] = gnb_predict_row(m, rows.row(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Extremely Randomized Trees
// ---------------------------------------------------------------------------

namespace {

double gini(std::uint32_t c0, std::uint32_t c1) {
    const double n = static_cast<double>(c0) + c1;
    if (n == 0.0) {
        return 0.0;
    }
    const double p0 = c0 / n;
    const double p1 = c1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeBuilder {
    const SampleSet& samples;
    const ErtHyperParams& hp;
    Rng rng;
    std::vector<std::uint32_t> indices;           // permuted per node split
    std::vector<std::uint16_t> feature_scratch;   // candidate draw pool
    ErtTree tree;

    TreeBuilder(const SampleSet& s, const ErtHyperParams& h, std::uint64_t tree_seed)
        : samples(s), hp(h), rng(tree_seed) {
        indices.resize(s.size());
        std::iota(indices.begin(), indices.end(), 0u);
        feature_scratch.resize(static_cast<std::size_t>(s.dim));
        std::iota(feature_scratch.begin(), feature_scratch.end(),
                  static_cast<std::uint16_t>(0));
    }

    struct Pending {
        std::uint32_t node;
        std::uint32_t begin, end;
        int depth;
    };

    void build() {
        tree.nodes.clear();
        tree.nodes.emplace_back();
        std::vector<Pending> stack;
        stack.push_back({0, 0, static_cast<std::uint32_t>(indices.size()), 0});
        while (!stack.empty()) {
            const Pending p = stack.back();
            stack.pop_back();
            grow(p, stack);
        }
    }

    void count_classes(std::uint32_t begin, std::uint32_t end, std::uint32_t out[2]) const {
        out[0] = out[1] = 0;
        for (std::uint32_t i = begin; i < end; ++i) {
            ++out[samples.labels[indices[i]] ? 1 : 0];
        }
    }

    void grow(const Pending& p, std::vector<Pending>& stack) {
        std::uint32_t counts[2];
        count_classes(p.begin, p.end, counts);
        tree.nodes[p.node].counts[0] = counts[0];
        tree.nodes[p.node].counts[1] = counts[1];
        const std::uint32_t n = p.end - p.begin;

        const bool pure = counts[0] == 0 || counts[1] == 0;
        const bool too_small = n < static_cast<std::uint32_t>(hp.min_samples_split);
        const bool too_deep = hp.max_depth > 0 && p.depth >= hp.max_depth;
        if (pure || too_small || too_deep) {
            return; // leaf
        }

        // K candidates without replacement; constant features are skipped.
        const int dim = samples.dim;
        const int k = std::min(hp.k_features, dim);
        int best_feature = -1;
        float best_threshold = 0.0f;
        double best_score = -1.0;
        const double parent_gini = gini(counts[0], counts[1]);
        for (int c = 0; c < k; ++c) {
            const std::uint64_t j = c + rng.uniform_index(static_cast<std::uint64_t>(dim - c));
            std::swap(feature_scratch[c], feature_scratch[j]);
            const std::uint16_t f = feature_scratch[c];

            float lo = std::numeric_limits<float>::infinity();
            float hi = -lo;
            for (std::uint32_t i = p.begin; i < p.end; ++i) {
                const float v = samples.row(indices[i])[f];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (!(lo < hi)) {
                continue; // constant within the node
            }
            const double u = rng.uniform_real();
            float thr = static_cast<float>(lo + u * (static_cast<double>(hi) - lo));
            if (thr <= lo) {
                thr = std::nextafter(lo, hi); // keep both sides nonempty
            }

            std::uint32_t left[2] = {0, 0};
            for (std::uint32_t i = p.begin; i < p.end; ++i) {
                const std::uint32_t idx = indices[i];
                if (samples.row(idx)[f] < thr) {
                    ++left[samples.labels[idx] ? 1 : 0];
                }
            }
            const std::uint32_t nl = left[0] + left[1];
            const std::uint32_t right[2] = {counts[0] - left[0], counts[1] - left[1]};
            const std::uint32_t nr = n - nl;
            const double score = parent_gini -
                                 (nl * gini(left[0], left[1]) + nr * gini(right[0], right[1])) / n;
            if (score > best_score) {
                best_score = score;
                best_feature = f;
                best_threshold = thr;
            }
        }
        if (best_feature < 0) {
            return; // every candidate was constant: leaf with mixed counts
        }

        auto mid_it = std::partition(
            indices.begin() + p.begin, indices.begin() + p.end,
            [&](std::uint32_t idx) { return samples.row(idx)[best_feature] < best_threshold; });
        const auto mid = static_cast<std::uint32_t>(mid_it - indices.begin());

        const auto left_id = static_cast<std::uint32_t>(tree.nodes.size());
        const std::uint32_t right_id = left_id + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        ErtNode& node = tree.nodes[p.node]; // re-fetch: emplace may reallocate
        node.feature = static_cast<std::uint16_t>(best_feature);
        node.threshold = best_threshold;
        node.left = left_id;
        node.right = right_id;
        // Left subtree is grown first (LIFO), fixing the RNG draw order.
        stack.push_back({right_id, mid, p.end, p.depth + 1});
        stack.push_back({left_id, p.begin, mid, p.depth + 1});
    }
};

} // namespace

ErtModel ert_fit(const SampleSet& samples, const ErtHyperParams& hp, std::uint64_t seed,
                 int threads) {
    if (samples.size() < 2) {
        throw DataError("ert_fit: need at least 2 samples");
    }
    if (hp.n_trees < 1 || hp.k_features < 1 || hp.min_samples_split < 2) {
        throw DataError("ert_fit: invalid hyperparameters");
    }
    ErtModel m;
    m.hp = hp;
    m.dim = samples.dim;
    m.schema_fingerprint = samples.schema_fingerprint;
    m.train_seed = seed;
    m.trees.resize(static_cast<std::size_t>(hp.n_trees));
    const Rng base(seed);
    parallel_for(0, hp.n_trees, threads, [&](std::int64_t t) {
        TreeBuilder builder(samples, hp, base.fork(static_cast<std::uint64_t>(t)).seed());
        builder.build();
        m.trees[static_cast<std::size_t>(t)] = std::move(builder.tree);
    });
    return m;
}

float ert_proba_row(const ErtModel& m, const float* row) {
    double acc = 0.0;
    for (const ErtTree& tree : m.trees) {
        const ErtNode& leaf = tree.nodes[tree.leaf_for(row)];
        const double n = static_cast<double>(leaf.counts[0]) + leaf.counts[1];
        acc += n > 0.0 ? leaf.counts[1] / n : 0.0;
    }
    return static_cast<float>(acc / static_cast<double>(m.trees.size()));
}

std::vector<float> ert_predict_proba(const ErtModel& m, const FeatureMatrix& rows,
                                     int threads) {
    if (rows.schema_fingerprint != m.schema_fingerprint) {
        throw ModelError("ert_predict: schema fingerprint mismatch");
    }
    if (rows.dim != m.dim) {
        throw ModelError("ert_predict: feature dimension mismatch");
    }
    std::vector<float> out(rows.rows());
    parallel_for(0, static_cast<std::int64_t>(out.size()), threads, [&](std::int64_t r) {
        out[static_cast<std::size_t>(r)] = ert_proba_row(m, rows.row(static_cast<std::size_t>(r)));
    });
    return out;
}

std::vector<std::uint8_t> ert_predict(const ErtModel& m, const FeatureMatrix& rows,
                                      int threads) {
    const std::vector<float> proba = ert_predict_proba(m, rows, threads);
    std::vector<std::uint8_t> out(proba.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = proba[i] > 0.5f ? 1 : 0;
    }
    return out;
}

std::vector<double> feature_importances(const ErtModel& m) {
    std::vector<double> imp(static_cast<std::size_t>(m.dim), 0.0);
    for (const ErtTree& tree : m.trees) {
        if (tree.nodes.empty()) {
            continue;
        }
        const double n_root =
            static_cast<double>(tree.nodes[0].counts[0]) + tree.nodes[0].counts[1];
        for (const ErtNode& node : tree.nodes) {
            if (node.is_leaf()) {
                continue;
            }
            const ErtNode& l = tree.nodes[node.left];
            const ErtNode& r = tree.nodes[node.right];
            const double n = static_cast<double>(node.counts[0]) + node.counts[1];
            const double nl = static_cast<double>(l.counts[0]) + l.counts[1];
            const double nr = static_cast<double>(r.counts[0]) + r.counts[1];
            const double decrease =
                gini(node.counts[0], node.counts[1]) -
                (nl * gini(l.counts[0], l.counts[1]) + nr * gini(r.counts[0], r.counts[1])) / n;
            imp[node.feature] += (n / n_root) * decrease;
        }
    }
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0) {
        for (double& v : imp) {
            v /= total;
        }
    }
    return imp;
}

std::vector<FamilyImportance> family_importances(const std::vector<double>& importances,
                                                 const FeatureSchema& schema) {
    std::vector<FamilyImportance> out;
    FeatureFamily current{};
    for (int i = 0; i < schema.total_dim(); ++i) {
        const FeatureFamily f = schema.entries()[static_cast<std::size_t>(i)].family;
        if (out.empty() || f != current) {
            current = f;
            out.push_back(FamilyImportance{family_name(f), 0, 0.0, 0.0});
        }
        out.back().dim += 1;
        out.back().overall += importances[static_cast<std::size_t>(i)];
    }
    for (FamilyImportance& fi : out) {
        fi.dimensional = fi.dim > 0 ? fi.overall / fi.dim : 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

std::vector<ErtHyperParams> default_cv_grid(const ErtHyperParams& base) {
    std::vector<ErtHyperParams> grid;
    for (const int trees : {50, 100, 200}) {
        for (const int mss : {2, 8, 32}) {
            ErtHyperParams hp = base;
            hp.n_trees = trees;
            hp.min_samples_split = mss;
            grid.push_back(hp);
        }
    }
    return grid;
}

std::vector<int> stratified_folds(const std::vector<std::uint8_t>& labels, int n_folds,
                                  std::uint64_t seed) {
    std::vector<int> fold_of(labels.size(), 0);
    Rng rng(seed);
    for (int c = 0; c < 2; ++c) {
        std::vector<std::uint32_t> members;
        for (std::uint32_t i = 0; i < labels.size(); ++i) {
            if ((labels[i] ? 1 : 0) == c) {
                members.push_back(i);
            }
        }
        for (std::size_t i = 0; i + 1 < members.size(); ++i) {
            const std::uint64_t j = i + rng.uniform_index(members.size() - i);
            std::swap(members[i], members[j]);
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
        }
    }
    return fold_of;
}

CvReport cross_validate(const SampleSet& samples, const std::vector<ErtHyperParams>& grid,
                        std::uint64_t seed, int threads) {
    constexpr int kFolds = 10;
    if (grid.empty()) {
        throw DataError("cross_validate: empty hyperparameter grid");
    }
    std::size_t per_class[2] = {0, 0};
    for (const std::uint8_t l : samples.labels) {
        ++per_class[l ? 1 : 0];
    }
    if (per_class[0] < kFolds || per_class[1] < kFolds) {
        throw DataError("cross_validate: need at least 10 samples per class");
    }

    const std::vector<int> fold_of =
        stratified_folds(samples.labels, kFolds, Rng(seed).fork(kCvStream).seed());

    auto subset = [&](int fold, bool held_out) {
        SampleSet sub;
        sub.dim = samples.dim;
        sub.schema_fingerprint = samples.schema_fingerprint;
        for (std::uint32_t i = 0; i < samples.size(); ++i) {
            if ((fold_of[i] == fold) == held_out) {
                sub.append_row(samples.row(i), samples.labels[i], samples.subclasses[i],
                               samples.image_ids[i]);
            }
        }
        return sub;
    };

    CvReport best;
    double best_mean = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> fold_f1(kFolds, 0.0);
        for (int fold = 0; fold < kFolds; ++fold) {
            const SampleSet train = subset(fold, false);
            const SampleSet test = subset(fold, true);
            const std::uint64_t fit_seed =
                Rng(seed).fork(kCvStream).fork(g * kFolds + static_cast<std::size_t>(fold)).seed();
            const ErtModel m = ert_fit(train, grid[g], fit_seed, threads);
            FeatureMatrix rows;
            rows.dim = test.dim;
            rows.schema_fingerprint = test.schema_fingerprint;
            rows.values = test.rows;
            const std::vector<std::uint8_t> pred = ert_predict(m, rows, threads);
            ConfusionCounts c;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const bool p = pred[i] != 0;
                const bool gt = test.labels[i] != 0;
                if (p && gt) ++c.tp;
                else if (p) ++c.fp;
                else if (gt) ++c.fn;
                else ++c.tn;
            }
            fold_f1[fold] = f1_from_counts(c);
        }
        const double mean = std::accumulate(fold_f1.begin(), fold_f1.end(), 0.0) / kFolds;
        if (mean > best_mean) {
            best_mean = mean;
            best.fold_f1 = fold_f1;
            best.mean_f1 = mean;
            best.chosen = grid[g];
        }
    }
    double var = 0.0;
    for (const double f : best.fold_f1) {
        var += (f - best.mean_f1) * (f - best.mean_f1);
    }
    best.std_f1 = std::sqrt(var / kFolds);
    return best;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr char kModelMagic[8] = {'D', 'B', 'I', 'N', 'E', 'R', 'T', '1'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) {
        throw ModelError("model file truncated");
    }
}

} // namespace

void save_model(const ErtModel& m, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open model file for writing: " + path.string());
    }
    f.write(kModelMagic, sizeof(kModelMagic));
    write_pod(f, kModelVersion);
    write_pod(f, m.schema_fingerprint);
    write_pod(f, static_cast<std::uint32_t>(m.dim));
    write_pod(f, static_cast<std::uint32_t>(m.hp.n_trees));
    write_pod(f, static_cast<std::uint32_t>(m.hp.k_features));
    write_pod(f, static_cast<std::uint32_t>(m.hp.min_samples_split));
    write_pod(f, static_cast<std::int32_t>(m.hp.max_depth));
    write_pod(f, m.train_seed);
    for (const ErtTree& tree : m.trees) {
        write_pod(f, static_cast<std::uint32_t>(tree.nodes.size()));
        for (const ErtNode& node : tree.nodes) {
            write_pod(f, node.feature);
            write_pod(f, node.threshold);
            write_pod(f, node.left);
            write_pod(f, node.right);
            write_pod(f, node.counts[0]);
            write_pod(f, node.counts[1]);
        }
    }
    if (!f) {
        throw IoError("short write to model file: " + path.string());
    }
}

ErtModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open model file: " + path.string());
    }
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
        throw ModelError("not a model file: " + path.string());
    }
    std::uint32_t version = 0;
    read_pod(f, version);
    if (version != kModelVersion) {
        throw ModelError("unsupported model version in " + path.string());
    }
    ErtModel m;
    std::uint32_t dim = 0, n_trees = 0, k_features = 0, min_split = 0;
    std::int32_t max_depth = 0;
    read_pod(f, m.schema_fingerprint);
    read_pod(f, dim);
    read_pod(f, n_trees);
    read_pod(f, k_features);
    read_pod(f, min_split);
    read_pod(f, max_depth);
    read_pod(f, m.train_seed);
    m.dim = static_cast<int>(dim);
    m.hp.n_trees = static_cast<int>(n_trees);
    m.hp.k_features = static_cast<int>(k_features);
    m.hp.min_samples_split = static_cast<int>(min_split);
    m.hp.max_depth = max_depth;
    m.trees.resize(n_trees);
    for (ErtTree& tree : m.trees) {
        std::uint32_t count = 0;
        read_pod(f, count);
        tree.nodes.resize(count);
        for (ErtNode& node : tree.nodes) {
            read_pod(f, node.feature);
            read_pod(f, node.threshold);
            read_pod(f, node.left);
            read_pod(f, node.right);
            read_pod(f, node.counts[0]);
            read_pod(f, node.counts[1]);
            if (!node.is_leaf() &&
                (node.feature >= dim || node.left >= count || node.right >= count)) {
                throw ModelError("corrupt node in model file: " + path.string());
            }
        }
        if (count == 0) {
            throw ModelError("empty tree in model file: " + path.string());
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

// Streams rows through `classify` one image row at a time, in parallel row
// blocks, without materializing the full feature matrix.
template <typename RowClassifier>
LabelImage decode_streaming(const FeatureExtractor& extractor, int threads,
                            RowClassifier&& classify) {
    const int w = extractor.width();
    const int h = extractor.height();
    const int dim = FeatureSchema::instance().total_dim();
    LabelImage out = LabelImage::create(w, h);
    parallel_blocks(0, h, resolve_threads(threads), [&](std::int64_t y0, std::int64_t y1) {
        std::vector<float> buffer(static_cast<std::size_t>(w) * dim);
        for (std::int64_t y = y0; y < y1; ++y) {
            extractor.extract_row(static_cast<int>(y), buffer.data());
            for (int x = 0; x < w; ++x) {
                out.data[static_cast<std::size_t>(y) * w + x] =
                    classify(&buffer[static_cast<std::size_t>(x) * dim], y * w + x);
            }
        }
    });
    return out;
}

} // namespace

LabelImage predict_image(const ErtModel& m, const GrayImage& im, const FeatureConfig& cfg,
                         int threads, std::vector<float>* proba_out) {
    if (m.schema_fingerprint != FeatureSchema::instance().fingerprint()) {
        throw ModelError("predict_image: model was trained under a different feature schema");
    }
    const FeatureExtractor extractor(im, cfg);
    if (proba_out) {
        proba_out->assign(im.size(), 0.0f);
    }
    return decode_streaming(extractor, threads, [&](const float* row, std::int64_t idx) {
        const float p = ert_proba_row(m, row);
        if (proba_out) {
            (*proba_out)[static_cast<std::size_t>(idx)] = p;
        }
        return p > 0.5f ? std::uint8_t{1} : std::uint8_t{0};
    });
}

LabelImage gnb_predict_image(const GnbModel& m, const GrayImage& im,
                             const FeatureConfig& cfg, int threads) {
    const FeatureExtractor extractor(im, cfg);
    return decode_streaming(extractor, threads, [&](const float* row, std::int64_t) {
        return gnb_predict_row(m, row);
    });
}

PipelineResult train_pipeline(const std::vector<TrainingImage>& corpus,
                              const PipelineConfig& config) {
    if (corpus.empty()) {
        throw DataError("train_pipeline: empty corpus");
    }
    for (const TrainingImage& t : corpus) {
        if (t.image.width != t.gt.width || t.image.height != t.gt.height) {
            throw DataError("train_pipeline: image/gt dimension mismatch for " + t.name);
        }
    }
    const int threads = resolve_threads(config.threads);
    const Rng base(config.seed);

    SampleSet samples;
    samples.rng_seed = config.seed;
    std::vector<SubclassMap> maps(corpus.size());
    std::vector<int> widths(corpus.size());

    // Pass 1: balanced samples per image.
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const FeatureExtractor extractor(corpus[i].image, config.features);
        const int s = extractor.stroke_width();
        widths[i] = s;
        NiblackParams niblack;
        niblack.k = config.niblack_k;
        niblack.window = default_threshold_window(s);
        maps[i] = subclass_map(corpus[i].image, corpus[i].gt, s, niblack);
        const std::vector<std::uint32_t> pixels =
            balanced_sample(maps[i], config.pass1_budget, base.fork(2 * i).seed());
        const FeatureMatrix feats = extractor.extract_at(pixels);
        samples.append(feats, maps[i], pixels, static_cast<std::uint32_t>(i));
    }

    const GnbModel gnb = gnb_fit(samples);

    // Pass 2: balanced erroneous samples mined from the bootstrap decode.
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        FeatureConfig cfg = config.features;
        cfg.stroke_width_override = widths[i]; // reuse pass-1 estimate
        const FeatureExtractor extractor(corpus[i].image, cfg);
        const LabelImage pred =
            decode_streaming(extractor, threads, [&](const float* row, std::int64_t) {
                return gnb_predict_row(gnb, row);
            });
        const std::vector<std::uint32_t> pixels = mine_errors(
            pred, corpus[i].gt, maps[i], config.pass2_budget, base.fork(2 * i + 1).seed());
        if (pixels.empty()) {
            continue;
        }
        const FeatureMatrix feats = extractor.extract_at(pixels);
        samples.append(feats, maps[i], pixels, static_cast<std::uint32_t>(i));
    }

    PipelineResult result;
    ErtHyperParams hp = config.ert;
    if (config.run_cv) {
        result.cv = cross_validate(samples, default_cv_grid(config.ert), config.seed, threads);
        hp = result.cv->chosen;
    }
    result.model = ert_fit(samples, hp, base.fork(kForestStream).seed(), threads);
    result.importances = feature_importances(result.model);
    result.samples = std::move(samples);
    return result;
}

} // namespace docbin
