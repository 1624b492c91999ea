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

#include "docbin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "docbin/io.hpp"

namespace docbin {

namespace {

void require_same_dims(const LabelImage& a, const LabelImage& b, const char* what) {
    if (a.width != b.width || a.height != b.height) {
        throw DataError(std::string(what) + ": dimension mismatch");
    }
}

// 5x5 inverse-distance weights, zero at the center, normalized to sum 1.
const double* drd_weights() {
    static const std::array<double, 25> w = [] {
        std::array<double, 25> m{};
        double sum = 0.0;
        for (int dy = -2; dy <= 2; ++dy) {
            for (int dx = -2; dx <= 2; ++dx) {
                const double v =
                    (dx == 0 && dy == 0) ? 0.0 : 1.0 / std::sqrt(double(dx * dx + dy * dy));
                m[(dy + 2) * 5 + (dx + 2)] = v;
                sum += v;
            }
        }
        for (double& v : m) {
            v /= sum;
        }
        return m;
    }();
    return w.data();
}

} // namespace

ConfusionCounts confusion(const LabelImage& pred, const LabelImage& gt) {
    require_same_dims(pred, gt, "confusion");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool g = gt.data[i] != 0;
        if (p && g) ++c.tp;
        else if (p && !g) ++c.fp;
        else if (!p && g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double f1_from_counts(const ConfusionCounts& c) {
    if (c.tp + c.fp == 0 && c.tp + c.fn == 0) {
        return 100.0; // both foregrounds empty: perfect agreement
    }
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0 || c.tp == 0) {
        return 0.0;
    }
    const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return 100.0 * 2.0 * p * r / (p + r);
}

double f1_percent(const LabelImage& pred, const LabelImage& gt) {
    return f1_from_counts(confusion(pred, gt));
}

double psnr_db(const LabelImage& pred, const LabelImage& gt) {
    require_same_dims(pred, gt, "psnr");
    std::uint64_t wrong = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        wrong += (pred.data[i] != 0) != (gt.data[i] != 0) ? 1 : 0;
    }
    if (wrong == 0) {
        return 100.0;
    }
    return 10.0 * std::log10(static_cast<double>(pred.data.size()) /
                             static_cast<double>(wrong));
}

std::uint64_t nubn(const LabelImage& gt) {
    std::uint64_t count = 0;
    for (int by = 0; by + 8 <= gt.height; by += 8) {
        for (int bx = 0; bx + 8 <= gt.width; bx += 8) {
            bool has0 = false, has1 = false;
            for (int y = by; y < by + 8 && !(has0 && has1); ++y) {
                for (int x = bx; x < bx + 8; ++x) {
                    (gt.at(x, y) ? has1 : has0) = true;
                }
            }
            if (has0 && has1) {
                ++count;
            }
        }
    }
    return count;
}

double drd(const LabelImage& pred, const LabelImage& gt) {
    require_same_dims(pred, gt, "drd");
    const std::uint64_t blocks = nubn(gt);
    if (blocks == 0) {
        throw MetricError("drd: undefined, ground truth has no non-uniform 8x8 block");
    }
    const double* w = drd_weights();
    double total = 0.0;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            const std::uint8_t p = pred.at(x, y) ? 1 : 0;
            if (p == (gt.at(x, y) ? 1 : 0)) {
                continue;
            }
            // Neighbors outside the image contribute nothing.
            double dk = 0.0;
            for (int dy = -2; dy <= 2; ++dy) {
                const int ny = y + dy;
                if (ny < 0 || ny >= gt.height) {
                    continue;
                }
                for (int dx = -2; dx <= 2; ++dx) {
                    const int nx = x + dx;
                    if (nx < 0 || nx >= gt.width) {
                        continue;
                    }
                    const std::uint8_t g = gt.at(nx, ny) ? 1 : 0;
                    if (g != p) {
                        dk += w[(dy + 2) * 5 + (dx + 2)];
                    }
                }
            }
            total += dk;
        }
    }
    return total / static_cast<double>(blocks);
}

void EvalReport::finalize() {
    mean_f1 = mean_psnr = mean_drd = 0.0;
    if (images.empty()) {
        return;
    }
    std::size_t drd_count = 0;
    for (const ImageEval& e : images) {
        mean_f1 += e.f1;
        mean_psnr += e.psnr;
        if (e.drd_defined) {
            mean_drd += e.drd;
            ++drd_count;
        }
    }
    mean_f1 /= static_cast<double>(images.size());
    mean_psnr /= static_cast<double>(images.size());
    mean_drd = drd_count > 0 ? mean_drd / static_cast<double>(drd_count) : 0.0;
}

EvalReport evaluate_pairs(const std::vector<std::string>& names,
                          const std::vector<LabelImage>& preds,
                          const std::vector<LabelImage>& gts) {
    if (names.size() != preds.size() || names.size() != gts.size()) {
        throw DataError("evaluate_pairs: list sizes differ");
    }
    EvalReport report;
    for (std::size_t i = 0; i < names.size(); ++i) {
        ImageEval e;
        e.name = names[i];
        const ConfusionCounts c = confusion(preds[i], gts[i]);
        e.tp = c.tp;
        e.fp = c.fp;
        e.fn = c.fn;
        e.f1 = f1_from_counts(c);
        e.psnr = psnr_db(preds[i], gts[i]);
        try {
            e.drd = drd(preds[i], gts[i]);
        } catch (const MetricError&) {
            e.drd_defined = false;
        }
        report.images.push_back(std::move(e));
    }
    report.finalize();
    return report;
}

EvalReport evaluate_corpus(const std::filesystem::path& pred_dir,
                           const std::filesystem::path& gt_dir,
                           std::vector<std::string>* unmatched) {
    namespace fs = std::filesystem;
    auto collect = [](const fs::path& dir) {
        if (!fs::is_directory(dir)) {
            throw DataError("not a directory: " + dir.string());
        }
        std::map<std::string, fs::path> by_stem;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) {
                continue;
            }
            by_stem[entry.path().stem().string()] = entry.path();
        }
        return by_stem;
    };
    const auto preds = collect(pred_dir);
    const auto gts = collect(gt_dir);

    std::vector<std::string> names;
    std::vector<LabelImage> pred_images, gt_images;
    for (const auto& [stem, path] : preds) {
        const auto it = gts.find(stem);
        if (it == gts.end()) {
            if (unmatched) {
                unmatched->push_back("pred:" + stem);
            }
            continue;
        }
        names.push_back(stem);
        pred_images.push_back(load_label_image(path));
        gt_images.push_back(load_label_image(it->second));
    }
    for (const auto& [stem, path] : gts) {
        if (!preds.count(stem) && unmatched) {
            unmatched->push_back("gt:" + stem);
        }
    }
    if (names.empty()) {
        std::string msg = "evaluate_corpus: no matching filename pairs";
        if (unmatched && !unmatched->empty()) {
            msg += " (unmatched:";
            for (const std::string& u : *unmatched) {
                msg += " " + u;
            }
            msg += ")";
        }
        throw DataError(msg);
    }
    return evaluate_pairs(names, pred_images, gt_images);
}

} // namespace docbin
