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
//
// Brute-force reference implementations used as oracles by the unit and
// acceptance suites. Everything here is written directly from the
// definitions (double loops, explicit region enumeration) and must stay
// independent of the library's optimized paths.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "docbin/image.hpp"

namespace docbin::oracle {

// --- windowed statistics ---------------------------------------------------

inline std::uint64_t rect_sum(const GrayImage& im, int x0, int y0, int x1, int y1) {
    std::uint64_t acc = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            acc += im.at(x, y);
        }
    }
    return acc;
}

inline std::uint64_t rect_sqsum(const GrayImage& im, int x0, int y0, int x1, int y1) {
    std::uint64_t acc = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            acc += static_cast<std::uint64_t>(im.at(x, y)) * im.at(x, y);
        }
    }
    return acc;
}

struct Window {
    int x0, y0, x1, y1; // half-open, clipped
};

inline Window clipped(int x, int y, int w, int h, int width, int height) {
    Window b;
    b.x0 = std::max(0, x - w / 2);
    b.y0 = std::max(0, y - h / 2);
    b.x1 = std::min(width, x + w / 2 + 1);
    b.y1 = std::min(height, y + h / 2 + 1);
    return b;
}

inline double local_mean(const GrayImage& im, int x, int y, int w, int h) {
    const Window b = clipped(x, y, w, h, im.width, im.height);
    double acc = 0.0;
    int n = 0;
    for (int yy = b.y0; yy < b.y1; ++yy) {
        for (int xx = b.x0; xx < b.x1; ++xx) {
            acc += im.at(xx, yy);
            ++n;
        }
    }
    return acc / n;
}

// Numerically stable two-pass standard deviation.
inline double local_std(const GrayImage& im, int x, int y, int w, int h) {
    const Window b = clipped(x, y, w, h, im.width, im.height);
    const double mean = local_mean(im, x, y, w, h);
    double acc = 0.0;
    int n = 0;
    for (int yy = b.y0; yy < b.y1; ++yy) {
        for (int xx = b.x0; xx < b.x1; ++xx) {
            const double d = im.at(xx, yy) - mean;
            acc += d * d;
            ++n;
        }
    }
    return std::sqrt(acc / n);
}

inline void window_min_max(const GrayImage& im, int x, int y, int w, int h,
                           std::uint8_t& lo, std::uint8_t& hi) {
    const Window b = clipped(x, y, w, h, im.width, im.height);
    lo = 255;
    hi = 0;
    for (int yy = b.y0; yy < b.y1; ++yy) {
        for (int xx = b.x0; xx < b.x1; ++xx) {
            lo = std::min(lo, im.at(xx, yy));
            hi = std::max(hi, im.at(xx, yy));
        }
    }
}

// --- Otsu ---------------------------------------------------------------

// Exhaustive scan over all 256 thresholds with the {v < t} / {v >= t}
// partition, per-threshold direct summation.
inline int otsu_exhaustive(const Histogram256& h) {
    int lo = -1, hi = -1;
    for (int v = 0; v < 256; ++v) {
        if (h.bins[v] != 0) {
            if (lo < 0) lo = v;
            hi = v;
        }
    }
    if (lo == hi) {
        return lo;
    }
    int best_t = 0;
    double best_score = -1.0;
    for (int t = 0; t < 256; ++t) {
        std::uint64_t w0 = 0, w1 = 0, sum0 = 0, sum1 = 0;
        for (int v = 0; v < 256; ++v) {
            if (v < t) {
                w0 += h.bins[v];
                sum0 += h.bins[v] * static_cast<std::uint64_t>(v);
            } else {
                w1 += h.bins[v];
                sum1 += h.bins[v] * static_cast<std::uint64_t>(v);
            }
        }
        if (w0 == 0 || w1 == 0) {
            continue;
        }
        const double m0 = static_cast<double>(sum0) / static_cast<double>(w0);
        const double m1 = static_cast<double>(sum1) / static_cast<double>(w1);
        const double d = m0 - m1;
        const double score = static_cast<double>(w0) * static_cast<double>(w1) * d * d;
        if (score > best_score) {
            best_score = score;
            best_t = t;
        }
    }
    return best_t;
}

// --- decision functions ---------------------------------------------------

inline int niblack_label(const GrayImage& im, int x, int y, double k, int window) {
    const double mean = local_mean(im, x, y, window, window);
    const double stddev = local_std(im, x, y, window, window);
    return im.at(x, y) - mean + k * stddev < 0.0 ? 1 : 0;
}

inline int sauvola_label(const GrayImage& im, int x, int y, double k, double S,
                         int window) {
    const double mean = local_mean(im, x, y, window, window);
    const double stddev = local_std(im, x, y, window, window);
    return im.at(x, y) - mean * (1.0 + k * (stddev / S - 1.0)) < 0.0 ? 1 : 0;
}

inline double etni(const GrayImage& im, int x, int y, int window) {
    const double mean = local_mean(im, x, y, window, window);
    const double stddev = local_std(im, x, y, window, window);
    const double v = im.at(x, y);
    if (v > mean || stddev <= 0.0) {
        return 1.0;
    }
    return std::exp((v - mean) / stddev);
}

inline double ltsi(const GrayImage& im, int x, int y, int window, double S) {
    const double mean = local_mean(im, x, y, window, window);
    const double stddev = local_std(im, x, y, window, window);
    if (stddev > S) {
        return 0.0;
    }
    const double v = im.at(x, y);
    const double num = mean == 0.0 ? 0.0 : v / mean - 1.0;
    const double k = num == 0.0 ? 0.0 : num / (stddev - S);
    return 1.0 / (1.0 + std::exp(-k));
}

// --- percentiles / LIP ------------------------------------------------

inline double percentile(const GrayImage& im, int x, int y,
                         const std::vector<std::uint32_t>& region) {
    const int v = im.at(x, y);
    std::uint64_t count = 0;
    for (const std::uint32_t idx : region) {
        if (v >= im.data[idx]) {
            ++count;
        }
    }
    return static_cast<double>(count) / static_cast<double>(region.size());
}

inline double lip(double p, double threshold) {
    if (p <= threshold) {
        return 1.0;
    }
    return std::log(p) / std::log(threshold);
}

inline int round_to_odd(int side) {
    if (side < 3) {
        return 3;
    }
    return side % 2 == 0 ? side + 1 : side;
}

enum class Band { Row, Col, Diag, AntiDiag };

// Explicit pixel enumeration of a full-span directional band of
// round_to_odd(k*s) lines centered at (x, y).
inline std::vector<std::uint32_t> band_region(const GrayImage& im, Band band, int x,
                                              int y, int scale_times_s) {
    const int half = (round_to_odd(scale_times_s) - 1) / 2;
    std::vector<std::uint32_t> region;
    for (int yy = 0; yy < im.height; ++yy) {
        for (int xx = 0; xx < im.width; ++xx) {
            int line = 0, center = 0;
            switch (band) {
            case Band::Row: line = yy; center = y; break;
            case Band::Col: line = xx; center = x; break;
            case Band::Diag: line = xx - yy; center = x - y; break;
            case Band::AntiDiag: line = xx + yy; center = x + y; break;
            }
            if (std::abs(line - center) <= half) {
                region.push_back(static_cast<std::uint32_t>(yy) * im.width + xx);
            }
        }
    }
    return region;
}

// --- LTP / RDI ----------------------------------------------------------

inline double bilinear(const GrayImage& im, double fx, double fy) {
    fx = std::clamp(fx, 0.0, static_cast<double>(im.width - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(im.height - 1));
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, im.width - 1);
    const int y1 = std::min(y0 + 1, im.height - 1);
    const double wx = fx - x0;
    const double wy = fy - y0;
    return (1.0 - wy) * ((1.0 - wx) * im.at(x0, y0) + wx * im.at(x1, y0)) +
           wy * ((1.0 - wx) * im.at(x0, y1) + wx * im.at(x1, y1));
}

struct RdiCounts {
    int zero = 0, minus = 0, plus = 0;
};

inline RdiCounts rdi_counts(const GrayImage& im, int x, int y, double radius,
                            double tol) {
    static const double sq = std::sqrt(0.5);
    const double ux[8] = {1.0, sq, 0.0, -sq, -1.0, -sq, 0.0, sq};
    const double uy[8] = {0.0, sq, 1.0, sq, 0.0, -sq, -1.0, -sq};
    RdiCounts c;
    const double center = im.at(x, y);
    for (int l = 0; l < 8; ++l) {
        const double v = bilinear(im, x + radius * ux[l], y + radius * uy[l]);
        if (v >= center + tol) {
            ++c.plus;
        } else if (v <= center - tol) {
            ++c.minus;
        } else {
            ++c.zero;
        }
    }
    return c;
}

// --- metrics --------------------------------------------------------------

inline double f1(const LabelImage& pred, const LabelImage& gt) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool g = gt.data[i] != 0;
        if (p && g) ++tp;
        else if (p) ++fp;
        else if (g) ++fn;
    }
    if (tp + fp == 0 && tp + fn == 0) {
        return 100.0;
    }
    if (tp + fp == 0 || tp + fn == 0 || tp == 0) {
        return 0.0;
    }
    const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 100.0 * 2.0 * p * r / (p + r);
}

inline double psnr(const LabelImage& pred, const LabelImage& gt) {
    std::uint64_t wrong = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        if ((pred.data[i] != 0) != (gt.data[i] != 0)) {
            ++wrong;
        }
    }
    if (wrong == 0) {
        return 100.0;
    }
    return 10.0 * std::log10(static_cast<double>(pred.data.size()) /
                             static_cast<double>(wrong));
}

// DRD with its own weight table and a direct per-pixel 5x5 scan.
inline double drd(const LabelImage& pred, const LabelImage& gt) {
    std::array<std::array<double, 5>, 5> w{};
    double wsum = 0.0;
    for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
            const double v = (dx == 0 && dy == 0)
                                 ? 0.0
                                 : 1.0 / std::hypot(static_cast<double>(dx), dy);
            w[dy + 2][dx + 2] = v;
            wsum += v;
        }
    }
    std::uint64_t blocks = 0;
    for (int by = 0; by + 8 <= gt.height; by += 8) {
        for (int bx = 0; bx + 8 <= gt.width; bx += 8) {
            bool has0 = false, has1 = false;
            for (int y = by; y < by + 8; ++y) {
                for (int x = bx; x < bx + 8; ++x) {
                    (gt.at(x, y) ? has1 : has0) = true;
                }
            }
            if (has0 && has1) {
                ++blocks;
            }
        }
    }
    double total = 0.0;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            const int p = pred.at(x, y) ? 1 : 0;
            if (p == (gt.at(x, y) ? 1 : 0)) {
                continue;
            }
            for (int dy = -2; dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= gt.width || ny >= gt.height) {
                        continue;
                    }
                    if ((gt.at(nx, ny) ? 1 : 0) != p) {
                        total += w[dy + 2][dx + 2] / wsum;
                    }
                }
            }
        }
    }
    return total / static_cast<double>(blocks);
}

// --- naive Bayes ------------------------------------------------------------

// Closed-form joint log-probability, grouped differently from the
// implementation (log of each factor separately).
inline double gnb_log_joint(double prior, const std::vector<double>& mean,
                            const std::vector<double>& var, const float* row, int dim) {
    double acc = std::log(prior);
    for (int f = 0; f < dim; ++f) {
        acc += -0.5 * std::log(2.0 * 3.14159265358979323846 * var[f]);
        acc += -0.5 * (row[f] - mean[f]) * (row[f] - mean[f]) / var[f];
    }
    return acc;
}

} // namespace docbin::oracle
