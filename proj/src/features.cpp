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

#include "docbin/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "docbin/parallel.hpp"
#include "docbin/thresholders.hpp"

namespace docbin {

namespace {

constexpr int kScaleFactors[4] = {1, 2, 4, 8};
constexpr double kSqrtHalf = 0.70710678118654752440;

// Channel layout offsets (see FeatureSchema ordering).
constexpr int kOffLocalInt = 0;
constexpr int kOffOtsuDiff = 1;
constexpr int kOffLocalAvg = 2;
constexpr int kOffLocalStd = 6;
constexpr int kOffSu = 10;
constexpr int kOffHowe = 14;
constexpr int kOffEtni = 18;
constexpr int kOffLtsi = 22;
constexpr int kOffLip = 26;  // 18 channels
constexpr int kOffRdi = 44;  // 30 channels
constexpr int kOffGlobalStat = 74;
constexpr int kOffGlobalHist = 78; // 64 channels
constexpr int kTotalDim = 142;

std::uint64_t fnv1a64(const std::string& s, std::uint64_t h) {
    for (const char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

const char* family_name(FeatureFamily f) {
    switch (f) {
    case FeatureFamily::LocalInt: return "local_int";
    case FeatureFamily::OtsuDiff: return "otsu_diff";
    case FeatureFamily::LocalAvg: return "local_avg";
    case FeatureFamily::LocalStd: return "local_std";
    case FeatureFamily::Su: return "su";
    case FeatureFamily::Howe: return "howe";
    case FeatureFamily::Etni: return "etni";
    case FeatureFamily::Ltsi: return "ltsi";
    case FeatureFamily::Lip: return "lip";
    case FeatureFamily::Rdi: return "rdi";
    case FeatureFamily::GlobalStat: return "global_stat";
    case FeatureFamily::GlobalHist: return "global_hist";
    }
    return "?";
}

FeatureSchema::FeatureSchema() {
    auto add = [this](FeatureFamily fam, const std::string& scale,
                      const std::string& norm, const std::string& name) {
        entries_.push_back(Entry{fam, scale, norm, name});
    };
    static const char* kS[4] = {"1s", "2s", "4s", "8s"};
    static const char* kSuScales[4] = {"1", "1s", "2s", "4s"};

    add(FeatureFamily::LocalInt, "n/a", "div255", "local_int");
    add(FeatureFamily::OtsuDiff, "n/a", "div255", "otsu_diff");
    for (int k = 0; k < 4; ++k) {
        add(FeatureFamily::LocalAvg, kS[k], "div255", std::string("local_avg_") + kS[k]);
    }
    for (int k = 0; k < 4; ++k) {
        add(FeatureFamily::LocalStd, kS[k], "div255", std::string("local_std_") + kS[k]);
    }
    for (int k = 0; k < 4; ++k) {
        add(FeatureFamily::Su, kSuScales[k], "minmax", std::string("su_") + kSuScales[k]);
    }
    for (int k = 0; k < 4; ++k) {
        add(FeatureFamily::Howe, kSuScales[k], "minmax", std::string("howe_") + kSuScales[k]);
    }
    for (int k = 0; k < 4; ++k) {
        add(FeatureFamily::Etni, kS[k], "none", std::string("etni_") + kS[k]);
    }
    for (int k = 0; k < 4; ++k) {
        add(FeatureFamily::Ltsi, kS[k], "none", std::string("ltsi_") + kS[k]);
    }
    add(FeatureFamily::Lip, "1", "none", "lip_global");
    static const char* kDirs[4] = {"row", "col", "diag", "adiag"};
    for (int d = 0; d < 4; ++d) {
        for (int k = 0; k < 4; ++k) {
            add(FeatureFamily::Lip, kS[k], "none",
                std::string("lip_") + kDirs[d] + "_" + kS[k]);
        }
    }
    add(FeatureFamily::Lip, "max", "none", "lip_max");
    static const char* kRadii[5] = {"1", "1s", "2s", "4s", "8s"};
    static const char* kRdiKinds[6] = {"f0", "fm1", "fp1", "rp1", "rm1", "r0"};
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 6; ++c) {
            add(FeatureFamily::Rdi, kRadii[r], "none",
                std::string("rdi_") + kRadii[r] + "_" + kRdiKinds[c]);
        }
    }
    add(FeatureFamily::GlobalStat, "n/a", "div255", "global_int_mean");
    add(FeatureFamily::GlobalStat, "n/a", "div255", "global_int_std");
    add(FeatureFamily::GlobalStat, "n/a", "none", "global_perc_mean");
    add(FeatureFamily::GlobalStat, "n/a", "none", "global_perc_std");
    for (int b = 0; b < 32; ++b) {
        char name[40];
        std::snprintf(name, sizeof(name), "global_int_loghist_%02d", b);
        add(FeatureFamily::GlobalHist, "n/a", "none", name);
    }
    for (int b = 0; b < 32; ++b) {
        char name[40];
        std::snprintf(name, sizeof(name), "global_perc_loghist_%02d", b);
        add(FeatureFamily::GlobalHist, "n/a", "none", name);
    }

    std::uint64_t h = 0xCBF29CE484222325ULL;
    h = fnv1a64("docbin-feature-schema-v1", h);
    for (const Entry& e : entries_) {
        h = fnv1a64(family_name(e.family), h);
        h = fnv1a64("|" + e.scale_tag + "|" + e.norm_tag + "|" + e.name + ";", h);
    }
    fingerprint_ = h;
}

const FeatureSchema& FeatureSchema::instance() {
    static const FeatureSchema schema;
    return schema;
}

std::pair<int, int> FeatureSchema::family_span(FeatureFamily f) const {
    int offset = -1;
    int count = 0;
    for (int i = 0; i < total_dim(); ++i) {
        if (entries_[static_cast<std::size_t>(i)].family == f) {
            if (offset < 0) {
                offset = i;
            }
            ++count;
        }
    }
    return {offset, count};
}

int FeatureSchema::index_of(const std::string& name) const {
    for (int i = 0; i < total_dim(); ++i) {
        if (entries_[static_cast<std::size_t>(i)].name == name) {
            return i;
        }
    }
    return -1;
}

// ---------------------------------------------------------------------------
// PercentileRegion / ltp_code
// ---------------------------------------------------------------------------

PercentileRegion::PercentileRegion(const GrayImage& im,
                                   std::span<const std::uint32_t> region_indices) {
    if (region_indices.empty()) {
        throw DataError("PercentileRegion: region must be nonempty");
    }
    std::array<std::uint64_t, 256> hist{};
    for (const std::uint32_t idx : region_indices) {
        ++hist[im.data[idx]];
    }
    std::uint64_t acc = 0;
    for (int v = 0; v < 256; ++v) {
        acc += hist[v];
        cum_[v] = acc;
    }
    count_ = acc;
}

namespace {

struct CircleOffsets {
    double dx[8];
    double dy[8];
};

// Exact unit offsets at angle pi*l/4; axis entries are exact 0/1 so the
// four on-axis neighbors sample integer coordinates.
CircleOffsets circle_offsets(double radius) {
    static const double ux[8] = {1.0, kSqrtHalf, 0.0, -kSqrtHalf,
                                 -1.0, -kSqrtHalf, 0.0, kSqrtHalf};
    static const double uy[8] = {0.0, kSqrtHalf, 1.0, kSqrtHalf,
                                 0.0, -kSqrtHalf, -1.0, -kSqrtHalf};
    CircleOffsets o;
    for (int l = 0; l < 8; ++l) {
        o.dx[l] = radius * ux[l];
        o.dy[l] = radius * uy[l];
    }
    return o;
}

double bilinear_clamped(const GrayImage& im, double fx, double fy) {
    fx = std::clamp(fx, 0.0, static_cast<double>(im.width - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(im.height - 1));
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const int x1 = x0 + 1 < im.width ? x0 + 1 : x0;
    const int y1 = y0 + 1 < im.height ? y0 + 1 : y0;
    const double wx = fx - x0;
    const double wy = fy - y0;
    return (1.0 - wy) * ((1.0 - wx) * im.at(x0, y0) + wx * im.at(x1, y0)) +
           wy * ((1.0 - wx) * im.at(x0, y1) + wx * im.at(x1, y1));
}

inline int ternary_code(double neighbor, double center, double tol) {
    if (neighbor >= center + tol) {
        return 1;
    }
    if (neighbor <= center - tol) {
        return -1;
    }
    return 0;
}

} // namespace

int ltp_code(const GrayImage& im, int x, int y, int neighbor, double radius,
             double tol) {
    const CircleOffsets o = circle_offsets(radius);
    const double v = bilinear_clamped(im, x + o.dx[neighbor], y + o.dy[neighbor]);
    return ternary_code(v, im.at(x, y), tol);
}

// ---------------------------------------------------------------------------
// Stroke width
// ---------------------------------------------------------------------------

namespace {

// Appends lengths of foreground runs whose both ends touch high-contrast
// pixels; `stride`/`n` walk one row or one column.
void collect_runs(const std::uint8_t* fg, const std::uint8_t* edge,
                  std::size_t base, std::size_t stride, int n,
                  std::vector<std::uint32_t>& lengths) {
    int run_start = -1;
    for (int i = 0; i <= n; ++i) {
        const bool in_fg = i < n && fg[base + stride * i] != 0;
        if (in_fg && run_start < 0) {
            run_start = i;
        }
        if (!in_fg && run_start >= 0) {
            const int run_end = i - 1;
            auto is_edge = [&](int j) { return edge[base + stride * j] != 0; };
            const bool start_ok =
                is_edge(run_start) || (run_start > 0 && is_edge(run_start - 1));
            const bool end_ok =
                is_edge(run_end) || (run_end + 1 < n && is_edge(run_end + 1));
            if (start_ok && end_ok) {
                lengths.push_back(static_cast<std::uint32_t>(run_end - run_start + 1));
            }
            run_start = -1;
        }
    }
}

} // namespace

StrokeWidth estimate_stroke_width(const GrayImage& im, const FeatureConfig& cfg) {
    if (cfg.stroke_width_override > 0) {
        return StrokeWidth{cfg.stroke_width_override};
    }
    const int cap = std::max(1, std::min(im.width, im.height) / 4);

    // High-contrast mask: Otsu split of the quantized 3x3 contrast map.
    std::vector<std::uint8_t> minm, maxm;
    window_min_max(im, 3, 3, minm, maxm);
    GrayImage contrast = GrayImage::create(im.width, im.height);
    for (std::size_t i = 0; i < im.size(); ++i) {
        const double c = su_contrast(minm[i], maxm[i], cfg.eps_su);
        contrast.data[i] = static_cast<std::uint8_t>(std::lround(c * 255.0));
    }
    const int cth = otsu_threshold(histogram(contrast));
    std::vector<std::uint8_t> edge(im.size());
    for (std::size_t i = 0; i < im.size(); ++i) {
        edge[i] = contrast.data[i] >= cth ? 1 : 0;
    }

    const LabelImage fg = binarize_otsu(im);

    // Stroke crossings show up as short runs in one of the two axes, so
    // both are pooled before taking the mode.
    std::vector<std::uint32_t> lengths;
    for (int y = 0; y < im.height; ++y) {
        collect_runs(fg.data.data(), edge.data(),
                     static_cast<std::size_t>(y) * im.width, 1, im.width, lengths);
    }
    for (int x = 0; x < im.width; ++x) {
        collect_runs(fg.data.data(), edge.data(), static_cast<std::size_t>(x),
                     static_cast<std::size_t>(im.width), im.height, lengths);
    }
    if (lengths.empty()) {
        return StrokeWidth{1};
    }
    std::map<std::uint32_t, std::uint64_t> freq;
    for (const std::uint32_t len : lengths) {
        ++freq[len];
    }
    std::uint32_t mode = 1;
    std::uint64_t best = 0;
    for (const auto& [len, count] : freq) { // ascending keys: ties -> smaller
        if (count > best) {
            best = count;
            mode = len;
        }
    }
    const int s = std::clamp(static_cast<int>(mode), 1, cap);
    return StrokeWidth{s};
}

// ---------------------------------------------------------------------------
// Directional percentile tables
// ---------------------------------------------------------------------------

namespace {

// One direction's per-line cumulative histograms for the four band scales.
// perc(pixel) = band_cum[line][intensity] / band_count[line], O(1) per query.
struct DirectionTables {
    int num_lines = 0;
    // For each scale: num_lines x 256 inclusive cumulative counts.
    std::array<std::vector<std::uint32_t>, 4> band_cum;
    std::array<std::vector<std::uint32_t>, 4> band_count;

    double percentile(int scale, int line, std::uint8_t v) const {
        const std::vector<std::uint32_t>& cum = band_cum[scale];
        return static_cast<double>(cum[static_cast<std::size_t>(line) * 256 + v]) /
               static_cast<double>(band_count[scale][line]);
    }
};

enum class Direction { Row, Col, Diag, AntiDiag };

int line_count(Direction d, int w, int h) {
    switch (d) {
    case Direction::Row: return h;
    case Direction::Col: return w;
    default: return w + h - 1;
    }
}

inline int line_of(Direction d, int x, int y, int h) {
    switch (d) {
    case Direction::Row: return y;
    case Direction::Col: return x;
    case Direction::Diag: return x - y + (h - 1); // constant x - y
    default: return x + y;                        // constant x + y
    }
}

DirectionTables build_direction(const GrayImage& im, Direction d,
                                const int band_half[4]) {
    const int L = line_count(d, im.width, im.height);
    // Per-line histograms, then an in-place prefix over lines.
    std::vector<std::uint32_t> prefix(static_cast<std::size_t>(L + 1) * 256, 0);
    for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x) {
            const int l = line_of(d, x, y, im.height);
            ++prefix[(static_cast<std::size_t>(l) + 1) * 256 + im.at(x, y)];
        }
    }
    for (int l = 1; l <= L; ++l) {
        std::uint32_t* cur = &prefix[static_cast<std::size_t>(l) * 256];
        const std::uint32_t* prev = &prefix[static_cast<std::size_t>(l - 1) * 256];
        for (int v = 0; v < 256; ++v) {
            cur[v] += prev[v];
        }
    }
    DirectionTables t;
    t.num_lines = L;
    for (int k = 0; k < 4; ++k) {
        t.band_cum[k].resize(static_cast<std::size_t>(L) * 256);
        t.band_count[k].resize(static_cast<std::size_t>(L));
        const int half = band_half[k];
        for (int l = 0; l < L; ++l) {
            const int lo = std::max(0, l - half);
            const int hi = std::min(L - 1, l + half);
            const std::uint32_t* top = &prefix[static_cast<std::size_t>(hi + 1) * 256];
            const std::uint32_t* bot = &prefix[static_cast<std::size_t>(lo) * 256];
            std::uint32_t* out = &t.band_cum[k][static_cast<std::size_t>(l) * 256];
            std::uint32_t acc = 0;
            for (int v = 0; v < 256; ++v) {
                acc += top[v] - bot[v];
                out[v] = acc;
            }
            t.band_count[k][l] = acc;
        }
    }
    return t;
}

} // namespace

// ---------------------------------------------------------------------------
// FeatureExtractor
// ---------------------------------------------------------------------------

struct FeatureExtractor::Impl {
    GrayImage image;
    FeatureConfig cfg;
    int gth = 0;
    int s = 1;

    int stat_sides[4];  // local avg/std + ETNI/LTSI windows: 1s,2s,4s,8s
    int su_sides[4];    // Su windows: scale "1" -> 3x3, then 1s,2s,4s
    int howe_sides[4];  // Howe: scale "1" -> raw image (side 1), then 1s,2s,4s

    IntegralPair ip;
    // Min/max maps per Su scale (maps shared between equal sides).
    std::array<const std::vector<std::uint8_t>*, 4> su_min{};
    std::array<const std::vector<std::uint8_t>*, 4> su_max{};
    std::map<int, std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>> minmax_cache;
    // Local-mean maps for the Howe Laplacian (side > 1).
    std::map<int, std::vector<double>> mean_maps;

    double su_lo[4], su_hi[4];     // per-channel MinMax range
    double howe_lo[4], howe_hi[4];

    DirectionTables dir_tables[4];
    std::array<double, 256> lip_global_lut{};
    std::array<double, 256> global_perc_lut{};

    double rdi_radius[5];

    GlobalFeatures globals;

    explicit Impl(const GrayImage& im, const FeatureConfig& config)
        : image(im), cfg(config) {
        if (!image.valid()) {
            throw DataError("FeatureExtractor: invalid image");
        }
        if (image.size() > static_cast<std::size_t>(std::numeric_limits<std::uint32_t>::max())) {
            throw DataError("FeatureExtractor: image too large");
        }
        gth = otsu_threshold(histogram(image));
        s = estimate_stroke_width(image, cfg).s;

        for (int k = 0; k < 4; ++k) {
            stat_sides[k] = odd_window(kScaleFactors[k] * s);
        }
        su_sides[0] = 3;
        howe_sides[0] = 1;
        for (int k = 1; k < 4; ++k) {
            su_sides[k] = odd_window(kScaleFactors[k - 1] * s);
            howe_sides[k] = odd_window(kScaleFactors[k - 1] * s);
        }

        ip = integral(image);
        for (int k = 0; k < 4; ++k) {
            auto it = minmax_cache.find(su_sides[k]);
            if (it == minmax_cache.end()) {
                std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> maps;
                window_min_max(image, su_sides[k], su_sides[k], maps.first, maps.second);
                it = minmax_cache.emplace(su_sides[k], std::move(maps)).first;
            }
            su_min[k] = &it->second.first;
            su_max[k] = &it->second.second;
        }
        for (int k = 1; k < 4; ++k) {
            if (!mean_maps.count(howe_sides[k])) {
                std::vector<double> m(image.size());
                for (int y = 0; y < image.height; ++y) {
                    for (int x = 0; x < image.width; ++x) {
                        m[static_cast<std::size_t>(y) * image.width + x] =
                            local_mean(ip, x, y, howe_sides[k], howe_sides[k]);
                    }
                }
                mean_maps.emplace(howe_sides[k], std::move(m));
            }
        }

        // MinMax normalization ranges for Su/Howe need a full-image pass.
        for (int k = 0; k < 4; ++k) {
            su_lo[k] = std::numeric_limits<double>::infinity();
            su_hi[k] = -std::numeric_limits<double>::infinity();
            howe_lo[k] = su_lo[k];
            howe_hi[k] = su_hi[k];
        }
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                for (int k = 0; k < 4; ++k) {
                    const double suv = su_raw(x, y, k);
                    su_lo[k] = std::min(su_lo[k], suv);
                    su_hi[k] = std::max(su_hi[k], suv);
                    const double hv = howe_raw(x, y, k);
                    howe_lo[k] = std::min(howe_lo[k], hv);
                    howe_hi[k] = std::max(howe_hi[k], hv);
                }
            }
        }

        int band_half[4];
        for (int k = 0; k < 4; ++k) {
            band_half[k] = (odd_window(kScaleFactors[k] * s) - 1) / 2;
        }
        for (int d = 0; d < 4; ++d) {
            dir_tables[d] = build_direction(image, static_cast<Direction>(d), band_half);
        }

        rdi_radius[0] = 1.0;
        for (int k = 0; k < 4; ++k) {
            rdi_radius[k + 1] = static_cast<double>(kScaleFactors[k] * s);
        }

        build_globals();
    }

    double su_raw(int x, int y, int k) const {
        const std::size_t i = static_cast<std::size_t>(y) * image.width + x;
        return su_contrast((*su_min[k])[i], (*su_max[k])[i], cfg.eps_su);
    }

    // 4-neighbor Laplacian with border replication of the smoothed map
    // (raw image for scale "1").
    double howe_raw(int x, int y, int k) const {
        const int xl = x > 0 ? x - 1 : 0;
        const int xr = x + 1 < image.width ? x + 1 : image.width - 1;
        const int yu = y > 0 ? y - 1 : 0;
        const int yd = y + 1 < image.height ? y + 1 : image.height - 1;
        if (howe_sides[k] == 1) {
            return static_cast<double>(image.at(xl, y)) + image.at(xr, y) +
                   image.at(x, yu) + image.at(x, yd) - 4.0 * image.at(x, y);
        }
        const std::vector<double>& m = mean_maps.at(howe_sides[k]);
        auto at = [&](int mx, int my) {
            return m[static_cast<std::size_t>(my) * image.width + mx];
        };
        return at(xl, y) + at(xr, y) + at(x, yu) + at(x, yd) - 4.0 * at(x, y);
    }

    static double minmax_norm(double v, double lo, double hi) {
        return hi > lo ? (v - lo) / (hi - lo) : 0.0;
    }

    void build_globals() {
        const Histogram256 h = histogram(image);
        const double n = static_cast<double>(h.total);
        double sum = 0.0, sq = 0.0;
        for (int v = 0; v < 256; ++v) {
            sum += static_cast<double>(h.bins[v]) * v;
            sq += static_cast<double>(h.bins[v]) * v * v;
        }
        const double mean = sum / n;
        const double var = std::max(0.0, sq / n - mean * mean);
        globals.int_mean = mean / 255.0;
        globals.int_std = std::sqrt(var) / 255.0;

        // Whole-image percentile takes at most 256 values; everything about
        // the percentile image follows from the intensity histogram.
        std::uint64_t acc = 0;
        for (int v = 0; v < 256; ++v) {
            acc += h.bins[v];
            global_perc_lut[v] = static_cast<double>(acc) / n;
            lip_global_lut[v] = lip_value(global_perc_lut[v], cfg.lip_percentile_threshold);
        }
        double pm = 0.0, pq = 0.0;
        std::array<double, 32> phist{};
        for (int v = 0; v < 256; ++v) {
            if (h.bins[v] == 0) {
                continue;
            }
            const double w = static_cast<double>(h.bins[v]);
            const double p = global_perc_lut[v];
            pm += w * p;
            pq += w * p * p;
            const int bin = std::min(31, static_cast<int>(p * 32.0));
            phist[bin] += w;
        }
        globals.perc_mean = pm / n;
        globals.perc_std = std::sqrt(std::max(0.0, pq / n - globals.perc_mean * globals.perc_mean));

        std::array<double, 32> ihist{};
        for (int v = 0; v < 256; ++v) {
            ihist[v >> 3] += static_cast<double>(h.bins[v]);
        }
        globals.int_loghist = log_histogram(ihist, n);
        globals.perc_loghist = log_histogram(phist, n);
    }

    // Normalize to sum 1, apply log2(1 + h), renormalize.
    static std::array<double, 32> log_histogram(const std::array<double, 32>& counts,
                                                double total) {
        std::array<double, 32> out{};
        double sum = 0.0;
        for (int b = 0; b < 32; ++b) {
            out[b] = std::log2(1.0 + counts[b] / total);
            sum += out[b];
        }
        for (int b = 0; b < 32; ++b) {
            out[b] /= sum;
        }
        return out;
    }

    void extract_pixel(int x, int y, float* out) const {
        const double v = image.at(x, y);
        out[kOffLocalInt] = static_cast<float>(v / 255.0);
        out[kOffOtsuDiff] = static_cast<float>((v - gth) / 255.0);

        for (int k = 0; k < 4; ++k) {
            double mean, stddev;
            local_mean_std(ip, x, y, stat_sides[k], stat_sides[k], mean, stddev);
            out[kOffLocalAvg + k] = static_cast<float>(mean / 255.0);
            out[kOffLocalStd + k] = static_cast<float>(stddev / 255.0);
            out[kOffEtni + k] = static_cast<float>(etni_value(v, mean, stddev));
            out[kOffLtsi + k] =
                static_cast<float>(ltsi_value(v, mean, stddev, cfg.sauvola_dynamic_range));
        }
        for (int k = 0; k < 4; ++k) {
            out[kOffSu + k] =
                static_cast<float>(minmax_norm(su_raw(x, y, k), su_lo[k], su_hi[k]));
            out[kOffHowe + k] =
                static_cast<float>(minmax_norm(howe_raw(x, y, k), howe_lo[k], howe_hi[k]));
        }

        const std::uint8_t iv = image.at(x, y);
        out[kOffLip] = static_cast<float>(lip_global_lut[iv]);
        double pmax = 0.0;
        for (int d = 0; d < 4; ++d) {
            const int line = line_of(static_cast<Direction>(d), x, y, image.height);
            for (int k = 0; k < 4; ++k) {
                const double p = dir_tables[d].percentile(k, line, iv);
                pmax = std::max(pmax, p);
                out[kOffLip + 1 + d * 4 + k] =
                    static_cast<float>(lip_value(p, cfg.lip_percentile_threshold));
            }
        }
        out[kOffLip + 17] = static_cast<float>(lip_value(pmax, cfg.lip_percentile_threshold));

        for (int r = 0; r < 5; ++r) {
            const CircleOffsets off = circle_offsets(rdi_radius[r]);
            int n0 = 0, nm = 0, np = 0;
            for (int l = 0; l < 8; ++l) {
                const double nv = bilinear_clamped(image, x + off.dx[l], y + off.dy[l]);
                const int code = ternary_code(nv, v, cfg.ltp_tol);
                if (code > 0) {
                    ++np;
                } else if (code < 0) {
                    ++nm;
                } else {
                    ++n0;
                }
            }
            auto ratio = [](int a, int b) {
                return b == 0 ? 0.0 : static_cast<double>(a) / b;
            };
            float* rc = out + kOffRdi + r * 6;
            rc[0] = static_cast<float>(n0 / 8.0);
            rc[1] = static_cast<float>(nm / 8.0);
            rc[2] = static_cast<float>(np / 8.0);
            rc[3] = static_cast<float>(ratio(np, n0 + np));
            rc[4] = static_cast<float>(ratio(nm, nm + np));
            rc[5] = static_cast<float>(ratio(n0, nm + n0));
        }

        out[kOffGlobalStat + 0] = static_cast<float>(globals.int_mean);
        out[kOffGlobalStat + 1] = static_cast<float>(globals.int_std);
        out[kOffGlobalStat + 2] = static_cast<float>(globals.perc_mean);
        out[kOffGlobalStat + 3] = static_cast<float>(globals.perc_std);
        for (int b = 0; b < 32; ++b) {
            out[kOffGlobalHist + b] = static_cast<float>(globals.int_loghist[b]);
            out[kOffGlobalHist + 32 + b] = static_cast<float>(globals.perc_loghist[b]);
        }
    }
};

FeatureExtractor::FeatureExtractor(const GrayImage& im, const FeatureConfig& cfg)
    : impl_(std::make_unique<Impl>(im, cfg)) {}

FeatureExtractor::~FeatureExtractor() = default;
FeatureExtractor::FeatureExtractor(FeatureExtractor&&) noexcept = default;
FeatureExtractor& FeatureExtractor::operator=(FeatureExtractor&&) noexcept = default;

int FeatureExtractor::width() const { return impl_->image.width; }
int FeatureExtractor::height() const { return impl_->image.height; }
int FeatureExtractor::stroke_width() const { return impl_->s; }
int FeatureExtractor::otsu() const { return impl_->gth; }
const GlobalFeatures& FeatureExtractor::global_features() const { return impl_->globals; }
const FeatureSchema& FeatureExtractor::schema() const { return FeatureSchema::instance(); }

void FeatureExtractor::extract_pixel(int x, int y, float* out) const {
    impl_->extract_pixel(x, y, out);
}

void FeatureExtractor::extract_row(int y, float* out) const {
    const int w = impl_->image.width;
    for (int x = 0; x < w; ++x) {
        impl_->extract_pixel(x, y, out + static_cast<std::size_t>(x) * kTotalDim);
    }
}

FeatureMatrix FeatureExtractor::extract_at(std::span<const std::uint32_t> pixel_indices) const {
    FeatureMatrix m;
    m.dim = kTotalDim;
    m.schema_fingerprint = FeatureSchema::instance().fingerprint();
    m.values.resize(pixel_indices.size() * kTotalDim);
    const int w = impl_->image.width;
    for (std::size_t r = 0; r < pixel_indices.size(); ++r) {
        const std::uint32_t idx = pixel_indices[r];
        impl_->extract_pixel(static_cast<int>(idx % w), static_cast<int>(idx / w),
                             &m.values[r * kTotalDim]);
    }
    return m;
}

FeatureMatrix FeatureExtractor::extract_all(int threads) const {
    FeatureMatrix m;
    m.dim = kTotalDim;
    m.schema_fingerprint = FeatureSchema::instance().fingerprint();
    const int w = impl_->image.width;
    const int h = impl_->image.height;
    m.values.resize(static_cast<std::size_t>(w) * h * kTotalDim);
    parallel_for(0, h, threads, [&](std::int64_t y) {
        float* row = &m.values[static_cast<std::size_t>(y) * w * kTotalDim];
        for (int x = 0; x < w; ++x) {
            impl_->extract_pixel(x, static_cast<int>(y), row + static_cast<std::size_t>(x) * kTotalDim);
        }
    });
    return m;
}

std::vector<float> FeatureExtractor::channel_map(int channel, int threads) const {
    if (channel < 0 || channel >= kTotalDim) {
        throw DataError("channel_map: channel index out of range");
    }
    const int w = impl_->image.width;
    const int h = impl_->image.height;
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    parallel_for(0, h, threads, [&](std::int64_t y) {
        std::vector<float> row(kTotalDim);
        for (int x = 0; x < w; ++x) {
            impl_->extract_pixel(x, static_cast<int>(y), row.data());
            out[static_cast<std::size_t>(y) * w + x] = row[channel];
        }
    });
    return out;
}

FeatureMatrix extract_features(const GrayImage& im, const FeatureConfig& cfg, int threads) {
    return FeatureExtractor(im, cfg).extract_all(threads);
}

FeatureMatrix extract_features_at(const GrayImage& im,
                                  std::span<const std::uint32_t> pixel_indices,
                                  const FeatureConfig& cfg) {
    return FeatureExtractor(im, cfg).extract_at(pixel_indices);
}

} // namespace docbin
