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

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "docbin/image.hpp"

namespace docbin {

enum class FeatureFamily : std::uint8_t {
    LocalInt,
    OtsuDiff,
    LocalAvg,
    LocalStd,
    Su,
    Howe,
    Etni,
    Ltsi,
    Lip,
    Rdi,
    GlobalStat,
    GlobalHist,
};

const char* family_name(FeatureFamily f);

/// Ordered catalog of the 142 per-pixel feature channels. The order is
/// fixed and versioned; the fingerprint is embedded in sample files and
/// models so a train/predict schema mismatch is detected instead of
/// silently producing garbage.
class FeatureSchema {
public:
    struct Entry {
        FeatureFamily family;
        std::string scale_tag; // "n/a", "1", "1s", "2s", "4s", "8s", ...
        std::string norm_tag;  // "div255", "minmax", "none"
        std::string name;      // unique channel name, e.g. "lip_row_2s"
    };

    static const FeatureSchema& instance();

    int total_dim() const { return static_cast<int>(entries_.size()); }
    const std::vector<Entry>& entries() const { return entries_; }
    std::uint64_t fingerprint() const { return fingerprint_; }

    /// [offset, offset+count) of a family's channels.
    std::pair<int, int> family_span(FeatureFamily f) const;

    /// Index of a channel by name, or -1.
    int index_of(const std::string& name) const;

private:
    FeatureSchema();
    std::vector<Entry> entries_;
    std::uint64_t fingerprint_ = 0;
};

/// Estimated text stroke thickness in pixels, clamped to
/// [1, min(W,H)/4]. Drives every scale-dependent window below.
struct StrokeWidth {
    int s = 1;
};

/// Tunables carried by every extraction; defaults follow the engine's
/// standard configuration.
struct FeatureConfig {
    double ltp_tol = 8.0;                // ternary-code tolerance band
    double eps_su = 1e-6;                // contrast denominator guard
    double sauvola_dynamic_range = 128.0; // S in the Sauvola index
    double lip_percentile_threshold = 0.01;
    int stroke_width_override = 0; // > 0 skips estimation
};

struct FeatureMatrix {
    int dim = 0;
    std::uint64_t schema_fingerprint = 0;
    std::vector<float> values; // rows * dim, row-major

    std::size_t rows() const {
        return dim == 0 ? 0 : values.size() / static_cast<std::size_t>(dim);
    }
    const float* row(std::size_t r) const {
        return &values[r * static_cast<std::size_t>(dim)];
    }
    float* row(std::size_t r) { return &values[r * static_cast<std::size_t>(dim)]; }
};

struct GlobalFeatures {
    double int_mean = 0.0; // /255
    double int_std = 0.0;  // /255
    double perc_mean = 0.0;
    double perc_std = 0.0;
    std::array<double, 32> int_loghist{};
    std::array<double, 32> perc_loghist{};
};

// ---------------------------------------------------------------------------
// Scalar kernels (pure; shared by the extractor and directly testable).
// ---------------------------------------------------------------------------

/// (max - min) / (max + min + eps); zero on flat windows.
inline double su_contrast(double minv, double maxv, double eps) {
    return (maxv - minv) / (maxv + minv + eps);
}

/// exp((I - mean)/std) truncated to 1 above the local mean; flat windows
/// (std == 0) report 1 as well.
inline double etni_value(double intensity, double mean, double stddev) {
    if (intensity > mean || stddev <= 0.0) {
        return 1.0;
    }
    return std::exp((intensity - mean) / stddev);
}

/// Logistic of the per-pixel Sauvola coefficient, zeroed when the local
/// std exceeds the dynamic range S. mean == 0 degenerates to 0.5.
inline double ltsi_value(double intensity, double mean, double stddev,
                         double dynamic_range) {
    if (stddev > dynamic_range) {
        return 0.0;
    }
    const double num = mean == 0.0 ? 0.0 : intensity / mean - 1.0;
    const double k = num == 0.0 ? 0.0 : num / (stddev - dynamic_range);
    return 1.0 / (1.0 + std::exp(-k));
}

/// Log-rescaled percentile: 1 at or below the threshold, log(p)/log(th)
/// above it, so the unit interval maps onto [0, 1] with extra resolution
/// for dark (low-percentile) pixels.
inline double lip_value(double percentile, double threshold) {
    if (percentile <= threshold) {
        return 1.0;
    }
    return std::log(percentile) / std::log(threshold);
}

// ---------------------------------------------------------------------------
// Standalone operations.
// ---------------------------------------------------------------------------

/// Stroke width from contrast-bounded runs: high-contrast pixels come from
/// Otsu on the 3x3 contrast map, a provisional foreground from Otsu on the
/// image, and s is the most common length of foreground runs (rows and
/// columns) whose both ends touch high contrast.
StrokeWidth estimate_stroke_width(const GrayImage& im, const FeatureConfig& cfg = {});

/// Fraction of region pixels q with I(x,y) >= I(q); the pixel itself
/// counts, so the result is always >= 1/|region|.
class PercentileRegion {
public:
    PercentileRegion(const GrayImage& im, std::span<const std::uint32_t> region_indices);

    double percentile_of(std::uint8_t intensity) const {
        return static_cast<double>(cum_[intensity]) / static_cast<double>(count_);
    }
    std::uint64_t count() const { return count_; }

private:
    std::array<std::uint64_t, 256> cum_{};
    std::uint64_t count_ = 0;
};

/// Ternary code of one circle neighbor: +1 if the neighbor is at least
/// tol brighter than the center, -1 if at least tol darker, 0 otherwise.
/// Neighbors sit at angle pi*l/4 on the radius-r circle; fractional
/// coordinates are sampled bilinearly and clamped to the border.
int ltp_code(const GrayImage& im, int x, int y, int neighbor, double radius,
             double tol);

// ---------------------------------------------------------------------------
// Extractor.
// ---------------------------------------------------------------------------

/// Builds every per-image artifact once (integral tables, min/max maps,
/// directional percentile tables, global statistics) and then serves
/// per-pixel rows. Extraction is pure w.r.t. the shared artifacts, so rows
/// can be pulled from multiple threads concurrently.
class FeatureExtractor {
public:
    explicit FeatureExtractor(const GrayImage& im, const FeatureConfig& cfg = {});
    ~FeatureExtractor();
    FeatureExtractor(FeatureExtractor&&) noexcept;
    FeatureExtractor& operator=(FeatureExtractor&&) noexcept;

    int width() const;
    int height() const;
    int stroke_width() const;
    int otsu() const;
    const GlobalFeatures& global_features() const;
    const FeatureSchema& schema() const;

    /// One full 142-channel row for pixel (x, y).
    void extract_pixel(int x, int y, float* out) const;

    /// All rows of image row y (width * total_dim floats), for streaming
    /// consumers that never materialize the full matrix.
    void extract_row(int y, float* out) const;

    /// Rows for an explicit pixel set (row-major linear indices).
    FeatureMatrix extract_at(std::span<const std::uint32_t> pixel_indices) const;

    /// Rows for every pixel, row-major.
    FeatureMatrix extract_all(int threads = 1) const;

    /// One channel over the whole image (for dumps/visualization).
    std::vector<float> channel_map(int channel, int threads = 1) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrappers matching the underlying per-image pipeline.
FeatureMatrix extract_features(const GrayImage& im, const FeatureConfig& cfg = {},
                               int threads = 1);
FeatureMatrix extract_features_at(const GrayImage& im,
                                  std::span<const std::uint32_t> pixel_indices,
                                  const FeatureConfig& cfg = {});

} // namespace docbin
