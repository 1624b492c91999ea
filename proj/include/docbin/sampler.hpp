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
#include <cstdint>
#include <filesystem>
#include <vector>

#include "docbin/features.hpp"
#include "docbin/image.hpp"
#include "docbin/thresholders.hpp"

namespace docbin {

/// 4-bit pixel taxonomy:
///   bit 0 - Otsu foreground
///   bit 1 - Niblack foreground
///   bit 2 - within s pixels (Chebyshev) of a ground-truth edge
///   bit 3 - ground-truth foreground
struct SubclassMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> codes;

    std::uint8_t at(int x, int y) const {
        return codes[static_cast<std::size_t>(y) * width + x];
    }
};

constexpr std::uint8_t kSubclassOtsuBit = 1;
constexpr std::uint8_t kSubclassNiblackBit = 2;
constexpr std::uint8_t kSubclassEdgeBit = 4;
constexpr std::uint8_t kSubclassForegroundBit = 8;

SubclassMap subclass_map(const GrayImage& im, const LabelImage& gt, int stroke_width,
                         const NiblackParams& niblack);

/// Per-subclass populations of a map (or of a restricted pixel pool).
std::array<std::uint64_t, 16> subclass_counts(const SubclassMap& sm);

/// Draws ~n_total/16 pixels per subclass without replacement; subclasses
/// short of their quota contribute everything they have and the shortfall
/// is spread uniformly over the rest until the budget or the pixels run
/// out. Deterministic for a given seed. Returns row-major pixel indices
/// grouped by subclass.
std::vector<std::uint32_t> balanced_sample(const SubclassMap& sm, std::size_t n_total,
                                           std::uint64_t seed);

/// balanced_sample restricted to pixels where pred differs from gt. Pools
/// smaller than the budget are returned whole; a perfect prediction yields
/// an empty list.
std::vector<std::uint32_t> mine_errors(const LabelImage& pred, const LabelImage& gt,
                                       const SubclassMap& sm, std::size_t n_total,
                                       std::uint64_t seed);

/// Labeled feature rows drawn by the sampler. Columnar on disk so sampling
/// and training can run as separate stages.
struct SampleSet {
    int dim = 0;
    std::uint64_t schema_fingerprint = 0;
    std::uint64_t rng_seed = 0;
    std::vector<float> rows;            // row-major, rows() * dim
    std::vector<std::uint8_t> labels;   // 0/1 (= subclass bit 3)
    std::vector<std::uint8_t> subclasses;
    std::vector<std::uint32_t> image_ids;

    std::size_t size() const { return labels.size(); }
    const float* row(std::size_t r) const {
        return &rows[r * static_cast<std::size_t>(dim)];
    }

    void append(const FeatureMatrix& m, const SubclassMap& sm,
                std::span<const std::uint32_t> pixels, std::uint32_t image_id);
    void append_row(const float* row, std::uint8_t label, std::uint8_t subclass,
                    std::uint32_t image_id);
};

void save_samples(const SampleSet& set, const std::filesystem::path& path);
SampleSet load_samples(const std::filesystem::path& path);

} // namespace docbin
