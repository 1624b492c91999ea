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

#include "docbin/sampler.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

#include "docbin/rng.hpp"

namespace docbin {

namespace {

// Exact Chebyshev distance to the nearest seed via the two-pass chamfer
// with the full 8-neighborhood (exact for the L-inf metric).
std::vector<std::uint32_t> chebyshev_distance(const std::vector<std::uint8_t>& seeds,
                                              int w, int h) {
    constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;
    std::vector<std::uint32_t> d(static_cast<std::size_t>(w) * h, kInf);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (seeds[i]) {
            d[i] = 0;
        }
    }
    auto at = [&](int x, int y) -> std::uint32_t& {
        return d[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint32_t best = at(x, y);
            if (x > 0) best = std::min(best, at(x - 1, y) + 1);
            if (y > 0) {
                best = std::min(best, at(x, y - 1) + 1);
                if (x > 0) best = std::min(best, at(x - 1, y - 1) + 1);
                if (x + 1 < w) best = std::min(best, at(x + 1, y - 1) + 1);
            }
            at(x, y) = best;
        }
    }
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            std::uint32_t best = at(x, y);
            if (x + 1 < w) best = std::min(best, at(x + 1, y) + 1);
            if (y + 1 < h) {
                best = std::min(best, at(x, y + 1) + 1);
                if (x > 0) best = std::min(best, at(x - 1, y + 1) + 1);
                if (x + 1 < w) best = std::min(best, at(x + 1, y + 1) + 1);
            }
            at(x, y) = best;
        }
    }
    return d;
}

} // namespace

SubclassMap subclass_map(const GrayImage& im, const LabelImage& gt, int stroke_width,
                         const NiblackParams& niblack) {
    if (im.width != gt.width || im.height != gt.height) {
        throw DataError("subclass_map: image and ground truth dimensions differ");
    }
    const LabelImage otsu_fg = binarize_otsu(im);
    const LabelImage niblack_fg = binarize_niblack(im, niblack);

    // Edge set: foreground pixels with a 4-adjacent background pixel plus
    // the mirrored background boundary pixels.
    const int w = im.width;
    const int h = im.height;
    std::vector<std::uint8_t> edge_seed(im.size(), 0);
    auto gt_at = [&](int x, int y) { return gt.data[static_cast<std::size_t>(y) * w + x]; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint8_t c = gt_at(x, y);
            const bool boundary =
                (x > 0 && gt_at(x - 1, y) != c) || (x + 1 < w && gt_at(x + 1, y) != c) ||
                (y > 0 && gt_at(x, y - 1) != c) || (y + 1 < h && gt_at(x, y + 1) != c);
            if (boundary) {
                edge_seed[static_cast<std::size_t>(y) * w + x] = 1;
            }
        }
    }
    bool any_edge = false;
    for (const std::uint8_t e : edge_seed) {
        if (e) {
            any_edge = true;
            break;
        }
    }
    std::vector<std::uint32_t> dist;
    if (any_edge) {
        dist = chebyshev_distance(edge_seed, w, h);
    }

    SubclassMap sm;
    sm.width = w;
    sm.height = h;
    sm.codes.resize(im.size());
    const auto s = static_cast<std::uint32_t>(stroke_width);
    for (std::size_t i = 0; i < im.size(); ++i) {
        std::uint8_t code = 0;
        if (otsu_fg.data[i]) code |= kSubclassOtsuBit;
        if (niblack_fg.data[i]) code |= kSubclassNiblackBit;
        if (any_edge && dist[i] <= s) code |= kSubclassEdgeBit;
        if (gt.data[i]) code |= kSubclassForegroundBit;
        sm.codes[i] = code;
    }
    return sm;
}

std::array<std::uint64_t, 16> subclass_counts(const SubclassMap& sm) {
    std::array<std::uint64_t, 16> counts{};
    for (const std::uint8_t c : sm.codes) {
        ++counts[c];
    }
    return counts;
}

namespace {

// Budget allocation across subclasses: start from an even share and keep
// redistributing what capacity-limited subclasses cannot absorb.
std::array<std::uint64_t, 16> allocate_quota(const std::array<std::uint64_t, 16>& capacity,
                                             std::uint64_t budget) {
    std::array<std::uint64_t, 16> take{};
    std::uint64_t remaining = 0;
    for (const std::uint64_t c : capacity) {
        remaining += c;
    }
    remaining = std::min(remaining, budget);
    while (remaining > 0) {
        std::vector<int> active;
        for (int c = 0; c < 16; ++c) {
            if (take[c] < capacity[c]) {
                active.push_back(c);
            }
        }
        if (active.empty()) {
            break;
        }
        const std::uint64_t share = remaining / active.size();
        std::uint64_t leftover = remaining % active.size();
        if (share == 0) {
            for (const int c : active) {
                if (leftover == 0) {
                    break;
                }
                ++take[c];
                --leftover;
                --remaining;
            }
            continue;
        }
        bool hit_capacity = false;
        for (const int c : active) {
            const std::uint64_t want = share + (leftover > 0 ? 1 : 0);
            if (leftover > 0) {
                --leftover;
            }
            const std::uint64_t got = std::min(want, capacity[c] - take[c]);
            if (got < want) {
                hit_capacity = true;
            }
            take[c] += got;
            remaining -= got;
        }
        if (!hit_capacity) {
            break; // full share landed everywhere; budget is spent
        }
    }
    return take;
}

// Draw `count` indices without replacement from `pool` (partial
// Fisher-Yates; the pool order is row-major so the draw depends only on
// the seed).
void draw_without_replacement(std::vector<std::uint32_t>& pool, std::uint64_t count,
                              Rng& rng, std::vector<std::uint32_t>& out) {
    const std::uint64_t n = pool.size();
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t j = i + rng.uniform_index(n - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
}

std::vector<std::uint32_t> balanced_draw(const SubclassMap& sm,
                                         const std::vector<std::uint8_t>* pool_mask,
                                         std::size_t n_total, std::uint64_t seed) {
    std::array<std::vector<std::uint32_t>, 16> members;
    for (std::uint32_t i = 0; i < sm.codes.size(); ++i) {
        if (pool_mask && !(*pool_mask)[i]) {
            continue;
        }
        members[sm.codes[i]].push_back(i);
    }
    std::array<std::uint64_t, 16> capacity{};
    for (int c = 0; c < 16; ++c) {
        capacity[c] = members[c].size();
    }
    const auto take = allocate_quota(capacity, n_total);
    Rng rng(seed);
    std::vector<std::uint32_t> out;
    for (int c = 0; c < 16; ++c) {
        if (take[c] > 0) {
            draw_without_replacement(members[c], take[c], rng, out);
        }
    }
    return out;
}

} // namespace

std::vector<std::uint32_t> balanced_sample(const SubclassMap& sm, std::size_t n_total,
                                           std::uint64_t seed) {
    if (n_total < 16) {
        throw DataError("balanced_sample: n_total must be >= 16");
    }
    return balanced_draw(sm, nullptr, n_total, seed);
}

std::vector<std::uint32_t> mine_errors(const LabelImage& pred, const LabelImage& gt,
                                       const SubclassMap& sm, std::size_t n_total,
                                       std::uint64_t seed) {
    if (pred.width != gt.width || pred.height != gt.height ||
        pred.width != sm.width || pred.height != sm.height) {
        throw DataError("mine_errors: dimension mismatch");
    }
    std::vector<std::uint8_t> pool(pred.size());
    std::size_t pool_size = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pool[i] = pred.data[i] != gt.data[i] ? 1 : 0;
        pool_size += pool[i];
    }
    if (pool_size == 0) {
        return {};
    }
    if (pool_size <= n_total) {
        std::vector<std::uint32_t> all;
        all.reserve(pool_size);
        for (std::uint32_t i = 0; i < pool.size(); ++i) {
            if (pool[i]) {
                all.push_back(i);
            }
        }
        return all;
    }
    return balanced_draw(sm, &pool, n_total, seed);
}

// ---------------------------------------------------------------------------
// SampleSet persistence
// ---------------------------------------------------------------------------

void SampleSet::append(const FeatureMatrix& m, const SubclassMap& sm,
                       std::span<const std::uint32_t> pixels, std::uint32_t image_id) {
    if (dim == 0) {
        dim = m.dim;
        schema_fingerprint = m.schema_fingerprint;
    }
    if (dim != m.dim || schema_fingerprint != m.schema_fingerprint) {
        throw DataError("SampleSet::append: schema mismatch");
    }
    if (m.rows() != pixels.size()) {
        throw DataError("SampleSet::append: row/pixel count mismatch");
    }
    for (std::size_t r = 0; r < pixels.size(); ++r) {
        const std::uint8_t code = sm.codes[pixels[r]];
        append_row(m.row(r), (code & kSubclassForegroundBit) ? 1 : 0, code, image_id);
    }
}

void SampleSet::append_row(const float* row, std::uint8_t label, std::uint8_t subclass,
                           std::uint32_t image_id) {
    rows.insert(rows.end(), row, row + dim);
    labels.push_back(label);
    subclasses.push_back(subclass);
    image_ids.push_back(image_id);
}

namespace {

constexpr char kSampleMagic[8] = {'D', 'B', 'S', 'M', 'P', 'L', 'v', '1'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) {
        throw IoError("sample file truncated");
    }
}

} // namespace

void save_samples(const SampleSet& set, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open sample file for writing: " + path.string());
    }
    f.write(kSampleMagic, sizeof(kSampleMagic));
    write_pod(f, set.schema_fingerprint);
    write_pod(f, set.rng_seed);
    write_pod(f, static_cast<std::uint32_t>(set.dim));
    write_pod(f, static_cast<std::uint64_t>(set.size()));
    f.write(reinterpret_cast<const char*>(set.rows.data()),
            static_cast<std::streamsize>(set.rows.size() * sizeof(float)));
    f.write(reinterpret_cast<const char*>(set.labels.data()),
            static_cast<std::streamsize>(set.labels.size()));
    f.write(reinterpret_cast<const char*>(set.subclasses.data()),
            static_cast<std::streamsize>(set.subclasses.size()));
    f.write(reinterpret_cast<const char*>(set.image_ids.data()),
            static_cast<std::streamsize>(set.image_ids.size() * sizeof(std::uint32_t)));
    if (!f) {
        throw IoError("short write to sample file: " + path.string());
    }
}

SampleSet load_samples(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open sample file: " + path.string());
    }
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kSampleMagic, sizeof(magic)) != 0) {
        throw IoError("not a sample file: " + path.string());
    }
    SampleSet set;
    std::uint32_t dim = 0;
    std::uint64_t count = 0;
    read_pod(f, set.schema_fingerprint);
    read_pod(f, set.rng_seed);
    read_pod(f, dim);
    read_pod(f, count);
    set.dim = static_cast<int>(dim);
    set.rows.resize(count * dim);
    set.labels.resize(count);
    set.subclasses.resize(count);
    set.image_ids.resize(count);
    f.read(reinterpret_cast<char*>(set.rows.data()),
           static_cast<std::streamsize>(set.rows.size() * sizeof(float)));
    f.read(reinterpret_cast<char*>(set.labels.data()),
           static_cast<std::streamsize>(set.labels.size()));
    f.read(reinterpret_cast<char*>(set.subclasses.data()),
           static_cast<std::streamsize>(set.subclasses.size()));
    f.read(reinterpret_cast<char*>(set.image_ids.data()),
           static_cast<std::streamsize>(set.image_ids.size() * sizeof(std::uint32_t)));
    if (!f) {
        throw IoError("sample file truncated: " + path.string());
    }
    return set;
}

} // namespace docbin
