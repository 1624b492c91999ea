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

#include <cmath>
#include <cstdint>
#include <random>

namespace docbin {

/// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the
/// standard, and the distributions below are implemented here rather than
/// with std::uniform_*_distribution (whose algorithms are
/// implementation-defined), so streams reproduce bit-for-bit across
/// platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0. Unbiased via rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t bound = n * ((~std::uint64_t{0}) / n);
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= bound);
        return r % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_real() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform_real(double lo, double hi) {
        return lo + uniform_real() * (hi - lo);
    }

    /// Standard normal via Box-Muller (deterministic, no cached spare).
    double normal() {
        double u1;
        do {
            u1 = uniform_real();
        } while (u1 <= 0.0);
        const double u2 = uniform_real();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Independent child stream. Streams with distinct ids never collide in
    /// practice (SplitMix64 mixing of the parent seed and the id).
    Rng fork(std::uint64_t stream_id) const {
        std::uint64_t z = seed_ ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1));
        z = splitmix64(z);
        return Rng(z);
    }

    static std::uint64_t splitmix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace docbin
