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
#include <stdexcept>
#include <vector>

namespace docbin {

/// Raised for malformed inputs (bad dimensions, mismatched pairs, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for file decode/encode failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 8-bit grayscale image, row-major. Immutable by convention once built.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    static GrayImage create(int w, int h, std::uint8_t fill = 0) {
        if (w < 1 || h < 1) {
            throw DataError("GrayImage: width and height must be >= 1");
        }
        GrayImage im;
        im.width = w;
        im.height = h;
        im.data.assign(static_cast<std::size_t>(w) * h, fill);
        return im;
    }

    std::size_t size() const { return data.size(); }
    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    bool valid() const {
        return width >= 1 && height >= 1 &&
               data.size() == static_cast<std::size_t>(width) * height;
    }
};

/// Per-pixel class labels: 1 foreground (text), 0 background.
struct LabelImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    static LabelImage create(int w, int h, std::uint8_t fill = 0) {
        if (w < 1 || h < 1) {
            throw DataError("LabelImage: width and height must be >= 1");
        }
        LabelImage im;
        im.width = w;
        im.height = h;
        im.data.assign(static_cast<std::size_t>(w) * h, fill);
        return im;
    }

    std::size_t size() const { return data.size(); }
    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return data[static_cast<std::size_t>(y) * width + x];
    }
};

/// Summed-area tables of I and I^2 with a zero top row/column, so any
/// rectangle sum is four lookups in exact integer arithmetic.
struct IntegralPair {
    int width = 0;  // image width; tables are (width+1) x (height+1)
    int height = 0;
    std::vector<std::uint64_t> sum;
    std::vector<std::uint64_t> sqsum;

    std::uint64_t table_at(const std::vector<std::uint64_t>& t, int x, int y) const {
        return t[static_cast<std::size_t>(y) * (width + 1) + x];
    }

    /// Sum of intensities over the half-open rectangle [x0,x1) x [y0,y1).
    std::uint64_t rect_sum(int x0, int y0, int x1, int y1) const {
        return table_at(sum, x1, y1) - table_at(sum, x0, y1) -
               table_at(sum, x1, y0) + table_at(sum, x0, y0);
    }
    std::uint64_t rect_sqsum(int x0, int y0, int x1, int y1) const {
        return table_at(sqsum, x1, y1) - table_at(sqsum, x0, y1) -
               table_at(sqsum, x1, y0) + table_at(sqsum, x0, y0);
    }
};

struct Histogram256 {
    std::array<std::uint64_t, 256> bins{};
    std::uint64_t total = 0;
};

/// Centered window of side w x h at (x,y), clipped to the image bounds.
/// Sides must be odd so the window is symmetric before clipping.
struct WindowBounds {
    int x0, y0, x1, y1; // half-open
    int count() const { return (x1 - x0) * (y1 - y0); }
};

inline WindowBounds clip_window(int x, int y, int w, int h, int width, int height) {
    const int rx = w / 2;
    const int ry = h / 2;
    WindowBounds b;
    b.x0 = x - rx < 0 ? 0 : x - rx;
    b.y0 = y - ry < 0 ? 0 : y - ry;
    b.x1 = x + rx + 1 > width ? width : x + rx + 1;
    b.y1 = y + ry + 1 > height ? height : y + ry + 1;
    return b;
}

/// Rounds a requested window side to the nearest odd integer >= 3
/// (ties upward), so windows stay centered.
inline int odd_window(int side) {
    if (side < 3) {
        return 3;
    }
    return (side % 2 == 0) ? side + 1 : side;
}

IntegralPair integral(const GrayImage& im);

/// Mean of intensities in the clipped w x h window centered at (x,y).
double local_mean(const IntegralPair& ip, int x, int y, int w, int h);

/// Population standard deviation over the clipped window,
/// sqrt(max(0, E[I^2] - mean^2)).
double local_std(const IntegralPair& ip, int x, int y, int w, int h);

/// Mean and std together (one pair of rectangle queries).
void local_mean_std(const IntegralPair& ip, int x, int y, int w, int h,
                    double& mean, double& stddev);

Histogram256 histogram(const GrayImage& im);

/// Global threshold maximizing the between-class variance
/// w0*w1*(mu0-mu1)^2 of the partition {v < t} vs {v >= t}; ties break to
/// the smallest t. A single-valued histogram returns that value, so the
/// downstream "I - threshold" feature degenerates to zero.
int otsu_threshold(const Histogram256& h);

/// Per-pixel min and max of the clipped w x h window, O(W*H) via
/// monotonic-deque sliding extrema (rows then columns).
void window_min_max(const GrayImage& im, int w, int h,
                    std::vector<std::uint8_t>& min_map,
                    std::vector<std::uint8_t>& max_map);

} // namespace docbin
