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

#include "docbin/image.hpp"

#include <cmath>
#include <deque>

namespace docbin {

IntegralPair integral(const GrayImage& im) {
    IntegralPair ip;
    ip.width = im.width;
    ip.height = im.height;
    const std::size_t stride = static_cast<std::size_t>(im.width) + 1;
    ip.sum.assign(stride * (im.height + 1), 0);
    ip.sqsum.assign(stride * (im.height + 1), 0);
    for (int y = 0; y < im.height; ++y) {
        std::uint64_t row_sum = 0;
        std::uint64_t row_sqsum = 0;
        const std::uint8_t* src = &im.data[static_cast<std::size_t>(y) * im.width];
        const std::uint64_t* above_sum = &ip.sum[static_cast<std::size_t>(y) * stride];
        const std::uint64_t* above_sq = &ip.sqsum[static_cast<std::size_t>(y) * stride];
        std::uint64_t* dst_sum = &ip.sum[(static_cast<std::size_t>(y) + 1) * stride];
        std::uint64_t* dst_sq = &ip.sqsum[(static_cast<std::size_t>(y) + 1) * stride];
        for (int x = 0; x < im.width; ++x) {
            const std::uint64_t v = src[x];
            row_sum += v;
            row_sqsum += v * v;
            dst_sum[x + 1] = above_sum[x + 1] + row_sum;
            dst_sq[x + 1] = above_sq[x + 1] + row_sqsum;
        }
    }
    return ip;
}

double local_mean(const IntegralPair& ip, int x, int y, int w, int h) {
    const WindowBounds b = clip_window(x, y, w, h, ip.width, ip.height);
    return static_cast<double>(ip.rect_sum(b.x0, b.y0, b.x1, b.y1)) / b.count();
}

double local_std(const IntegralPair& ip, int x, int y, int w, int h) {
    double mean, stddev;
    local_mean_std(ip, x, y, w, h, mean, stddev);
    return stddev;
}

void local_mean_std(const IntegralPair& ip, int x, int y, int w, int h,
                    double& mean, double& stddev) {
    const WindowBounds b = clip_window(x, y, w, h, ip.width, ip.height);
    const double n = b.count();
    mean = static_cast<double>(ip.rect_sum(b.x0, b.y0, b.x1, b.y1)) / n;
    const double e2 = static_cast<double>(ip.rect_sqsum(b.x0, b.y0, b.x1, b.y1)) / n;
    const double var = e2 - mean * mean;
    stddev = var > 0.0 ? std::sqrt(var) : 0.0;
}

Histogram256 histogram(const GrayImage& im) {
    Histogram256 h;
    for (const std::uint8_t v : im.data) {
        ++h.bins[v];
    }
    h.total = im.size();
    return h;
}

int otsu_threshold(const Histogram256& h) {
    if (h.total == 0) {
        throw DataError("otsu_threshold: empty histogram");
    }
    int lo = -1;
    int hi = -1;
    for (int v = 0; v < 256; ++v) {
        if (h.bins[v] != 0) {
            if (lo < 0) {
                lo = v;
            }
            hi = v;
        }
    }
    if (lo == hi) {
        return lo; // degenerate: constant image
    }
    std::uint64_t total_sum = 0;
    for (int v = 0; v < 256; ++v) {
        total_sum += h.bins[v] * static_cast<std::uint64_t>(v);
    }
    int best_t = 0;
    double best_score = -1.0;
    std::uint64_t w0 = 0;
    std::uint64_t sum0 = 0;
    for (int t = 0; t < 256; ++t) {
        // class 0 = {v < t}, class 1 = {v >= t}
        if (t > 0) {
            w0 += h.bins[t - 1];
            sum0 += h.bins[t - 1] * static_cast<std::uint64_t>(t - 1);
        }
        const std::uint64_t w1 = h.total - w0;
        if (w0 == 0 || w1 == 0) {
            continue;
        }
        const double m0 = static_cast<double>(sum0) / static_cast<double>(w0);
        const double m1 = static_cast<double>(total_sum - sum0) / static_cast<double>(w1);
        const double d = m0 - m1;
        const double score = static_cast<double>(w0) * static_cast<double>(w1) * d * d;
        if (score > best_score) {
            best_score = score;
            best_t = t;
        }
    }
    return best_t;
}

namespace {

enum class Extremum { Min, Max };

// 1-D sliding window extremum over one line, monotonic deque of indices.
// out[i] = extremum of in[clamp(i-r) .. clamp(i+r)], length n, stride-able.
template <Extremum E>
void sliding_line(const std::uint8_t* in, std::size_t in_stride, int n, int r,
                  std::uint8_t* out, std::size_t out_stride,
                  std::deque<int>& dq) {
    dq.clear();
    auto value = [&](int i) { return in[static_cast<std::size_t>(i) * in_stride]; };
    auto worse = [](std::uint8_t a, std::uint8_t b) {
        return E == Extremum::Min ? a >= b : a <= b;
    };
    int tail = 0; // next index to feed
    for (int i = 0; i < n; ++i) {
        const int window_end = i + r < n ? i + r : n - 1;
        for (; tail <= window_end; ++tail) {
            while (!dq.empty() && worse(value(dq.back()), value(tail))) {
                dq.pop_back();
            }
            dq.push_back(tail);
        }
        while (dq.front() < i - r) {
            dq.pop_front();
        }
        out[static_cast<std::size_t>(i) * out_stride] = value(dq.front());
    }
}

template <Extremum E>
void sliding_2d(const GrayImage& im, int w, int h, std::vector<std::uint8_t>& out) {
    const int W = im.width;
    const int H = im.height;
    const int rx = w / 2;
    const int ry = h / 2;
    std::vector<std::uint8_t> tmp(im.size());
    std::deque<int> dq;
    for (int y = 0; y < H; ++y) {
        sliding_line<E>(&im.data[static_cast<std::size_t>(y) * W], 1, W, rx,
                        &tmp[static_cast<std::size_t>(y) * W], 1, dq);
    }
    out.resize(im.size());
    for (int x = 0; x < W; ++x) {
        sliding_line<E>(&tmp[static_cast<std::size_t>(x)], W, H, ry,
                        &out[static_cast<std::size_t>(x)], W, dq);
    }
}

} // namespace

void window_min_max(const GrayImage& im, int w, int h,
                    std::vector<std::uint8_t>& min_map,
                    std::vector<std::uint8_t>& max_map) {
    if (w < 1 || h < 1) {
        throw DataError("window_min_max: window sides must be >= 1");
    }
    sliding_2d<Extremum::Min>(im, w, h, min_map);
    sliding_2d<Extremum::Max>(im, w, h, max_map);
}

} // namespace docbin
