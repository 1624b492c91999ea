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

#include "docbin/thresholders.hpp"

namespace docbin {

LabelImage binarize_otsu(const GrayImage& im) {
    const int gth = otsu_threshold(histogram(im));
    LabelImage out = LabelImage::create(im.width, im.height);
    for (std::size_t i = 0; i < im.data.size(); ++i) {
        out.data[i] = im.data[i] < gth ? 1 : 0;
    }
    return out;
}

LabelImage binarize_niblack(const GrayImage& im, const NiblackParams& p) {
    p.validate();
    const IntegralPair ip = integral(im);
    LabelImage out = LabelImage::create(im.width, im.height);
    for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x) {
            double mean, stddev;
            local_mean_std(ip, x, y, p.window, p.window, mean, stddev);
            const double f = im.at(x, y) - mean + p.k * stddev;
            out.at(x, y) = f < 0.0 ? 1 : 0;
        }
    }
    return out;
}

LabelImage binarize_sauvola(const GrayImage& im, const SauvolaParams& p) {
    p.validate();
    const IntegralPair ip = integral(im);
    LabelImage out = LabelImage::create(im.width, im.height);
    for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x) {
            double mean, stddev;
            local_mean_std(ip, x, y, p.window, p.window, mean, stddev);
            const double threshold =
                mean * (1.0 + p.k * (stddev / p.dynamic_range - 1.0));
            const double f = im.at(x, y) - threshold;
            out.at(x, y) = f < 0.0 ? 1 : 0;
        }
    }
    return out;
}

} // namespace docbin
