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

#include "docbin/image.hpp"

namespace docbin {

struct NiblackParams {
    double k = -0.2; // must be < 0
    int window = 15; // odd, >= 3

    void validate() const {
        if (!(k < 0.0)) {
            throw DataError("NiblackParams: k must be < 0");
        }
        if (window < 3 || window % 2 == 0) {
            throw DataError("NiblackParams: window must be odd and >= 3");
        }
    }
};

struct SauvolaParams {
    double k = 0.5;              // must be > 0
    double dynamic_range = 128.0; // S, must be > 0
    int window = 15;             // odd, >= 3

    void validate() const {
        if (!(k > 0.0)) {
            throw DataError("SauvolaParams: k must be > 0");
        }
        if (!(dynamic_range > 0.0)) {
            throw DataError("SauvolaParams: dynamic range must be > 0");
        }
        if (window < 3 || window % 2 == 0) {
            throw DataError("SauvolaParams: window must be odd and >= 3");
        }
    }
};

/// Default local-threshold window: twice the stroke width, rounded to odd,
/// never below 15 px.
inline int default_threshold_window(int stroke_width) {
    const int w = odd_window(2 * stroke_width);
    return w < 15 ? 15 : w;
}

/// Foreground iff I - G_th < 0. Ties (I == G_th) go to background, so a
/// constant image binarizes to all background.
LabelImage binarize_otsu(const GrayImage& im);

/// Foreground iff I - mean + k * std < 0 over the clipped window.
LabelImage binarize_niblack(const GrayImage& im, const NiblackParams& p);

/// Foreground iff I - mean * (1 + k * (std / S - 1)) < 0.
LabelImage binarize_sauvola(const GrayImage& im, const SauvolaParams& p);

} // namespace docbin
