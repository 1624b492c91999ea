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

#include "docbin/io.hpp"

#include <cmath>
#include <cstdio>
#include <system_error>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace docbin {

namespace fs = std::filesystem;

GrayImage load_image(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) {
        throw IoError("cannot read image file: " + path.string());
    }
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (raw.empty()) {
        throw IoError("unsupported or corrupt image file: " + path.string());
    }
    if (raw.depth() != CV_8U) {
        // 16-bit PNGs and friends: scale to 8 bits first.
        double maxv;
        cv::minMaxLoc(raw.reshape(1), nullptr, &maxv);
        cv::Mat tmp;
        raw.convertTo(tmp, CV_8U, maxv > 255.0 ? 255.0 / maxv : 1.0);
        raw = tmp;
    }
    GrayImage im = GrayImage::create(raw.cols, raw.rows);
    if (raw.channels() == 1) {
        for (int y = 0; y < raw.rows; ++y) {
            const std::uint8_t* src = raw.ptr<std::uint8_t>(y);
            std::copy(src, src + raw.cols, &im.data[static_cast<std::size_t>(y) * raw.cols]);
        }
        return im;
    }
    if (raw.channels() != 3 && raw.channels() != 4) {
        throw IoError("unsupported channel count in " + path.string());
    }
    // OpenCV decodes to BGR(A).
    for (int y = 0; y < raw.rows; ++y) {
        const std::uint8_t* src = raw.ptr<std::uint8_t>(y);
        std::uint8_t* dst = &im.data[static_cast<std::size_t>(y) * raw.cols];
        const int ch = raw.channels();
        for (int x = 0; x < raw.cols; ++x) {
            const double b = src[x * ch + 0];
            const double g = src[x * ch + 1];
            const double r = src[x * ch + 2];
            const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
            dst[x] = static_cast<std::uint8_t>(std::lround(luma));
        }
    }
    return im;
}

namespace {

void write_png_atomic(const fs::path& path, const cv::Mat& mat) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    // The temp name keeps the extension (the encoder is picked from it).
    fs::path tmp = path.parent_path() /
                   (path.stem().string() + ".tmp" + path.extension().string());
    if (!cv::imwrite(tmp.string(), mat)) {
        throw IoError("cannot write PNG: " + path.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place: " + path.string());
    }
}

} // namespace

void save_gray_png(const fs::path& path, const GrayImage& im) {
    if (!im.valid()) {
        throw DataError("save_gray_png: invalid image");
    }
    cv::Mat mat(im.height, im.width, CV_8UC1);
    for (int y = 0; y < im.height; ++y) {
        std::copy(&im.data[static_cast<std::size_t>(y) * im.width],
                  &im.data[static_cast<std::size_t>(y) * im.width] + im.width,
                  mat.ptr<std::uint8_t>(y));
    }
    write_png_atomic(path, mat);
}

void save_label_png(const fs::path& path, const LabelImage& labels, bool invert) {
    cv::Mat mat(labels.height, labels.width, CV_8UC1);
    const std::uint8_t fg = invert ? 255 : 0;
    const std::uint8_t bg = invert ? 0 : 255;
    for (int y = 0; y < labels.height; ++y) {
        std::uint8_t* dst = mat.ptr<std::uint8_t>(y);
        const std::uint8_t* src = &labels.data[static_cast<std::size_t>(y) * labels.width];
        for (int x = 0; x < labels.width; ++x) {
            dst[x] = src[x] ? fg : bg;
        }
    }
    write_png_atomic(path, mat);
}

LabelImage load_label_image(const fs::path& path) {
    const GrayImage gray = load_image(path);
    LabelImage labels = LabelImage::create(gray.width, gray.height);
    for (std::size_t i = 0; i < gray.data.size(); ++i) {
        labels.data[i] = gray.data[i] < 128 ? 1 : 0;
    }
    return labels;
}

} // namespace docbin
