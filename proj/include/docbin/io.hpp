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

#include <filesystem>

#include "docbin/image.hpp"

namespace docbin {

/// Decodes a raster file (PNG/BMP/TIFF/JPEG...). Color inputs are reduced
/// to luma with BT.601 weights 0.299 R + 0.587 G + 0.114 B rounded to the
/// nearest integer; grayscale files pass through untouched.
GrayImage load_image(const std::filesystem::path& path);

/// 8-bit grayscale PNG (atomic: temp file + rename).
void save_gray_png(const std::filesystem::path& path, const GrayImage& im);

/// Label output. Default polarity follows the DIBCO convention: foreground
/// text black (0), background white (255). `invert` flips to 1 -> 255.
void save_label_png(const std::filesystem::path& path, const LabelImage& labels,
                    bool invert = false);

/// Reads a binarization/ground-truth PNG back into labels: any pixel
/// darker than 128 counts as foreground text.
LabelImage load_label_image(const std::filesystem::path& path);

} // namespace docbin
