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

#include "docbin/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace docbin {

namespace fs = std::filesystem;

namespace {

void require_exists(const fs::path& p, const char* what) {
    std::error_code ec;
    if (!fs::exists(p, ec)) {
        throw DataError(std::string(what) + " not found: " + p.string());
    }
}

bool is_raster(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".bmp" || ext == ".tif" || ext == ".tiff" ||
           ext == ".jpg" || ext == ".jpeg" || ext == ".pgm" || ext == ".pbm";
}

} // namespace

std::vector<CorpusEntry> load_manifest(const fs::path& manifest,
                                       const std::string& split_filter) {
    std::ifstream f(manifest);
    if (!f) {
        throw IoError("cannot open manifest: " + manifest.string());
    }
    const fs::path base = manifest.parent_path();
    auto resolve = [&](const std::string& s) {
        fs::path p(s);
        return p.is_absolute() ? p : base / p;
    };
    std::vector<CorpusEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) {
            cols.push_back(col);
        }
        if (cols.empty() || cols[0].empty()) {
            throw DataError("manifest line " + std::to_string(line_no) + " is malformed");
        }
        CorpusEntry e;
        e.image = resolve(cols[0]);
        require_exists(e.image, "manifest image");
        if (cols.size() > 1 && !cols[1].empty() && cols[1] != "-") {
            e.gt = resolve(cols[1]);
            require_exists(e.gt, "manifest ground truth");
        }
        if (cols.size() > 2) {
            e.split = cols[2];
        }
        if (!split_filter.empty() && e.split != split_filter) {
            continue;
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<CorpusEntry> pair_directories(const fs::path& images_dir,
                                          const fs::path& gt_dir, bool require_gt) {
    if (!fs::is_directory(images_dir)) {
        throw DataError("image directory not found: " + images_dir.string());
    }
    std::map<std::string, fs::path> gts;
    if (!gt_dir.empty()) {
        if (!fs::is_directory(gt_dir)) {
            throw DataError("ground-truth directory not found: " + gt_dir.string());
        }
        for (const auto& entry : fs::directory_iterator(gt_dir)) {
            if (entry.is_regular_file() && is_raster(entry.path())) {
                gts[entry.path().stem().string()] = entry.path();
            }
        }
    }
    std::vector<CorpusEntry> entries;
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(images_dir)) {
        if (entry.is_regular_file() && is_raster(entry.path())) {
            images.push_back(entry.path());
        }
    }
    std::sort(images.begin(), images.end());
    for (const fs::path& image : images) {
        CorpusEntry e;
        e.image = image;
        const auto it = gts.find(image.stem().string());
        if (it != gts.end()) {
            e.gt = it->second;
        } else if (require_gt) {
            throw DataError("no ground truth for image: " + image.string());
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) {
        throw DataError("no raster images in: " + images_dir.string());
    }
    return entries;
}

} // namespace docbin
