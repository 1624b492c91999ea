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
#include <string>
#include <vector>

#include "docbin/image.hpp"

namespace docbin {

struct CorpusEntry {
    std::filesystem::path image;
    std::filesystem::path gt; // empty when no ground truth is attached
    std::string split;        // manifest tag, empty by default

    bool has_gt() const { return !gt.empty(); }
};

/// Manifest: one `image<TAB>gt[<TAB>split]` line each; `-` or a missing
/// second column means no ground truth. Blank lines and `#` comments are
/// skipped. Every referenced path must exist.
std::vector<CorpusEntry> load_manifest(const std::filesystem::path& manifest,
                                       const std::string& split_filter = {});

/// Pairs every raster in `images_dir` with the same-stem file in `gt_dir`.
/// With `require_gt`, stems without a ground-truth partner are an error.
std::vector<CorpusEntry> pair_directories(const std::filesystem::path& images_dir,
                                          const std::filesystem::path& gt_dir,
                                          bool require_gt = true);

} // namespace docbin
