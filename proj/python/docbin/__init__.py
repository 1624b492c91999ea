# Copyright 2026 the docbin authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Trainable document image binarization."""

from docbin._core import (
    DataError,
    IoError,
    MetricError,
    Model,
    ModelError,
    __version__,
    binarize_niblack,
    binarize_otsu,
    binarize_sauvola,
    drd,
    estimate_stroke_width,
    extract_features,
    extract_features_at,
    f1,
    feature_names,
    load_image,
    load_label_image,
    otsu_threshold,
    psnr,
    save_gray_png,
    save_label_png,
    schema_fingerprint,
)

__all__ = [
    "DataError",
    "IoError",
    "MetricError",
    "Model",
    "ModelError",
    "__version__",
    "binarize_niblack",
    "binarize_otsu",
    "binarize_sauvola",
    "drd",
    "estimate_stroke_width",
    "extract_features",
    "extract_features_at",
    "f1",
    "feature_names",
    "load_image",
    "load_label_image",
    "otsu_threshold",
    "psnr",
    "save_gray_png",
    "save_label_png",
    "schema_fingerprint",
]
