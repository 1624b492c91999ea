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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "docbin/io.hpp"
#include "docbin/learner.hpp"
#include "docbin/metrics.hpp"
#include "docbin/parallel.hpp"
#include "docbin/sampler.hpp"
#include "docbin/thresholders.hpp"

namespace py = pybind11;
using namespace docbin;

namespace {

GrayImage to_gray(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) {
        throw py::value_error("expected a 2-D uint8 array (H, W)");
    }
    GrayImage im = GrayImage::create(static_cast<int>(a.shape(1)),
                                     static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), im.data.begin());
    return im;
}

LabelImage to_labels(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) {
        throw py::value_error("expected a 2-D uint8 array (H, W)");
    }
    LabelImage im = LabelImage::create(static_cast<int>(a.shape(1)),
                                       static_cast<int>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.size(); ++i) {
        im.data[static_cast<std::size_t>(i)] = a.data()[i] ? 1 : 0;
    }
    return im;
}

py::array_t<std::uint8_t> from_gray(const GrayImage& im) {
    py::array_t<std::uint8_t> a({im.height, im.width});
    std::copy(im.data.begin(), im.data.end(), a.mutable_data());
    return a;
}

py::array_t<std::uint8_t> from_labels(const LabelImage& im) {
    py::array_t<std::uint8_t> a({im.height, im.width});
    std::copy(im.data.begin(), im.data.end(), a.mutable_data());
    return a;
}

py::array_t<float> from_matrix(const FeatureMatrix& m) {
    py::array_t<float> a({static_cast<py::ssize_t>(m.rows()),
                          static_cast<py::ssize_t>(m.dim)});
    std::copy(m.values.begin(), m.values.end(), a.mutable_data());
    return a;
}

FeatureConfig make_config(double ltp_tol, double eps_su, double sauvola_S) {
    FeatureConfig cfg;
    cfg.ltp_tol = ltp_tol;
    cfg.eps_su = eps_su;
    cfg.sauvola_dynamic_range = sauvola_S;
    return cfg;
}

/// Python-facing model handle.
class Model {
public:
    explicit Model(ErtModel m) : model_(std::move(m)) {}

    static Model train(const std::vector<std::pair<py::array_t<std::uint8_t>,
                                                   py::array_t<std::uint8_t>>>& pairs,
                       std::size_t pass1_budget, std::size_t pass2_budget, int trees,
                       std::uint64_t seed, int threads) {
        std::vector<TrainingImage> corpus;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            TrainingImage t;
            t.image = to_gray(pairs[i].first);
            t.gt = to_labels(pairs[i].second);
            t.name = "image_" + std::to_string(i);
            corpus.push_back(std::move(t));
        }
        PipelineConfig cfg;
        cfg.pass1_budget = pass1_budget;
        cfg.pass2_budget = pass2_budget;
        cfg.ert.n_trees = trees;
        cfg.seed = seed;
        cfg.threads = threads;
        return Model(train_pipeline(corpus, cfg).model);
    }

    py::array_t<std::uint8_t> predict(const py::array_t<std::uint8_t>& image,
                                      int threads) const {
        return from_labels(predict_image(model_, to_gray(image), FeatureConfig{}, threads));
    }

    py::array_t<float> predict_proba(const py::array_t<std::uint8_t>& image,
                                     int threads) const {
        const GrayImage im = to_gray(image);
        std::vector<float> proba;
        predict_image(model_, im, FeatureConfig{}, threads, &proba);
        py::array_t<float> a({im.height, im.width});
        std::copy(proba.begin(), proba.end(), a.mutable_data());
        return a;
    }

    py::array_t<double> importances() const {
        const std::vector<double> imp = feature_importances(model_);
        py::array_t<double> a(static_cast<py::ssize_t>(imp.size()));
        std::copy(imp.begin(), imp.end(), a.mutable_data());
        return a;
    }

    void save(const std::filesystem::path& path) const { save_model(model_, path); }
    static Model load(const std::filesystem::path& path) { return Model(load_model(path)); }

    int n_trees() const { return static_cast<int>(model_.trees.size()); }
    std::uint64_t fingerprint() const { return model_.schema_fingerprint; }

private:
    ErtModel model_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Trainable document image binarization";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<IoError>(m, "IoError");
    py::register_exception<ModelError>(m, "ModelError");
    py::register_exception<MetricError>(m, "MetricError");

    m.def("load_image", [](const std::filesystem::path& p) { return from_gray(load_image(p)); },
          py::arg("path"), "Decode a raster file to a (H, W) uint8 array");
    m.def("save_label_png",
          [](const std::filesystem::path& p, const py::array_t<std::uint8_t>& labels,
             bool invert) { save_label_png(p, to_labels(labels), invert); },
          py::arg("path"), py::arg("labels"), py::arg("invert") = false,
          "Write labels as a PNG (text black by default)");
    m.def("load_label_image",
          [](const std::filesystem::path& p) { return from_labels(load_label_image(p)); },
          py::arg("path"));
    m.def("save_gray_png",
          [](const std::filesystem::path& p, const py::array_t<std::uint8_t>& image) {
              save_gray_png(p, to_gray(image));
          },
          py::arg("path"), py::arg("image"));

    m.def("otsu_threshold",
          [](const py::array_t<std::uint8_t>& a) {
              return otsu_threshold(histogram(to_gray(a)));
          },
          py::arg("image"));
    m.def("binarize_otsu",
          [](const py::array_t<std::uint8_t>& a) {
              return from_labels(binarize_otsu(to_gray(a)));
          },
          py::arg("image"));
    m.def("binarize_niblack",
          [](const py::array_t<std::uint8_t>& a, double k, int window) {
              NiblackParams p;
              p.k = k;
              p.window = window;
              return from_labels(binarize_niblack(to_gray(a), p));
          },
          py::arg("image"), py::arg("k") = -0.2, py::arg("window") = 15);
    m.def("binarize_sauvola",
          [](const py::array_t<std::uint8_t>& a, double k, double S, int window) {
              SauvolaParams p;
              p.k = k;
              p.dynamic_range = S;
              p.window = window;
              return from_labels(binarize_sauvola(to_gray(a), p));
          },
          py::arg("image"), py::arg("k") = 0.5, py::arg("S") = 128.0, py::arg("window") = 15);

    m.def("estimate_stroke_width",
          [](const py::array_t<std::uint8_t>& a) {
              return estimate_stroke_width(to_gray(a)).s;
          },
          py::arg("image"));

    m.def("feature_names", []() {
        std::vector<std::string> names;
        for (const auto& e : FeatureSchema::instance().entries()) {
            names.push_back(e.name);
        }
        return names;
    });
    m.def("schema_fingerprint", []() { return FeatureSchema::instance().fingerprint(); });

    m.def("extract_features",
          [](const py::array_t<std::uint8_t>& a, double ltp_tol, double eps_su,
             double sauvola_S, int threads) {
              return from_matrix(extract_features(to_gray(a),
                                                  make_config(ltp_tol, eps_su, sauvola_S),
                                                  resolve_threads(threads)));
          },
          py::arg("image"), py::arg("ltp_tol") = 8.0, py::arg("eps_su") = 1e-6,
          py::arg("sauvola_S") = 128.0, py::arg("threads") = 0,
          "All per-pixel rows, shape (H*W, 142), row-major pixels");
    m.def("extract_features_at",
          [](const py::array_t<std::uint8_t>& a,
             const py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>& idx,
             double ltp_tol, double eps_su, double sauvola_S) {
              std::vector<std::uint32_t> pixels(idx.data(), idx.data() + idx.size());
              return from_matrix(extract_features_at(to_gray(a), pixels,
                                                     make_config(ltp_tol, eps_su, sauvola_S)));
          },
          py::arg("image"), py::arg("pixel_indices"), py::arg("ltp_tol") = 8.0,
          py::arg("eps_su") = 1e-6, py::arg("sauvola_S") = 128.0);

    m.def("f1",
          [](const py::array_t<std::uint8_t>& pred, const py::array_t<std::uint8_t>& gt) {
              return f1_percent(to_labels(pred), to_labels(gt));
          },
          py::arg("pred"), py::arg("gt"), "F-measure in percent");
    m.def("psnr",
          [](const py::array_t<std::uint8_t>& pred, const py::array_t<std::uint8_t>& gt) {
              return psnr_db(to_labels(pred), to_labels(gt));
          },
          py::arg("pred"), py::arg("gt"));
    m.def("drd",
          [](const py::array_t<std::uint8_t>& pred, const py::array_t<std::uint8_t>& gt) {
              return drd(to_labels(pred), to_labels(gt));
          },
          py::arg("pred"), py::arg("gt"));

    py::class_<Model>(m, "Model")
        .def_static("train", &Model::train, py::arg("pairs"),
                    py::arg("pass1_budget") = 9600, py::arg("pass2_budget") = 9600,
                    py::arg("trees") = 100, py::arg("seed") = 42, py::arg("threads") = 0,
                    "Two-pass training on (image, gt) array pairs")
        .def_static("load", &Model::load, py::arg("path"))
        .def("save", &Model::save, py::arg("path"))
        .def("predict", &Model::predict, py::arg("image"), py::arg("threads") = 0)
        .def("predict_proba", &Model::predict_proba, py::arg("image"), py::arg("threads") = 0)
        .def("feature_importances", &Model::importances)
        .def_property_readonly("n_trees", &Model::n_trees)
        .def_property_readonly("schema_fingerprint", &Model::fingerprint);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
