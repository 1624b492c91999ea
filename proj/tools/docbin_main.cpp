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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "docbin/corpus.hpp"
#include "docbin/io.hpp"
#include "docbin/learner.hpp"
#include "docbin/metrics.hpp"
#include "docbin/parallel.hpp"
#include "docbin/rng.hpp"
#include "docbin/sampler.hpp"
#include "docbin/thresholders.hpp"

namespace fs = std::filesystem;
using namespace docbin;

namespace {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct RunOptions {
    std::string images_dir;
    std::string gt_dir;
    std::string manifest;
    std::string split;

    std::size_t pass1_budget = 9600;
    std::size_t pass2_budget = 9600;
    double niblack_k = -0.2;
    double sauvola_k = 0.5;
    double sauvola_S = 128.0;
    double ltp_tol = 8.0;
    double eps_su = 1e-6;
    int n_trees = 100;
    int k_features = 12;
    int min_samples_split = 2;
    int max_depth = 0;
    bool cv = false;

    std::uint64_t seed = 42;
    int threads = 0;

    PipelineConfig pipeline() const {
        PipelineConfig cfg;
        cfg.pass1_budget = pass1_budget;
        cfg.pass2_budget = pass2_budget;
        cfg.features.ltp_tol = ltp_tol;
        cfg.features.eps_su = eps_su;
        cfg.features.sauvola_dynamic_range = sauvola_S;
        cfg.niblack_k = niblack_k;
        cfg.ert.n_trees = n_trees;
        cfg.ert.k_features = k_features;
        cfg.ert.min_samples_split = min_samples_split;
        cfg.ert.max_depth = max_depth;
        cfg.run_cv = cv;
        cfg.seed = seed;
        cfg.threads = threads;
        return cfg;
    }
};

void add_corpus_options(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--images", opt.images_dir, "Directory of input images");
    cmd->add_option("--gt", opt.gt_dir, "Directory of ground-truth images (stem-matched)");
    cmd->add_option("--manifest", opt.manifest,
                    "Manifest file: image<TAB>gt[<TAB>split] per line");
    cmd->add_option("--split", opt.split, "Keep only manifest rows with this split tag");
}

void add_tunables(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--pass1-budget", opt.pass1_budget, "Samples per image, first pass")
        ->capture_default_str();
    cmd->add_option("--pass2-budget", opt.pass2_budget,
                    "Erroneous samples per image, second pass")
        ->capture_default_str();
    cmd->add_option("--niblack-k", opt.niblack_k, "Niblack k for subclass labeling")
        ->capture_default_str();
    cmd->add_option("--sauvola-k", opt.sauvola_k, "Sauvola k (baseline)")
        ->capture_default_str();
    cmd->add_option("--sauvola-S", opt.sauvola_S, "Sauvola dynamic range S")
        ->capture_default_str();
    cmd->add_option("--ltp-tol", opt.ltp_tol, "Ternary-pattern tolerance")
        ->capture_default_str();
    cmd->add_option("--eps-su", opt.eps_su, "Contrast denominator epsilon")
        ->capture_default_str();
    cmd->add_option("--trees", opt.n_trees, "Forest size")->capture_default_str();
    cmd->add_option("--k-features", opt.k_features, "Candidate features per node")
        ->capture_default_str();
    cmd->add_option("--min-samples-split", opt.min_samples_split,
                    "Smallest splittable node")
        ->capture_default_str();
    cmd->add_option("--max-depth", opt.max_depth, "Depth limit (0 = unlimited)")
        ->capture_default_str();
    cmd->add_flag("--cv", opt.cv, "Select forest hyperparameters by 10-fold CV");
}

std::vector<CorpusEntry> resolve_corpus(const RunOptions& opt, bool require_gt) {
    if (!opt.manifest.empty()) {
        auto entries = load_manifest(opt.manifest, opt.split);
        if (require_gt) {
            for (const CorpusEntry& e : entries) {
                if (!e.has_gt()) {
                    throw DataError("manifest row without ground truth: " + e.image.string());
                }
            }
        }
        if (entries.empty()) {
            throw DataError("manifest selected no images");
        }
        return entries;
    }
    if (opt.images_dir.empty()) {
        throw CLI::ValidationError("corpus", "--images or --manifest is required");
    }
    return pair_directories(opt.images_dir, opt.gt_dir, require_gt);
}

std::vector<TrainingImage> load_corpus(const std::vector<CorpusEntry>& entries) {
    std::vector<TrainingImage> corpus;
    corpus.reserve(entries.size());
    for (const CorpusEntry& e : entries) {
        TrainingImage t;
        t.image = load_image(e.image);
        t.gt = load_label_image(e.gt);
        t.name = e.image.stem().string();
        corpus.push_back(std::move(t));
    }
    return corpus;
}

void write_effective_config(const CLI::App& app, const fs::path& path) {
    std::ofstream f(path, std::ios::trunc);
    f << app.config_to_str(true, true);
}

void write_importance_report(const std::vector<double>& imp, const fs::path& path) {
    const FeatureSchema& schema = FeatureSchema::instance();
    std::ofstream f(path, std::ios::trunc);
    f << "# per-family importance (overall = sum of member channels)\n";
    f << "family\tdim\toverall\tdimensional\n";
    for (const FamilyImportance& fi : family_importances(imp, schema)) {
        f << fi.family << '\t' << fi.dim << '\t' << fi.overall << '\t' << fi.dimensional
          << '\n';
    }
    f << "\n# per-channel importance\nchannel\timportance\n";
    for (int i = 0; i < schema.total_dim(); ++i) {
        f << schema.entries()[static_cast<std::size_t>(i)].name << '\t'
          << imp[static_cast<std::size_t>(i)] << '\n';
    }
}

int cmd_train(const RunOptions& opt, const CLI::App& app, const std::string& model_path,
              const std::string& report_dir) {
    const auto entries = resolve_corpus(opt, /*require_gt=*/true);
    const auto corpus = load_corpus(entries);
    std::cerr << "training on " << corpus.size() << " image(s)\n";
    const PipelineResult result = train_pipeline(corpus, opt.pipeline());
    save_model(result.model, model_path);
    std::cerr << "model written to " << model_path << " (" << result.samples.size()
              << " samples)\n";

    const fs::path reports = report_dir.empty() ? fs::path(model_path).parent_path()
                                                : fs::path(report_dir);
    if (!reports.empty()) {
        fs::create_directories(reports);
    }
    write_importance_report(result.importances,
                            reports / (fs::path(model_path).stem().string() + "_importance.tsv"));
    if (result.cv) {
        std::ofstream f(reports / (fs::path(model_path).stem().string() + "_cv.tsv"),
                        std::ios::trunc);
        f << "fold\tf1\n";
        for (std::size_t i = 0; i < result.cv->fold_f1.size(); ++i) {
            f << i << '\t' << result.cv->fold_f1[i] << '\n';
        }
        f << "mean\t" << result.cv->mean_f1 << "\nstd\t" << result.cv->std_f1 << '\n';
        f << "chosen_trees\t" << result.cv->chosen.n_trees << '\n';
        f << "chosen_min_samples_split\t" << result.cv->chosen.min_samples_split << '\n';
    }
    write_effective_config(app, reports / (fs::path(model_path).stem().string() + "_config.ini"));
    return kExitOk;
}

int cmd_predict(const RunOptions& opt, const std::string& model_path,
                const std::vector<std::string>& inputs, const std::string& out_dir,
                bool invert) {
    const ErtModel model = load_model(model_path);
    fs::create_directories(out_dir);
    FeatureConfig fcfg;
    fcfg.ltp_tol = opt.ltp_tol;
    fcfg.eps_su = opt.eps_su;
    fcfg.sauvola_dynamic_range = opt.sauvola_S;
    for (const std::string& input : inputs) {
        const auto start = std::chrono::steady_clock::now();
        const GrayImage im = load_image(input);
        const LabelImage labels = predict_image(model, im, fcfg, opt.threads);
        const fs::path out = fs::path(out_dir) / (fs::path(input).stem().string() + ".png");
        save_label_png(out, labels, invert);
        const auto elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        std::cerr << fs::path(input).filename().string() << ": " << im.width << "x"
                  << im.height << " decoded in " << elapsed << " s -> " << out.string()
                  << "\n";
    }
    return kExitOk;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& report_path) {
    std::vector<std::string> unmatched;
    const EvalReport report = evaluate_corpus(pred_dir, gt_dir, &unmatched);
    for (const std::string& u : unmatched) {
        std::cerr << "unmatched: " << u << "\n";
    }
    auto print_record = [](std::ostream& os, const ImageEval& e) {
        os << e.name << '\t' << e.f1 << '\t' << e.psnr << '\t';
        if (e.drd_defined) {
            os << e.drd;
        } else {
            os << "undefined";
        }
        os << '\t' << e.tp << '\t' << e.fp << '\t' << e.fn << '\n';
    };
    std::cout << "name\tf1\tpsnr\tdrd\ttp\tfp\tfn\n";
    for (const ImageEval& e : report.images) {
        print_record(std::cout, e);
    }
    std::cout << "mean\t" << report.mean_f1 << '\t' << report.mean_psnr << '\t'
              << report.mean_drd << "\t-\t-\t-\n";
    if (!report_path.empty()) {
        std::ofstream f(report_path, std::ios::trunc);
        f << "name\tf1\tpsnr\tdrd\ttp\tfp\tfn\n";
        for (const ImageEval& e : report.images) {
            print_record(f, e);
        }
        f << "mean\t" << report.mean_f1 << '\t' << report.mean_psnr << '\t'
          << report.mean_drd << "\t-\t-\t-\n";
    }
    return kExitOk;
}

int cmd_features(const RunOptions& opt, const std::string& input,
                 const std::string& channels, const std::string& out_dir) {
    const FeatureSchema& schema = FeatureSchema::instance();
    std::vector<int> selected;
    if (channels == "all") {
        for (int i = 0; i < schema.total_dim(); ++i) {
            selected.push_back(i);
        }
    } else {
        std::stringstream ss(channels);
        std::string name;
        while (std::getline(ss, name, ',')) {
            const int idx = schema.index_of(name);
            if (idx < 0) {
                std::string valid;
                for (const auto& e : schema.entries()) {
                    valid += e.name + " ";
                }
                throw CLI::ValidationError("--channels",
                                           "unknown channel '" + name +
                                               "'; valid names: " + valid);
            }
            selected.push_back(idx);
        }
    }
    const GrayImage im = load_image(input);
    FeatureConfig fcfg;
    fcfg.ltp_tol = opt.ltp_tol;
    fcfg.eps_su = opt.eps_su;
    fcfg.sauvola_dynamic_range = opt.sauvola_S;
    const FeatureExtractor extractor(im, fcfg);
    fs::create_directories(out_dir);

    // One streaming pass fills every selected channel.
    const int dim = schema.total_dim();
    std::vector<std::vector<float>> maps(selected.size());
    for (auto& m : maps) {
        m.resize(im.size());
    }
    parallel_blocks(0, im.height, resolve_threads(opt.threads),
                    [&](std::int64_t y0, std::int64_t y1) {
                        std::vector<float> row(static_cast<std::size_t>(im.width) * dim);
                        for (std::int64_t y = y0; y < y1; ++y) {
                            extractor.extract_row(static_cast<int>(y), row.data());
                            for (std::size_t c = 0; c < selected.size(); ++c) {
                                for (int x = 0; x < im.width; ++x) {
                                    maps[c][static_cast<std::size_t>(y) * im.width + x] =
                                        row[static_cast<std::size_t>(x) * dim + selected[c]];
                                }
                            }
                        }
                    });
    for (std::size_t c = 0; c < selected.size(); ++c) {
        float lo = maps[c][0], hi = maps[c][0];
        for (const float v : maps[c]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        GrayImage out = GrayImage::create(im.width, im.height);
        const float range = hi - lo;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const float v = range > 0.0f ? (maps[c][i] - lo) / range : 0.0f;
            out.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
        }
        const std::string& name = schema.entries()[static_cast<std::size_t>(selected[c])].name;
        save_gray_png(fs::path(out_dir) / (name + ".png"), out);
    }
    std::cerr << "wrote " << selected.size() << " channel map(s) to " << out_dir
              << " (stroke width " << extractor.stroke_width() << ")\n";
    return kExitOk;
}

int cmd_baseline(const RunOptions& opt, const std::string& method,
                 const std::string& input, const std::string& out_path, int window,
                 bool invert) {
    const GrayImage im = load_image(input);
    LabelImage labels;
    int effective_window = window;
    if (effective_window == 0) {
        const StrokeWidth s = estimate_stroke_width(im);
        effective_window = default_threshold_window(s.s);
    }
    if (method == "otsu") {
        labels = binarize_otsu(im);
    } else if (method == "niblack") {
        NiblackParams p;
        p.k = opt.niblack_k;
        p.window = effective_window;
        labels = binarize_niblack(im, p);
    } else if (method == "sauvola") {
        SauvolaParams p;
        p.k = opt.sauvola_k;
        p.dynamic_range = opt.sauvola_S;
        p.window = effective_window;
        labels = binarize_sauvola(im, p);
    } else {
        throw CLI::ValidationError("--method", "must be one of: otsu, niblack, sauvola");
    }
    save_label_png(out_path, labels, invert);
    return kExitOk;
}

int cmd_sample(const RunOptions& opt, const std::string& out_dir) {
    const auto entries = resolve_corpus(opt, /*require_gt=*/true);
    const auto corpus = load_corpus(entries);
    fs::create_directories(out_dir);
    const Rng base(opt.seed);
    const PipelineConfig cfg = opt.pipeline();
    std::cout << "image\trows";
    for (int c = 0; c < 16; ++c) {
        std::cout << "\tsc" << c;
    }
    std::cout << "\n";
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const FeatureExtractor extractor(corpus[i].image, cfg.features);
        const int s = extractor.stroke_width();
        NiblackParams niblack;
        niblack.k = cfg.niblack_k;
        niblack.window = default_threshold_window(s);
        const SubclassMap sm = subclass_map(corpus[i].image, corpus[i].gt, s, niblack);
        const auto pixels = balanced_sample(sm, cfg.pass1_budget, base.fork(2 * i).seed());
        SampleSet set;
        set.rng_seed = opt.seed;
        set.append(extractor.extract_at(pixels), sm, pixels, static_cast<std::uint32_t>(i));
        save_samples(set, fs::path(out_dir) / (corpus[i].name + ".smp"));

        std::array<std::uint64_t, 16> drawn{};
        for (const std::uint32_t p : pixels) {
            ++drawn[sm.codes[p]];
        }
        std::cout << corpus[i].name << '\t' << set.size();
        for (int c = 0; c < 16; ++c) {
            std::cout << '\t' << drawn[c];
        }
        std::cout << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"docbin: trainable document image binarization"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value config file");

    RunOptions opt;
    app.add_option("--seed", opt.seed, "Random seed")->capture_default_str();
    app.add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();

    // train
    CLI::App* train = app.add_subcommand("train", "Two-pass training on a labeled corpus");
    std::string model_path = "model.bin";
    std::string report_dir;
    add_corpus_options(train, opt);
    add_tunables(train, opt);
    train->add_option("--out", model_path, "Output model file")->capture_default_str();
    train->add_option("--report-dir", report_dir,
                      "Directory for importance/CV/config reports (default: model dir)");

    // predict
    CLI::App* predict = app.add_subcommand("predict", "Binarize images with a trained model");
    std::string predict_model;
    std::vector<std::string> predict_inputs;
    std::string predict_out = "predictions";
    bool predict_invert = false;
    predict->add_option("--model", predict_model, "Model file")->required();
    predict->add_option("images", predict_inputs, "Input images")->required();
    predict->add_option("--out", predict_out, "Output directory")->capture_default_str();
    predict->add_flag("--invert", predict_invert, "Emit white text on black");
    predict->add_option("--ltp-tol", opt.ltp_tol, "Ternary-pattern tolerance")
        ->capture_default_str();
    predict->add_option("--eps-su", opt.eps_su, "Contrast denominator epsilon")
        ->capture_default_str();
    predict->add_option("--sauvola-S", opt.sauvola_S, "Sauvola dynamic range S")
        ->capture_default_str();

    // eval
    CLI::App* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    std::string eval_pred, eval_gt, eval_report;
    eval->add_option("--pred", eval_pred, "Prediction directory")->required();
    eval->add_option("--gt", eval_gt, "Ground-truth directory")->required();
    eval->add_option("--report", eval_report, "Also write the records to this TSV file");

    // features
    CLI::App* features = app.add_subcommand("features", "Dump feature channels as PNGs");
    std::string feat_input, feat_channels = "all", feat_out = "features";
    features->add_option("image", feat_input, "Input image")->required();
    features->add_option("--channels", feat_channels,
                         "'all' or a comma-separated list of channel names")
        ->capture_default_str();
    features->add_option("--out", feat_out, "Output directory")->capture_default_str();
    features->add_option("--ltp-tol", opt.ltp_tol, "Ternary-pattern tolerance")
        ->capture_default_str();
    features->add_option("--eps-su", opt.eps_su, "Contrast denominator epsilon")
        ->capture_default_str();

    // baseline
    CLI::App* baseline = app.add_subcommand("baseline", "Classical thresholding baselines");
    std::string base_method, base_input, base_out = "baseline.png";
    int base_window = 0;
    bool base_invert = false;
    baseline->add_option("--method", base_method, "otsu | niblack | sauvola")->required();
    baseline->add_option("image", base_input, "Input image")->required();
    baseline->add_option("--out", base_out, "Output PNG")->capture_default_str();
    baseline->add_option("--window", base_window,
                         "Local window (0 = derive from stroke width)")
        ->capture_default_str();
    baseline->add_flag("--invert", base_invert, "Emit white text on black");
    baseline->add_option("--niblack-k", opt.niblack_k, "Niblack k")->capture_default_str();
    baseline->add_option("--sauvola-k", opt.sauvola_k, "Sauvola k")->capture_default_str();
    baseline->add_option("--sauvola-S", opt.sauvola_S, "Sauvola dynamic range S")
        ->capture_default_str();

    // sample
    CLI::App* sample = app.add_subcommand("sample", "Write balanced per-image sample files");
    std::string sample_out = "samples";
    add_corpus_options(sample, opt);
    add_tunables(sample, opt);
    sample->add_option("--out", sample_out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) {
            return cmd_train(opt, app, model_path, report_dir);
        }
        if (predict->parsed()) {
            return cmd_predict(opt, predict_model, predict_inputs, predict_out,
                               predict_invert);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_pred, eval_gt, eval_report);
        }
        if (features->parsed()) {
            return cmd_features(opt, feat_input, feat_channels, feat_out);
        }
        if (baseline->parsed()) {
            return cmd_baseline(opt, base_method, base_input, base_out, base_window,
                                base_invert);
        }
        if (sample->parsed()) {
            return cmd_sample(opt, sample_out);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitData;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitData;
    } catch (const MetricError& e) {
        std::cerr << "metric error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
