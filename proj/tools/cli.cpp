#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hcrf/descriptor.hpp"
#include "hcrf/errors.hpp"
#include "hcrf/manifest.hpp"
#include "hcrf/parallel.hpp"
#include "hcrf/pipeline.hpp"
#include "hcrf/synthgen.hpp"
#include "hcrf/wavelet.hpp"

namespace hcrf::cli {

namespace {

namespace fs = std::filesystem;

// Bad flag values detected after parsing; reported with exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Reads `key = value` lines into `--key=value` tokens; '#' starts a comment.
std::vector<std::string> config_tokens(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::vector<std::string> tokens;
    std::string line;
    int line_no = 0;
    const auto trim = [](std::string s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) return std::string();
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") {
            throw UsageError(path.string() + ":" + std::to_string(line_no) + ": invalid key");
        }
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

// Splices config-file values in right after the subcommand name so that
// explicit flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::optional<std::string> config;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config requires a file argument");
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!config || rest.empty()) return rest;
    std::vector<std::string> out{rest.front()};
    for (auto& t : config_tokens(*config)) out.push_back(std::move(t));
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !(v >= 0.0)) {
            throw UsageError("invalid lambda grid entry '" + item + "'");
        }
        grid.push_back(v);
    }
    if (grid.empty()) throw UsageError("lambda grid is empty");
    return grid;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
}

HierarchicalModel load_model(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file '" + path.string() + "'");
    return read_hierarchical_model(in);
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
    std::string benchmark = "bimodal";
    std::uint64_t seed = 7;
    int count = 10;
    int size = 32;
    double noise = bimodal::kDefaultNoise;
    std::string out;
};

void write_split(const fs::path& root, const std::string& split,
                 const std::vector<SceneRecord>& records) {
    ensure_directory(root / split);
    std::vector<ManifestEntry> entries;
    for (const SceneRecord& r : records) {
        const fs::path image = fs::path(split) / (r.name + ".ppm");
        const fs::path labels = fs::path(split) / (r.name + ".pgm");
        save_image(r.scene.image, root / image);
        save_label_map(r.scene.labels, root / labels);
        entries.push_back({image, labels});
    }
    write_manifest(root / (split + ".tsv"), entries);
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    if (o.benchmark != "bimodal") throw UsageError("unknown benchmark '" + o.benchmark + "'");
    const Benchmark bench = generate_bimodal_benchmark(o.seed, o.count, o.size, o.noise);
    const fs::path root(o.out);
    ensure_directory(root);
    write_split(root, "train", bench.train);
    write_split(root, "test", bench.test);

    std::ofstream palette(root / "palette.txt", std::ios::trunc);
    const auto names = bimodal::class_names();
    const auto colors = default_palette(bimodal::kNumClasses);
    for (int k = 0; k < bimodal::kNumClasses; ++k) {
        palette << k << ' ' << static_cast<int>(quantize_channel(colors[k].r)) << ' '
                << static_cast<int>(quantize_channel(colors[k].g)) << ' '
                << static_cast<int>(quantize_channel(colors[k].b)) << ' ' << names[k] << '\n';
    }
    if (!palette.flush()) throw IoError("cannot write palette file");

    out << "train=" << bench.train.size() << " test=" << bench.test.size() << " dir=" << root.string()
        << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string manifest;
    std::string out = "model.hcrf";
    int classes = 3;
    int grid = 4;
    int clusters = 3;
    double appearance_weight = 1.0;
    std::string lambda_grid = "0,0.25,0.5,1,2,4";
    double learning_rate = 0.5;
    int epochs = 200;
    std::uint64_t seed = 0;
    int min_cluster_size = 2;
    int max_sweeps = 50;
};

std::vector<LabeledImage> load_dataset(const std::vector<ManifestEntry>& entries, int classes) {
    std::vector<LabeledImage> data;
    data.reserve(entries.size());
    for (const auto& e : entries) {
        RgbImage image = load_image(e.image);
        LabelMap labels = load_label_map(e.labels, classes);
        if (image.width() != labels.width() || image.height() != labels.height()) {
            throw FormatError("'" + e.image.string() + "' and '" + e.labels.string() +
                              "' differ in size");
        }
        data.push_back({std::move(image), std::move(labels)});
    }
    return data;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
    HierarchicalConfig config;
    config.num_classes = o.classes;
    config.grid = o.grid;
    config.clusters = o.clusters;
    config.appearance_weight = o.appearance_weight;
    config.kmeans_seed = o.seed;
    config.min_cluster_size = o.min_cluster_size;
    config.crf.unary.learning_rate = o.learning_rate;
    config.crf.unary.epochs = o.epochs;
    config.crf.lambda_grid = parse_grid(o.lambda_grid);
    config.crf.max_sweeps = o.max_sweeps;
    config.threads = threads_from_env();

    const auto entries = read_manifest(o.manifest);
    if (entries.empty()) throw ArgumentError("manifest '" + o.manifest + "' lists no images");
    const auto data = load_dataset(entries, o.classes);
    const HierarchicalModel model = train_hierarchical(data, config);

    std::ostringstream text;
    write_hierarchical_model(text, model);
    std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open '" + o.out + "' for writing");
    file << text.str();
    if (!file.flush()) throw IoError("write failure on '" + o.out + "'");

    out << "images=" << data.size() << " clusters=" << model.cluster_count()
        << " global_lambda=" << num(model.global.lambda) << "\n";
    for (int c = 0; c < model.cluster_count(); ++c) {
        const auto size = std::count(model.clusters.assignments.begin(),
                                     model.clusters.assignments.end(), c);
        out << "cluster=" << c << " members=" << size << " model="
            << (model.aliases_global(c) ? "global" : "own")
            << " lambda=" << num(model.model_for(c).lambda) << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// label

struct LabelCmdOptions {
    std::string model;
    std::string image;
    std::string manifest;
    std::string truth;
    std::string out_dir;
    bool global_only = false;
    int max_sweeps = 50;
};

struct LabelReport {
    std::string name;
    LabelingResult result;
    std::optional<double> initial_accuracy;
    std::optional<double> final_accuracy;
};

LabelReport label_and_write(const HierarchicalModel& model, const fs::path& image_path,
                            const std::optional<fs::path>& truth_path, const fs::path& out_dir,
                            const LabelOptions& options) {
    const RgbImage image = load_image(image_path);
    std::optional<LabelMap> truth;
    if (truth_path) {
        const ByteRaster raster = load_pgm(*truth_path);
        const int max_label = raster.data.empty()
                                  ? 0
                                  : *std::max_element(raster.data.begin(), raster.data.end());
        if (max_label >= model.num_classes) {
            throw ArgumentError("'" + truth_path->string() + "' uses label " +
                                std::to_string(max_label) + " but the model has only " +
                                std::to_string(model.num_classes) + " classes");
        }
        truth = load_label_map(*truth_path, model.num_classes);
        if (truth->width() != image.width() || truth->height() != image.height()) {
            throw ArgumentError("'" + truth_path->string() + "' does not match the image size");
        }
    }

    LabelReport report{image_path.stem().string(), label_image(model, image, options), {}, {}};
    const auto palette = default_palette(model.num_classes);
    const fs::path stem = out_dir / report.name;
    save_label_map(report.result.initial, stem.string() + ".initial.pgm");
    save_label_map(report.result.final_labels, stem.string() + ".final.pgm");
    save_image(render_label_map(report.result.initial, palette), stem.string() + ".initial.ppm");
    save_image(render_label_map(report.result.final_labels, palette), stem.string() + ".final.ppm");
    if (truth) {
        report.initial_accuracy = pixel_accuracy(report.result.initial, *truth);
        report.final_accuracy = pixel_accuracy(report.result.final_labels, *truth);
    }
    return report;
}

int cmd_label(const LabelCmdOptions& o, std::ostream& out) {
    if (o.image.empty() == o.manifest.empty()) {
        throw UsageError("label needs exactly one of --image or --manifest");
    }
    if (!o.truth.empty() && !o.manifest.empty()) {
        throw UsageError("--truth applies to --image only; a manifest carries its own labels");
    }
    const HierarchicalModel model = load_model(o.model);
    const fs::path out_dir(o.out_dir);
    ensure_directory(out_dir);
    const LabelOptions options{o.max_sweeps, o.global_only};

    std::vector<ManifestEntry> entries;
    if (!o.manifest.empty()) {
        entries = read_manifest(o.manifest);
        if (entries.empty()) throw ArgumentError("manifest '" + o.manifest + "' lists no images");
    }
    const std::size_t n = o.manifest.empty() ? 1 : entries.size();
    std::vector<std::optional<LabelReport>> reports(n);
    parallel_for(n, threads_from_env(), [&](std::size_t i) {
        if (o.manifest.empty()) {
            std::optional<fs::path> truth;
            if (!o.truth.empty()) truth = o.truth;
            reports[i] = label_and_write(model, o.image, truth, out_dir, options);
        } else {
            reports[i] = label_and_write(model, entries[i].image, entries[i].labels, out_dir, options);
        }
    });

    for (const auto& r : reports) {
        out << "image=" << r->name << " cluster=" << r->result.cluster
            << " initial_energy=" << num(r->result.initial_energy)
            << " final_energy=" << num(r->result.final_energy);
        if (r->initial_accuracy) {
            out << " initial_accuracy=" << ratio(*r->initial_accuracy)
                << " final_accuracy=" << ratio(*r->final_accuracy);
        }
        out << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOptions {
    std::string labels;
    std::string image;
    std::string model;
    int classes = kMaxClasses;
    std::string segments;
    std::string out;
    std::string projected;
};

int cmd_segment(const SegmentOptions& o, std::ostream& out) {
    if (o.labels.empty() == o.image.empty()) {
        throw UsageError("segment needs exactly one of --labels or --image");
    }
    if (!o.image.empty() && o.model.empty()) throw UsageError("--image requires --model");
    if (!o.segments.empty() && o.projected.empty()) {
        throw UsageError("--segments requires --projected");
    }

    std::optional<LabelMap> labels;
    if (!o.labels.empty()) {
        labels = load_label_map(o.labels, o.classes);
    } else {
        const HierarchicalModel model = load_model(o.model);
        labels = label_image(model, load_image(o.image)).final_labels;
    }

    const SegmentMap components = connected_components(*labels);
    ByteRaster ids{components.width, components.height, {}};
    ids.data.reserve(components.ids.size());
    for (int id : components.ids) ids.data.push_back(static_cast<std::uint8_t>(id % 256));
    save_pgm(ids, o.out);
    {
        std::ofstream count(o.out + ".count", std::ios::trunc);
        count << components.segment_count << "\n";
        if (!count.flush()) throw IoError("cannot write segment count sidecar");
    }
    out << "segment_count=" << components.segment_count << "\n";

    if (!o.segments.empty()) {
        const ByteRaster raw = load_pgm(o.segments);
        if (raw.width != labels->width() || raw.height != labels->height()) {
            throw ArgumentError("segmentation '" + o.segments + "' does not match the label map size");
        }
        const std::vector<int> raw_ids(raw.data.begin(), raw.data.end());
        const SegmentMap external = segment_map_from_ids(raw.width, raw.height, raw_ids);
        const LabelMap projected = dominant_label_projection(external, *labels);
        save_label_map(projected, o.projected);
        out << "external_segments=" << external.segment_count << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    std::string manifest;
    std::string pred_dir;
    std::string pred_suffix = ".pgm";
    std::string model;
    int classes = 3;
    int max_sweeps = 50;
    bool json = false;
};

struct EvalSummary {
    Metrics metrics;
    double mean_pixel_accuracy = 0.0;
};

nlohmann::ordered_json to_json(const EvalSummary& s) {
    nlohmann::ordered_json j;
    j["pixels"] = s.metrics.total;
    j["pixel_accuracy"] = s.metrics.pixel_accuracy;
    j["mean_pixel_accuracy"] = s.mean_pixel_accuracy;
    auto iou = nlohmann::ordered_json::array();
    for (const auto& v : s.metrics.per_class_iou) iou.push_back(v ? nlohmann::ordered_json(*v) : nullptr);
    j["per_class_iou"] = iou;
    j["mean_iou"] = s.metrics.mean_iou ? nlohmann::ordered_json(*s.metrics.mean_iou) : nullptr;
    return j;
}

void print_summary(std::ostream& out, const std::string& prefix, const EvalSummary& s) {
    out << prefix << "pixels=" << s.metrics.total << "\n";
    out << prefix << "pixel_accuracy=" << ratio(s.metrics.pixel_accuracy) << "\n";
    out << prefix << "mean_pixel_accuracy=" << ratio(s.mean_pixel_accuracy) << "\n";
    for (std::size_t k = 0; k < s.metrics.per_class_iou.size(); ++k) {
        const auto& v = s.metrics.per_class_iou[k];
        out << prefix << "iou." << k << "=" << (v ? ratio(*v) : "absent") << "\n";
    }
    out << prefix << "mean_iou=" << (s.metrics.mean_iou ? ratio(*s.metrics.mean_iou) : "absent")
        << "\n";
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
    if (o.pred_dir.empty() == o.model.empty()) {
        throw UsageError("eval needs exactly one of --pred-dir or --model");
    }
    const auto entries = read_manifest(o.manifest);
    if (entries.empty()) throw ArgumentError("manifest '" + o.manifest + "' lists no images");

    std::optional<HierarchicalModel> model;
    if (!o.model.empty()) model = load_model(o.model);
    const int classes = model ? model->num_classes : o.classes;

    // Per image: the compared labelings (one for --pred-dir, two for --model).
    struct Pair {
        LabelMap truth;
        std::vector<LabelMap> preds;
    };
    std::vector<std::optional<Pair>> pairs(entries.size());
    parallel_for(entries.size(), threads_from_env(), [&](std::size_t i) {
        LabelMap truth = load_label_map(entries[i].labels, classes);
        std::vector<LabelMap> preds;
        if (model) {
            const RgbImage image = load_image(entries[i].image);
            LabelingResult r = label_image(*model, image, {o.max_sweeps, false});
            preds.push_back(std::move(r.initial));
            preds.push_back(std::move(r.final_labels));
        } else {
            const fs::path pred = fs::path(o.pred_dir) /
                                  (entries[i].labels.stem().string() + o.pred_suffix);
            preds.push_back(load_label_map(pred, classes));
        }
        for (const auto& p : preds) {
            if (p.width() != truth.width() || p.height() != truth.height()) {
                throw ArgumentError("prediction for '" + entries[i].labels.string() +
                                    "' differs in size from the ground truth");
            }
        }
        pairs[i] = Pair{std::move(truth), std::move(preds)};
    });

    const std::size_t variants = model ? 2 : 1;
    std::vector<EvalSummary> summaries(variants);
    for (std::size_t v = 0; v < variants; ++v) {
        MetricsAccumulator acc(classes);
        double mean = 0.0;
        for (const auto& p : pairs) {
            acc.add(p->preds[v], p->truth);
            mean += pixel_accuracy(p->preds[v], p->truth);
        }
        summaries[v] = {acc.result(), mean / static_cast<double>(pairs.size())};
    }

    if (o.json) {
        nlohmann::ordered_json j;
        j["images"] = entries.size();
        if (model) {
            j["global"] = to_json(summaries[0]);
            j["hierarchical"] = to_json(summaries[1]);
        } else {
            j.update(to_json(summaries[0]));
        }
        out << j.dump(2) << "\n";
    } else {
        out << "images=" << entries.size() << "\n";
        if (model) {
            print_summary(out, "global.", summaries[0]);
            print_summary(out, "hierarchical.", summaries[1]);
        } else {
            print_summary(out, "", summaries[0]);
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// wavelet

struct WaveletOptions {
    std::string image;
    int levels = 1;
    double keep = 1.0;
    std::string out;
    std::string coeffs;
};

// Detail and approximation magnitudes arranged in the usual nested layout.
Matrix coefficient_mosaic(const WaveletPyramid& p) {
    int rows = p.approximation.rows();
    int cols = p.approximation.cols();
    for (const auto& level : p.details) {
        rows += level.band(Subband::LH).rows();
        cols += level.band(Subband::HL).cols();
    }
    Matrix mosaic(rows, cols);
    const auto place = [&](const Matrix& m, int r0, int c0) {
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) mosaic(r0 + r, c0 + c) = std::abs(m(r, c));
        }
    };
    place(p.approximation, 0, 0);
    int ch = p.approximation.rows();
    int cw = p.approximation.cols();
    for (int l = p.levels() - 1; l >= 0; --l) {
        const DetailLevel& level = p.details[l];
        place(level.band(Subband::HL), 0, cw);
        place(level.band(Subband::LH), ch, 0);
        place(level.band(Subband::HH), ch, cw);
        ch += level.band(Subband::LH).rows();
        cw += level.band(Subband::HL).cols();
    }
    return mosaic;
}

int cmd_wavelet(const WaveletOptions& o, std::ostream& out) {
    const RgbImage image = load_image(o.image);
    const int w = image.width();
    const int h = image.height();

    std::array<Matrix, 3> channels{Matrix(h, w), Matrix(h, w), Matrix(h, w)};
    for (std::size_t i = 0; i < image.size(); ++i) {
        channels[0].data()[i] = image[i].r;
        channels[1].data()[i] = image[i].g;
        channels[2].data()[i] = image[i].b;
    }
    std::array<Matrix, 3> recon;
    std::size_t coefficient_count = 0;
    std::size_t kept = 0;
    for (int c = 0; c < 3; ++c) {
        const WaveletPyramid compressed =
            threshold_compress(haar_forward_2d(channels[c], o.levels), o.keep);
        coefficient_count += compressed.detail_count();
        for (const auto& level : compressed.details) {
            for (const auto& band : level.bands) {
                kept += std::count_if(band.data().begin(), band.data().end(),
                                      [](double v) { return v != 0.0; });
            }
        }
        recon[c] = haar_inverse_2d(compressed);
    }

    std::vector<Rgb> pixels(image.size());
    double squared_error = 0.0;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = {std::clamp(recon[0].data()[i], 0.0, 1.0), std::clamp(recon[1].data()[i], 0.0, 1.0),
                     std::clamp(recon[2].data()[i], 0.0, 1.0)};
        const auto err = [](double a, double b) {
            const double d = static_cast<double>(quantize_channel(a)) - quantize_channel(b);
            return d * d;
        };
        squared_error += err(pixels[i].r, image[i].r) + err(pixels[i].g, image[i].g) +
                         err(pixels[i].b, image[i].b);
    }
    const double mse = squared_error / (3.0 * static_cast<double>(pixels.size()));
    const double psnr = mse == 0.0 ? std::numeric_limits<double>::infinity()
                                   : 10.0 * std::log10(255.0 * 255.0 / mse);
    save_image(RgbImage(w, h, std::move(pixels)), o.out);

    if (!o.coeffs.empty()) {
        const Matrix mosaic = coefficient_mosaic(haar_forward_2d(to_matrix(to_grayscale(image)), o.levels));
        double peak = 0.0;
        for (double v : mosaic.data()) peak = std::max(peak, std::log1p(v));
        std::vector<Rgb> gray(mosaic.data().size());
        for (std::size_t i = 0; i < gray.size(); ++i) {
            const double g = peak > 0.0 ? std::log1p(mosaic.data()[i]) / peak : 0.0;
            gray[i] = {g, g, g};
        }
        save_image(RgbImage(mosaic.cols(), mosaic.rows(), std::move(gray)), o.coeffs);
    }

    out << "levels=" << o.levels << " coefficients=" << coefficient_count << " kept=" << kept
        << " psnr=" << (std::isinf(psnr) ? std::string("inf") : ratio(psnr)) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// descriptor

struct DescriptorOptions {
    std::string image;
    std::string labels;
    int classes = 3;
    int grid = 4;
    double appearance_weight = 1.0;
};

int cmd_descriptor(const DescriptorOptions& o, std::ostream& out) {
    const DescriptorConfig config{o.grid, o.classes, o.appearance_weight};
    config.validate();
    const RgbImage image = load_image(o.image);
    const LabelMap labels = load_label_map(o.labels, o.classes);
    const auto d = label_descriptor(image, labels, config);
    out << "# descriptor classes=" << o.classes << " grid=" << o.grid
        << " positional=" << config.positional_length()
        << " appearance=" << config.appearance_length() << " length=" << d.size() << "\n";
    for (double v : d) out << num(v) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

CLI::Validator keep_fraction_validator() {
    return CLI::Validator(
        [](std::string& s) -> std::string {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(s, &used);
                if (used != s.size()) return "keep fraction must be a number";
            } catch (const std::exception&) {
                return "keep fraction must be a number";
            }
            if (!(v > 0.0 && v <= 1.0)) return "keep fraction must lie in (0, 1]";
            return {};
        },
        "FRACTION in (0,1]");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical CRF image labeling toolkit", "hcrf"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");
    const auto add_config = [](CLI::App* sub) {
        // Consumed before parsing; registered only so it shows up in --help.
        sub->add_option("--config", "File of 'key = value' lines; flags override it");
    };

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
    synth_cmd->add_option("--benchmark", synth.benchmark, "Benchmark name (bimodal)");
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");
    synth_cmd->add_option("--count", synth.count, "Scenes per family");
    synth_cmd->add_option("--size", synth.size, "Scene width and height");
    synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    add_config(synth_cmd);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train a hierarchical CRF model");
    train_cmd->add_option("--manifest", train.manifest, "Training manifest")->required();
    train_cmd->add_option("--out", train.out, "Model output path");
    train_cmd->add_option("--classes", train.classes, "Class count K")->check(CLI::Range(1, kMaxClasses));
    train_cmd->add_option("--grid", train.grid, "Descriptor grid cells per axis")->check(CLI::PositiveNumber);
    train_cmd->add_option("--clusters", train.clusters, "Number of clusters")->check(CLI::PositiveNumber);
    train_cmd->add_option("--appearance-weight", train.appearance_weight)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--lambda-grid", train.lambda_grid, "Comma-separated pairwise weights");
    train_cmd->add_option("--learning-rate", train.learning_rate)->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train.epochs)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--seed", train.seed, "k-means seed");
    train_cmd->add_option("--min-cluster-size", train.min_cluster_size)->check(CLI::PositiveNumber);
    train_cmd->add_option("--max-sweeps", train.max_sweeps)->check(CLI::PositiveNumber);
    add_config(train_cmd);

    LabelCmdOptions label;
    auto* label_cmd = app.add_subcommand("label", "Label images with a trained model");
    label_cmd->add_option("--model", label.model, "Model file")->required();
    label_cmd->add_option("--image", label.image, "Image to label");
    label_cmd->add_option("--manifest", label.manifest, "Label every image of a manifest");
    label_cmd->add_option("--truth", label.truth, "Ground-truth label map for --image");
    label_cmd->add_option("--out-dir", label.out_dir, "Output directory")->required();
    label_cmd->add_flag("--global-only", label.global_only, "Skip cluster retrieval and relabeling");
    label_cmd->add_option("--max-sweeps", label.max_sweeps)->check(CLI::PositiveNumber);
    add_config(label_cmd);

    SegmentOptions segment;
    auto* segment_cmd = app.add_subcommand("segment", "Segment a label map into components");
    segment_cmd->add_option("--labels", segment.labels, "Label map (PGM)");
    segment_cmd->add_option("--image", segment.image, "Image to label first (needs --model)");
    segment_cmd->add_option("--model", segment.model, "Model file");
    segment_cmd->add_option("--classes", segment.classes, "Class count of --labels")
        ->check(CLI::Range(1, kMaxClasses));
    segment_cmd->add_option("--segments", segment.segments, "External segmentation (PGM of ids)");
    segment_cmd->add_option("--out", segment.out, "Segment id PGM output")->required();
    segment_cmd->add_option("--projected", segment.projected, "Dominant-label projection output");
    add_config(segment_cmd);

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
    eval_cmd->add_option("--manifest", eval.manifest, "Ground-truth manifest")->required();
    eval_cmd->add_option("--pred-dir", eval.pred_dir, "Directory of predicted label maps");
    eval_cmd->add_option("--pred-suffix", eval.pred_suffix, "Suffix replacing the label file extension");
    eval_cmd->add_option("--model", eval.model, "Label with this model and compare global vs hierarchical");
    eval_cmd->add_option("--classes", eval.classes)->check(CLI::Range(1, kMaxClasses));
    eval_cmd->add_option("--max-sweeps", eval.max_sweeps)->check(CLI::PositiveNumber);
    eval_cmd->add_flag("--json", eval.json, "Emit JSON");
    add_config(eval_cmd);

    WaveletOptions wavelet;
    auto* wavelet_cmd = app.add_subcommand("wavelet", "Haar compress and reconstruct an image");
    wavelet_cmd->add_option("--image", wavelet.image, "Input image")->required();
    wavelet_cmd->add_option("--levels", wavelet.levels, "Decomposition depth");
    wavelet_cmd->add_option("--keep", wavelet.keep, "Fraction of detail coefficients kept")
        ->check(keep_fraction_validator());
    wavelet_cmd->add_option("--out", wavelet.out, "Reconstructed PPM")->required();
    wavelet_cmd->add_option("--coeffs", wavelet.coeffs, "Coefficient magnitude PPM");
    add_config(wavelet_cmd);

    DescriptorOptions descriptor;
    auto* descriptor_cmd = app.add_subcommand("descriptor", "Print the label-based descriptor");
    descriptor_cmd->add_option("--image", descriptor.image)->required();
    descriptor_cmd->add_option("--labels", descriptor.labels)->required();
    descriptor_cmd->add_option("--classes", descriptor.classes)->check(CLI::Range(1, kMaxClasses));
    descriptor_cmd->add_option("--grid", descriptor.grid)->check(CLI::PositiveNumber);
    descriptor_cmd->add_option("--appearance-weight", descriptor.appearance_weight)
        ->check(CLI::NonNegativeNumber);
    add_config(descriptor_cmd);

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth, out);
        if (*train_cmd) return cmd_train(train, out);
        if (*label_cmd) return cmd_label(label, out);
        if (*segment_cmd) return cmd_segment(segment, out);
        if (*eval_cmd) return cmd_eval(eval, out);
        if (*wavelet_cmd) return cmd_wavelet(wavelet, out);
        if (*descriptor_cmd) return cmd_descriptor(descriptor, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace hcrf::cli
