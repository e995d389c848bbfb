#include "hcrf/crf.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "hcrf/errors.hpp"
#include "hcrf/wavelet.hpp"
#include "text_format.hpp"

namespace hcrf {

PixelFeatureMap::PixelFeatureMap(int width_, int height_, int dim_, std::vector<double> features_)
    : width(width_), height(height_), dim(dim_), features(std::move(features_)) {
    if (dim < 1) throw ArgumentError("feature dimension must be at least 1");
    if (features.size() != checked_pixel_count(width, height) * static_cast<std::size_t>(dim)) {
        throw ArgumentError("feature buffer length does not match width * height * dim");
    }
}

PixelFeatureMap extract_features(const RgbImage& image) {
    const int w = image.width();
    const int h = image.height();
    const GrayImage gray = to_grayscale(image);

    const int levels = std::min(2, max_haar_levels(h, w));
    Matrix texture(h, w);
    if (levels >= 1) texture = wavelet_energy_feature(gray, levels);

    std::vector<double> out(image.size() * kFeatureDim);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = image.index(x, y);
            const Rgb& c = image[p];
            Rgb mean{};
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const Rgb& n = image.at(std::clamp(x + dx, 0, w - 1), yy);
                    mean.r += n.r;
                    mean.g += n.g;
                    mean.b += n.b;
                }
            }
            double* f = &out[p * kFeatureDim];
            f[kFeatBias] = 1.0;
            f[kFeatRed] = c.r;
            f[kFeatGreen] = c.g;
            f[kFeatBlue] = c.b;
            f[kFeatX] = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
            f[kFeatY] = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
            f[kFeatMeanRed] = mean.r / 9.0;
            f[kFeatMeanGreen] = mean.g / 9.0;
            f[kFeatMeanBlue] = mean.b / 9.0;
            f[kFeatGray] = gray[p];
            f[kFeatWaveletEnergy] = texture(y, x);
        }
    }
    return PixelFeatureMap(w, h, kFeatureDim, std::move(out));
}

// ---------------------------------------------------------------------------
// Energy terms

UnaryModel::UnaryModel(int num_classes_, int dim_, std::vector<double> weights_)
    : num_classes(num_classes_), dim(dim_), weights(std::move(weights_)) {
    if (num_classes < 1 || num_classes > kMaxClasses) {
        throw ArgumentError("unary model class count out of range");
    }
    if (dim < 1) throw ArgumentError("unary model dimension must be at least 1");
    if (weights.size() != static_cast<std::size_t>(num_classes) * dim) {
        throw ArgumentError("unary weight matrix must be num_classes x dim");
    }
    for (double v : weights) {
        if (!std::isfinite(v)) throw ArgumentError("unary weights must be finite");
    }
}

UnaryModel UnaryModel::zeros(int num_classes, int dim) {
    return UnaryModel(num_classes, dim,
                      std::vector<double>(static_cast<std::size_t>(num_classes) * dim, 0.0));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Fills scores with W f and returns logsumexp of the scores.
double scores_and_lse(const UnaryModel& model, std::span<const double> f, std::span<double> scores) {
    double max_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < model.num_classes; ++k) {
        scores[k] = dot(model.row(k), f);
        max_score = std::max(max_score, scores[k]);
    }
    double sum = 0.0;
    for (int k = 0; k < model.num_classes; ++k) sum += std::exp(scores[k] - max_score);
    return max_score + std::log(sum);
}

void check_feature_length(const UnaryModel& model, std::span<const double> f) {
    if (f.size() != static_cast<std::size_t>(model.dim)) {
        throw ArgumentError("feature vector length " + std::to_string(f.size()) +
                            " does not match model dimension " + std::to_string(model.dim));
    }
}

}  // namespace

double unary_energy(const UnaryModel& model, std::span<const double> f, int k) {
    if (k < 0 || k >= model.num_classes) {
        throw ArgumentError("class index " + std::to_string(k) + " out of range");
    }
    check_feature_length(model, f);
    std::vector<double> scores(model.num_classes);
    const double lse = scores_and_lse(model, f, scores);
    return lse - scores[k];
}

void unary_energies(const UnaryModel& model, std::span<const double> f, std::span<double> out) {
    check_feature_length(model, f);
    if (out.size() != static_cast<std::size_t>(model.num_classes)) {
        throw ArgumentError("output span must hold one energy per class");
    }
    const double lse = scores_and_lse(model, f, out);
    for (double& s : out) s = lse - s;
}

double squared_color_distance(const Rgb& a, const Rgb& b) {
    const double dr = a.r - b.r;
    const double dg = a.g - b.g;
    const double db = a.b - b.b;
    return dr * dr + dg * dg + db * db;
}

double pairwise_energy(const PairwiseParams& params, const Rgb& ci, const Rgb& cj, int ki, int kj) {
    if (ki == kj) return 0.0;
    return params.lambda * std::exp(-params.beta * squared_color_distance(ci, cj));
}

double contrast_beta(const RgbImage& image) {
    const int w = image.width();
    const int h = image.height();
    double sum = 0.0;
    std::size_t edges = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w) {
                sum += squared_color_distance(image.at(x, y), image.at(x + 1, y));
                ++edges;
            }
            if (y + 1 < h) {
                sum += squared_color_distance(image.at(x, y), image.at(x, y + 1));
                ++edges;
            }
        }
    }
    if (edges == 0 || sum == 0.0) return 0.0;
    return 1.0 / (2.0 * (sum / static_cast<double>(edges)));
}

GridEnergy::GridEnergy(const CrfModel& model, const RgbImage& image,
                       const PixelFeatureMap& features)
    : width_(image.width()), height_(image.height()), num_classes_(model.num_classes()) {
    if (features.width != width_ || features.height != height_) {
        throw ArgumentError("feature map dimensions do not match the image");
    }
    if (features.dim != model.unary.dim) {
        throw ArgumentError("feature dimension does not match the unary model");
    }
    if (!(model.lambda >= 0.0)) throw ArgumentError("pairwise lambda must be >= 0");

    unary_.resize(size() * num_classes_);
    for (std::size_t p = 0; p < size(); ++p) {
        unary_energies(model.unary, features.at(p),
                       std::span<double>(unary_.data() + p * num_classes_, num_classes_));
    }

    const PairwiseParams params = model.pairwise_for(image);
    right_.assign(size(), 0.0);
    down_.assign(size(), 0.0);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const std::size_t p = image.index(x, y);
            // Weight for any pair of distinct labels.
            if (x + 1 < width_) right_[p] = pairwise_energy(params, image[p], image.at(x + 1, y), 0, 1);
            if (y + 1 < height_) down_[p] = pairwise_energy(params, image[p], image.at(x, y + 1), 0, 1);
        }
    }
}

double GridEnergy::total(std::span<const int> labels) const {
    if (labels.size() != size()) throw ArgumentError("labeling size does not match the grid");
    double e = 0.0;
    for (std::size_t p = 0; p < size(); ++p) e += unary(p, labels[p]);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
            if (x + 1 < width_ && labels[p] != labels[p + 1]) e += right_[p];
            if (y + 1 < height_ && labels[p] != labels[p + width_]) e += down_[p];
        }
    }
    return e;
}

double GridEnergy::local(std::span<const int> labels, int x, int y, int k) const {
    const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
    double e = unary(p, k);
    if (x > 0 && labels[p - 1] != k) e += right_[p - 1];
    if (x + 1 < width_ && labels[p + 1] != k) e += right_[p];
    if (y > 0 && labels[p - width_] != k) e += down_[p - width_];
    if (y + 1 < height_ && labels[p + width_] != k) e += down_[p];
    return e;
}

std::vector<int> GridEnergy::unary_argmin() const {
    std::vector<int> labels(size());
    for (std::size_t p = 0; p < size(); ++p) {
        int best = 0;
        for (int k = 1; k < num_classes_; ++k) {
            if (unary(p, k) < unary(p, best)) best = k;
        }
        labels[p] = best;
    }
    return labels;
}

namespace {

void check_labels_match(const RgbImage& image, const LabelMap& labels, int num_classes) {
    if (labels.width() != image.width() || labels.height() != image.height()) {
        throw ArgumentError("label map dimensions do not match the image");
    }
    if (labels.num_classes() > num_classes) {
        throw ArgumentError("label map has more classes than the model");
    }
}

}  // namespace

double total_energy(const CrfModel& model, const RgbImage& image, const PixelFeatureMap& features,
                    const LabelMap& labels) {
    check_labels_match(image, labels, model.num_classes());
    return GridEnergy(model, image, features).total(labels.labels());
}

LabelMap exact_map_enumerate(const CrfModel& model, const RgbImage& image,
                             const PixelFeatureMap& features) {
    const std::size_t n = image.size();
    const auto k = static_cast<std::size_t>(model.num_classes());
    std::size_t states = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (k > 1 && states > kMaxEnumerationStates / k) {
            throw ArgumentError("state space too large for exhaustive enumeration");
        }
        states *= k;
    }

    const GridEnergy energy(model, image, features);
    std::vector<int> current(n, 0);
    std::vector<int> best = current;
    double best_energy = energy.total(current);
    // Odometer with the first pixel most significant visits labelings in
    // lexicographic order, so strict improvement keeps the smallest tie.
    for (std::size_t s = 1; s < states; ++s) {
        for (std::size_t i = n; i-- > 0;) {
            if (++current[i] < static_cast<int>(k)) break;
            current[i] = 0;
        }
        const double e = energy.total(current);
        if (e < best_energy) {
            best_energy = e;
            best = current;
        }
    }
    return LabelMap(image.width(), image.height(), model.num_classes(), std::move(best));
}

IcmResult icm_infer(const CrfModel& model, const RgbImage& image, const PixelFeatureMap& features,
                    const LabelMap* init, const IcmOptions& options) {
    if (options.max_sweeps < 1) throw ArgumentError("max_sweeps must be at least 1");
    const GridEnergy energy(model, image, features);
    const int num_classes = model.num_classes();

    std::vector<int> labels;
    if (init != nullptr) {
        check_labels_match(image, *init, num_classes);
        labels.assign(init->labels().begin(), init->labels().end());
    } else {
        labels = energy.unary_argmin();
    }

    double current = energy.total(labels);
    if (options.energy_trace != nullptr) options.energy_trace->push_back(current);

    const int w = image.width();
    const int h = image.height();
    int sweeps = 0;
    bool converged = false;
    while (sweeps < options.max_sweeps) {
        ++sweeps;
        bool changed = false;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                int best = 0;
                double best_e = energy.local(labels, x, y, 0);
                for (int k = 1; k < num_classes; ++k) {
                    const double e = energy.local(labels, x, y, k);
                    if (e < best_e) {
                        best_e = e;
                        best = k;
                    }
                }
                if (best != labels[p]) {
                    const double delta = best_e - energy.local(labels, x, y, labels[p]);
                    current += delta;
                    labels[p] = best;
                    changed = true;
                    if (options.energy_trace != nullptr) options.energy_trace->push_back(current);
                }
            }
        }
        if (!changed) {
            converged = true;
            break;
        }
    }
    const double final_energy = energy.total(labels);
    return {LabelMap(w, h, num_classes, std::move(labels)), final_energy, sweeps, converged};
}

// ---------------------------------------------------------------------------
// Training

double unary_objective(std::span<const double> weights, int num_classes, int dim,
                       std::span<const FeatureSample> data, double ridge,
                       std::span<double> gradient) {
    const bool want_grad = !gradient.empty();
    if (want_grad) {
        if (gradient.size() != weights.size()) throw ArgumentError("gradient size mismatch");
        std::fill(gradient.begin(), gradient.end(), 0.0);
    }
    UnaryModel model(num_classes, dim, std::vector<double>(weights.begin(), weights.end()));

    std::vector<double> scores(num_classes);
    double nll = 0.0;
    std::size_t count = 0;
    for (const FeatureSample& sample : data) {
        const PixelFeatureMap& fm = *sample.features;
        const LabelMap& lm = *sample.labels;
        for (std::size_t p = 0; p < fm.size(); ++p) {
            const auto f = fm.at(p);
            const int y = lm[p];
            const double lse = scores_and_lse(model, f, scores);
            nll += lse - scores[y];
            ++count;
            if (!want_grad) continue;
            for (int k = 0; k < num_classes; ++k) {
                const double coeff = std::exp(scores[k] - lse) - (k == y ? 1.0 : 0.0);
                double* g = gradient.data() + static_cast<std::size_t>(k) * dim;
                for (int d = 0; d < dim; ++d) g[d] += coeff * f[d];
            }
        }
    }
    if (count == 0) throw ArgumentError("training data contains no labeled pixels");

    const double inv = 1.0 / static_cast<double>(count);
    double norm2 = 0.0;
    for (double w : weights) norm2 += w * w;
    if (want_grad) {
        for (std::size_t i = 0; i < gradient.size(); ++i) {
            gradient[i] = gradient[i] * inv + 2.0 * ridge * weights[i];
        }
    }
    return nll * inv + ridge * norm2;
}

UnaryModel train_unary(std::span<const FeatureSample> data, int num_classes,
                       const UnaryTrainConfig& config) {
    if (data.empty()) throw ArgumentError("cannot train a unary model on empty data");
    if (num_classes < 1 || num_classes > kMaxClasses) {
        throw ArgumentError("class count out of range");
    }
    if (!(config.learning_rate > 0.0) || config.epochs < 0) {
        throw ArgumentError("learning rate must be positive and epochs non-negative");
    }
    const int dim = data.front().features->dim;
    for (const FeatureSample& s : data) {
        if (s.features->dim != dim) throw ArgumentError("inconsistent feature dimensions");
        if (s.labels->width() != s.features->width || s.labels->height() != s.features->height) {
            throw ArgumentError("label map dimensions do not match its feature map");
        }
        for (int l : s.labels->labels()) {
            if (l >= num_classes) throw ArgumentError("training label exceeds the class count");
        }
    }

    const std::size_t n = static_cast<std::size_t>(num_classes) * dim;
    std::vector<double> weights(n, 0.0);
    std::vector<double> grad(n);
    std::vector<double> candidate(n);
    double step = config.learning_rate;
    double loss = unary_objective(weights, num_classes, dim, data, config.ridge, grad);
    if (config.loss_trace != nullptr) config.loss_trace->push_back(loss);

    std::vector<double> next_grad(n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        bool accepted = false;
        for (int attempt = 0; attempt <= config.max_step_halvings; ++attempt) {
            for (std::size_t i = 0; i < n; ++i) candidate[i] = weights[i] - step * grad[i];
            const double next =
                unary_objective(candidate, num_classes, dim, data, config.ridge, next_grad);
            if (next <= loss + 1e-9) {
                weights.swap(candidate);
                grad.swap(next_grad);
                loss = next;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (config.loss_trace != nullptr) config.loss_trace->push_back(loss);
    }
    return UnaryModel(num_classes, dim, std::move(weights));
}

std::vector<double> default_lambda_grid() { return {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}; }

double pixel_accuracy(const LabelMap& pred, const LabelMap& truth) {
    if (pred.width() != truth.width() || pred.height() != truth.height()) {
        throw ArgumentError("label map dimensions differ");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double fit_lambda(std::span<const CrfSample> data, const UnaryModel& unary,
                  std::span<const double> grid, int max_sweeps) {
    if (data.empty()) throw ArgumentError("cannot fit lambda on empty data");
    if (grid.empty()) throw ArgumentError("lambda grid is empty");
    for (double l : grid) {
        if (!(l >= 0.0)) throw ArgumentError("lambda candidates must be >= 0");
    }

    double best_lambda = grid.front();
    double best_acc = -1.0;
    for (double lambda : grid) {
        const CrfModel model{unary, lambda};
        double acc = 0.0;
        for (const CrfSample& s : data) {
            const IcmResult r = icm_infer(model, *s.image, *s.features, nullptr, {max_sweeps});
            acc += pixel_accuracy(r.labels, *s.labels);
        }
        acc /= static_cast<double>(data.size());
        if (acc > best_acc || (acc == best_acc && lambda < best_lambda)) {
            best_acc = acc;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

CrfModel train_crf(std::span<const LabeledImage> data, int num_classes,
                   const CrfTrainConfig& config) {
    if (data.empty()) throw ArgumentError("cannot train a CRF on empty data");
    std::vector<PixelFeatureMap> features;
    features.reserve(data.size());
    for (const LabeledImage& item : data) {
        if (item.labels.width() != item.image.width() ||
            item.labels.height() != item.image.height()) {
            throw ArgumentError("training label map dimensions do not match its image");
        }
        features.push_back(extract_features(item.image));
    }
    std::vector<FeatureSample> unary_data;
    std::vector<CrfSample> crf_data;
    for (std::size_t i = 0; i < data.size(); ++i) {
        unary_data.push_back({&features[i], &data[i].labels});
        crf_data.push_back({&data[i].image, &features[i], &data[i].labels});
    }
    CrfModel model;
    model.unary = train_unary(unary_data, num_classes, config.unary);
    model.lambda = fit_lambda(crf_data, model.unary, config.lambda_grid, config.max_sweeps);
    return model;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void write_header(std::ostream& out, const UnaryModel& model) {
    out << "classes " << model.num_classes << "\n";
    out << "dim " << model.dim << "\n";
}

void write_weight_rows(std::ostream& out, const UnaryModel& model) {
    out << "weights\n";
    for (int k = 0; k < model.num_classes; ++k) {
        const auto row = model.row(k);
        for (int d = 0; d < model.dim; ++d) {
            if (d > 0) out << ' ';
            out << detail::format_double(row[d]);
        }
        out << "\n";
    }
}

UnaryModel read_weights(std::istream& in, int num_classes, int dim) {
    if (num_classes < 1 || num_classes > kMaxClasses || dim < 1 || dim > 4096) {
        throw FormatError("model header has out-of-range classes/dim");
    }
    detail::expect_token(in, "weights");
    std::vector<double> w(static_cast<std::size_t>(num_classes) * dim);
    for (double& v : w) v = detail::read_value<double>(in, "weight");
    detail::skip_rest_of_line(in);
    return UnaryModel(num_classes, dim, std::move(w));
}

}  // namespace

void write_unary_model(std::ostream& out, const UnaryModel& model) {
    out << "HCRF-UNARY v1\n";
    write_header(out, model);
    write_weight_rows(out, model);
}

UnaryModel read_unary_model(std::istream& in) {
    detail::expect_line(in, "HCRF-UNARY v1");
    const int classes = detail::read_keyed<int>(in, "classes");
    const int dim = detail::read_keyed<int>(in, "dim");
    return read_weights(in, classes, dim);
}

void write_crf_model(std::ostream& out, const CrfModel& model) {
    out << "HCRF-MODEL v1\n";
    write_header(out, model.unary);
    out << "lambda " << detail::format_double(model.lambda) << "\n";
    write_weight_rows(out, model.unary);
}

CrfModel read_crf_model(std::istream& in) {
    detail::expect_line(in, "HCRF-MODEL v1");
    const int classes = detail::read_keyed<int>(in, "classes");
    const int dim = detail::read_keyed<int>(in, "dim");
    const double lambda = detail::read_keyed<double>(in, "lambda");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw FormatError("invalid lambda");
    CrfModel model;
    model.unary = read_weights(in, classes, dim);
    model.lambda = lambda;
    return model;
}

}  // namespace hcrf
