#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "hcrf/image.hpp"

namespace hcrf {

// Per-pixel feature layout produced by extract_features.
enum FeatureIndex : int {
    kFeatBias = 0,
    kFeatRed,
    kFeatGreen,
    kFeatBlue,
    kFeatX,
    kFeatY,
    kFeatMeanRed,
    kFeatMeanGreen,
    kFeatMeanBlue,
    kFeatGray,
    kFeatWaveletEnergy,
    kFeatureDim
};

struct PixelFeatureMap {
    int width = 0;
    int height = 0;
    int dim = 0;
    std::vector<double> features;  // pixel-major, dim values per pixel

    PixelFeatureMap() = default;
    PixelFeatureMap(int width, int height, int dim, std::vector<double> features);

    std::size_t size() const { return static_cast<std::size_t>(width) * height; }
    std::span<const double> at(std::size_t pixel) const {
        return {features.data() + pixel * dim, static_cast<std::size_t>(dim)};
    }
};

/// Builds the 11-dimensional pixel features:
/// bias, r, g, b, x/(W-1), y/(H-1), edge-clamped 3x3 mean r/g/b, luma, and
/// the normalized Haar detail energy (2 levels, or 1 when the image is too
/// small for 2, or 0 when it is smaller than 2x2).
PixelFeatureMap extract_features(const RgbImage& image);

/// Multinomial logistic unary: U(k) = -log softmax_k(W f).
struct UnaryModel {
    int num_classes = 0;
    int dim = 0;
    std::vector<double> weights;  // num_classes x dim, row-major

    UnaryModel() = default;
    UnaryModel(int num_classes, int dim, std::vector<double> weights);
    static UnaryModel zeros(int num_classes, int dim);

    std::span<const double> row(int k) const {
        return {weights.data() + static_cast<std::size_t>(k) * dim, static_cast<std::size_t>(dim)};
    }

    friend bool operator==(const UnaryModel&, const UnaryModel&) = default;
};

double unary_energy(const UnaryModel& model, std::span<const double> f, int k);

// All K unary energies for one feature vector.
void unary_energies(const UnaryModel& model, std::span<const double> f, std::span<double> out);

struct PairwiseParams {
    double lambda = 0.0;
    double beta = 0.0;
};

/// Contrast-sensitive Potts: 0 for equal labels, otherwise
/// lambda * exp(-beta * |c_i - c_j|^2).
double pairwise_energy(const PairwiseParams& params, const Rgb& ci, const Rgb& cj, int ki, int kj);

double squared_color_distance(const Rgb& a, const Rgb& b);

// beta = 1 / (2 * mean squared contrast over 4-neighbor edges), 0 when that mean is 0.
double contrast_beta(const RgbImage& image);

/// The pairwise weight lambda is stored; beta is derived from each image.
struct CrfModel {
    UnaryModel unary;
    double lambda = 0.0;

    int num_classes() const { return unary.num_classes; }
    PairwiseParams pairwise_for(const RgbImage& image) const {
        return {lambda, contrast_beta(image)};
    }

    friend bool operator==(const CrfModel&, const CrfModel&) = default;
};

/// Precomputed energy terms of one image under one model.
class GridEnergy {
public:
    GridEnergy(const CrfModel& model, const RgbImage& image, const PixelFeatureMap& features);

    int width() const { return width_; }
    int height() const { return height_; }
    int num_classes() const { return num_classes_; }
    std::size_t size() const { return static_cast<std::size_t>(width_) * height_; }

    double unary(std::size_t pixel, int k) const { return unary_[pixel * num_classes_ + k]; }
    // Weight of the edge (x, y)-(x+1, y).
    double right_weight(int x, int y) const { return right_[static_cast<std::size_t>(y) * width_ + x]; }
    // Weight of the edge (x, y)-(x, y+1).
    double down_weight(int x, int y) const { return down_[static_cast<std::size_t>(y) * width_ + x]; }

    double total(std::span<const int> labels) const;
    // Unary plus the pairwise terms of the pixel's 4 neighbors, with the
    // pixel relabeled to k.
    double local(std::span<const int> labels, int x, int y, int k) const;
    std::vector<int> unary_argmin() const;

private:
    int width_;
    int height_;
    int num_classes_;
    std::vector<double> unary_;
    std::vector<double> right_;
    std::vector<double> down_;
};

double total_energy(const CrfModel& model, const RgbImage& image, const PixelFeatureMap& features,
                    const LabelMap& labels);

// Upper bound on K^(W*H) accepted by exact_map_enumerate.
inline constexpr std::size_t kMaxEnumerationStates = std::size_t{1} << 20;

/// Globally minimal labeling by exhaustive enumeration; ties resolve to the
/// lexicographically smallest label sequence.
LabelMap exact_map_enumerate(const CrfModel& model, const RgbImage& image,
                             const PixelFeatureMap& features);

struct IcmOptions {
    int max_sweeps = 50;
    // When set, receives the total energy before the first update and after
    // every label change.
    std::vector<double>* energy_trace = nullptr;
};

struct IcmResult {
    LabelMap labels;
    double energy;
    int sweeps;
    bool converged;
};

/// Iterated conditional modes in raster order. Starts from `init` when
/// given, otherwise from the per-pixel unary argmin. Each visited pixel takes
/// the label of least local energy, ties to the smaller label. Stops after a
/// sweep without changes or after max_sweeps sweeps.
IcmResult icm_infer(const CrfModel& model, const RgbImage& image, const PixelFeatureMap& features,
                    const LabelMap* init = nullptr, const IcmOptions& options = {});

// Non-owning view of one training example.
struct FeatureSample {
    const PixelFeatureMap* features;
    const LabelMap* labels;
};

struct UnaryTrainConfig {
    double learning_rate = 0.5;
    int epochs = 200;
    double ridge = 1e-4;
    int max_step_halvings = 10;
    // When set, receives the objective before training and after each epoch.
    std::vector<double>* loss_trace = nullptr;
};

/// Average negative log-likelihood plus ridge * |W|^2. Writes the gradient
/// into `gradient` when it is non-empty.
double unary_objective(std::span<const double> weights, int num_classes, int dim,
                       std::span<const FeatureSample> data, double ridge,
                       std::span<double> gradient = {});

/// Full-batch gradient descent from zero weights. An epoch whose step would
/// raise the objective by more than 1e-9 halves the learning rate and
/// retries; training stops once the halving budget is spent.
UnaryModel train_unary(std::span<const FeatureSample> data, int num_classes,
                       const UnaryTrainConfig& config = {});

struct CrfSample {
    const RgbImage* image;
    const PixelFeatureMap* features;
    const LabelMap* labels;
};

std::vector<double> default_lambda_grid();

double pixel_accuracy(const LabelMap& pred, const LabelMap& truth);

/// Picks the lambda whose ICM labelings reach the highest mean pixel
/// accuracy over the data; ties go to the smaller lambda.
double fit_lambda(std::span<const CrfSample> data, const UnaryModel& unary,
                  std::span<const double> grid, int max_sweeps = 50);

struct CrfTrainConfig {
    UnaryTrainConfig unary;
    std::vector<double> lambda_grid = default_lambda_grid();
    int max_sweeps = 50;
};

CrfModel train_crf(std::span<const LabeledImage> data, int num_classes,
                   const CrfTrainConfig& config = {});

// Plain-text persistence; doubles are written with 17 significant digits.
void write_unary_model(std::ostream& out, const UnaryModel& model);
UnaryModel read_unary_model(std::istream& in);
void write_crf_model(std::ostream& out, const CrfModel& model);
CrfModel read_crf_model(std::istream& in);

}  // namespace hcrf
