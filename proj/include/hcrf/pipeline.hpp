#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hcrf/clustering.hpp"
#include "hcrf/crf.hpp"
#include "hcrf/descriptor.hpp"
#include "hcrf/image.hpp"

namespace hcrf {

struct HierarchicalConfig {
    int num_classes = 3;
    int grid = 4;
    double appearance_weight = 1.0;
    int clusters = 3;
    std::uint64_t kmeans_seed = 0;
    int kmeans_max_iter = 100;
    int min_cluster_size = 2;
    CrfTrainConfig crf;
    int threads = 0;  // workers for per-cluster training

    DescriptorConfig descriptor() const { return {grid, num_classes, appearance_weight}; }
    void validate() const;
};

/// Global CRF, descriptor centroids, and one CRF per cluster. A cluster whose
/// model is empty uses the global model.
struct HierarchicalModel {
    int num_classes = 0;
    DescriptorConfig descriptor;
    CrfModel global;
    ClusterSet clusters;  // centroids plus the training-image assignments
    std::vector<std::optional<CrfModel>> cluster_models;

    int cluster_count() const { return static_cast<int>(clusters.centroids.size()); }
    bool aliases_global(int cluster) const { return !cluster_models.at(cluster).has_value(); }
    const CrfModel& model_for(int cluster) const;

    friend bool operator==(const HierarchicalModel&, const HierarchicalModel&) = default;
};

/// Learning phase: train the global CRF on everything, describe every
/// training image by its ground-truth labels, cluster the descriptors, and
/// train a CRF per cluster with at least min_cluster_size members.
HierarchicalModel train_hierarchical(std::span<const LabeledImage> data,
                                     const HierarchicalConfig& config);

struct LabelOptions {
    int max_sweeps = 50;
    bool global_only = false;  // skip retrieval; final = initial
};

struct LabelingResult {
    LabelMap initial;
    int cluster;  // -1 when retrieval was skipped
    LabelMap final_labels;
    double initial_energy;  // under the global model
    double final_energy;    // under the selected cluster's model
};

/// Inference phase: label with the global CRF, describe the image by those
/// labels, pick the nearest cluster, and relabel with that cluster's CRF
/// starting from the initial labeling.
LabelingResult label_image(const HierarchicalModel& model, const RgbImage& image,
                           const LabelOptions& options = {});

void write_hierarchical_model(std::ostream& out, const HierarchicalModel& model);
HierarchicalModel read_hierarchical_model(std::istream& in);

// ---------------------------------------------------------------------------
// Segmentation

struct SegmentMap {
    int width = 0;
    int height = 0;
    int segment_count = 0;
    std::vector<int> ids;  // row-major

    friend bool operator==(const SegmentMap&, const SegmentMap&) = default;
};

// Renumbers arbitrary ids to 0..n-1 in raster order of first appearance.
SegmentMap segment_map_from_ids(int width, int height, std::span<const int> raw_ids);

/// 4-connected components of equal-label pixels, numbered in raster order
/// of each component's first pixel.
SegmentMap connected_components(const LabelMap& labels);

/// Gives every pixel of a segment the segment's most frequent label, ties
/// to the smaller label.
LabelMap dominant_label_projection(const SegmentMap& segments, const LabelMap& labels);

// ---------------------------------------------------------------------------
// Evaluation

struct Metrics {
    std::size_t correct = 0;
    std::size_t total = 0;
    double pixel_accuracy = 0.0;
    std::vector<std::optional<double>> per_class_iou;  // empty when a class never occurs
    std::optional<double> mean_iou;                    // over defined classes
};

/// Accumulates confusion counts over any number of image pairs.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(int num_classes);

    void add(const LabelMap& pred, const LabelMap& truth);
    Metrics result() const;

private:
    int num_classes_;
    std::size_t correct_ = 0;
    std::size_t total_ = 0;
    std::vector<std::size_t> intersection_;
    std::vector<std::size_t> pred_count_;
    std::vector<std::size_t> truth_count_;
};

Metrics evaluate(const LabelMap& pred, const LabelMap& truth);

}  // namespace hcrf
