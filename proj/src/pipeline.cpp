#include "hcrf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "hcrf/errors.hpp"
#include "hcrf/parallel.hpp"
#include "text_format.hpp"

namespace hcrf {

void HierarchicalConfig::validate() const {
    descriptor().validate();
    if (clusters < 1) throw ArgumentError("cluster count must be at least 1");
    if (kmeans_max_iter < 1) throw ArgumentError("k-means max_iter must be at least 1");
    if (min_cluster_size < 1) throw ArgumentError("min_cluster_size must be at least 1");
    if (crf.max_sweeps < 1) throw ArgumentError("max_sweeps must be at least 1");
}

const CrfModel& HierarchicalModel::model_for(int cluster) const {
    const auto& m = cluster_models.at(static_cast<std::size_t>(cluster));
    return m ? *m : global;
}

HierarchicalModel train_hierarchical(std::span<const LabeledImage> data,
                                     const HierarchicalConfig& config) {
    config.validate();
    if (data.empty()) throw ArgumentError("cannot train on an empty dataset");
    if (static_cast<std::size_t>(config.clusters) > data.size()) {
        throw ArgumentError("cluster count " + std::to_string(config.clusters) +
                            " exceeds the number of training images (" +
                            std::to_string(data.size()) + ")");
    }

    HierarchicalModel model;
    model.num_classes = config.num_classes;
    model.descriptor = config.descriptor();
    model.global = train_crf(data, config.num_classes, config.crf);

    std::vector<std::vector<double>> descriptors(data.size());
    parallel_for(data.size(), config.threads, [&](std::size_t i) {
        descriptors[i] = label_descriptor(data[i].image, data[i].labels, model.descriptor);
    });
    model.clusters = kmeans(descriptors, config.clusters,
                            {config.kmeans_seed, config.kmeans_max_iter, nullptr});

    const int k = config.clusters;
    std::vector<std::vector<LabeledImage>> members(k);
    for (std::size_t i = 0; i < data.size(); ++i) {
        members[model.clusters.assignments[i]].push_back(data[i]);
    }
    model.cluster_models.assign(k, std::nullopt);
    parallel_for(static_cast<std::size_t>(k), config.threads, [&](std::size_t c) {
        if (members[c].size() >= static_cast<std::size_t>(config.min_cluster_size)) {
            model.cluster_models[c] = train_crf(members[c], config.num_classes, config.crf);
        }
    });
    return model;
}

LabelingResult label_image(const HierarchicalModel& model, const RgbImage& image,
                           const LabelOptions& options) {
    const PixelFeatureMap features = extract_features(image);
    const IcmOptions icm{options.max_sweeps, nullptr};
    IcmResult initial = icm_infer(model.global, image, features, nullptr, icm);
    if (options.global_only) {
        LabelMap copy = initial.labels;
        return {std::move(initial.labels), -1, std::move(copy), initial.energy, initial.energy};
    }
    const auto descriptor = label_descriptor(image, initial.labels, model.descriptor);
    const int cluster = nearest_cluster(model.clusters, descriptor);
    IcmResult final_result =
        icm_infer(model.model_for(cluster), image, features, &initial.labels, icm);
    return {std::move(initial.labels), cluster, std::move(final_result.labels), initial.energy,
            final_result.energy};
}

// ---------------------------------------------------------------------------
// Persistence

void write_hierarchical_model(std::ostream& out, const HierarchicalModel& model) {
    const ClusterSet& cs = model.clusters;
    out << "HCRF-HIER v1\n";
    out << "classes " << model.num_classes << "\n";
    out << "grid " << model.descriptor.grid << "\n";
    out << "appearance_weight " << detail::format_double(model.descriptor.appearance_weight) << "\n";
    out << "clusters " << cs.centroids.size() << "\n";
    out << "descriptor_length " << model.descriptor.combined_length() << "\n";
    for (std::size_t c = 0; c < cs.centroids.size(); ++c) {
        out << "centroid " << c << "\n";
        for (std::size_t i = 0; i < cs.centroids[c].size(); ++i) {
            out << (i > 0 ? " " : "") << detail::format_double(cs.centroids[c][i]);
        }
        out << "\n";
    }
    out << "assignments " << cs.assignments.size() << "\n";
    for (std::size_t i = 0; i < cs.assignments.size(); ++i) {
        out << (i > 0 ? " " : "") << cs.assignments[i];
    }
    out << "\n";
    out << "inertia " << detail::format_double(cs.inertia) << "\n";
    out << "iterations " << cs.iterations << "\n";
    out << "global\n";
    write_crf_model(out, model.global);
    for (std::size_t c = 0; c < model.cluster_models.size(); ++c) {
        if (model.cluster_models[c]) {
            out << "cluster " << c << " model\n";
            write_crf_model(out, *model.cluster_models[c]);
        } else {
            out << "cluster " << c << " global\n";
        }
    }
    out << "end\n";
}

HierarchicalModel read_hierarchical_model(std::istream& in) {
    detail::expect_line(in, "HCRF-HIER v1");
    HierarchicalModel model;
    model.num_classes = detail::read_keyed<int>(in, "classes");
    model.descriptor.num_classes = model.num_classes;
    model.descriptor.grid = detail::read_keyed<int>(in, "grid");
    model.descriptor.appearance_weight = detail::read_keyed<double>(in, "appearance_weight");
    if (model.num_classes < 1 || model.num_classes > kMaxClasses || model.descriptor.grid < 1 ||
        model.descriptor.grid > 1024 || !(model.descriptor.appearance_weight >= 0.0)) {
        throw FormatError("model file has an invalid descriptor configuration");
    }
    const int k = detail::read_keyed<int>(in, "clusters");
    const int length = detail::read_keyed<int>(in, "descriptor_length");
    if (k < 1 || k > 1 << 16 || length != model.descriptor.combined_length()) {
        throw FormatError("model file has an invalid cluster header");
    }

    ClusterSet& cs = model.clusters;
    cs.k = k;
    cs.centroids.assign(k, std::vector<double>(length));
    for (int c = 0; c < k; ++c) {
        if (detail::read_keyed<int>(in, "centroid") != c) {
            throw FormatError("centroids out of order");
        }
        for (double& v : cs.centroids[c]) v = detail::read_value<double>(in, "centroid value");
    }
    const int n = detail::read_keyed<int>(in, "assignments");
    if (n < 0 || n > 1 << 24) throw FormatError("invalid assignment count");
    cs.assignments.resize(n);
    for (int& a : cs.assignments) {
        a = detail::read_value<int>(in, "assignment");
        if (a < 0 || a >= k) throw FormatError("assignment out of range");
    }
    cs.inertia = detail::read_keyed<double>(in, "inertia");
    cs.iterations = detail::read_keyed<int>(in, "iterations");

    const auto check_classes = [&](const CrfModel& m) {
        if (m.num_classes() != model.num_classes) {
            throw FormatError("embedded CRF model class count differs from the header");
        }
    };
    detail::expect_token(in, "global");
    detail::skip_rest_of_line(in);
    model.global = read_crf_model(in);
    check_classes(model.global);
    for (int c = 0; c < k; ++c) {
        if (detail::read_keyed<int>(in, "cluster") != c) throw FormatError("clusters out of order");
        const auto kind = detail::read_value<std::string>(in, "cluster kind");
        detail::skip_rest_of_line(in);
        if (kind == "model") {
            model.cluster_models.emplace_back(read_crf_model(in));
            check_classes(*model.cluster_models.back());
        } else if (kind == "global") {
            model.cluster_models.emplace_back(std::nullopt);
        } else {
            throw FormatError("unknown cluster kind '" + kind + "'");
        }
    }
    detail::expect_token(in, "end");
    return model;
}

// ---------------------------------------------------------------------------
// Segmentation

SegmentMap segment_map_from_ids(int width, int height, std::span<const int> raw_ids) {
    const std::size_t n = checked_pixel_count(width, height);
    if (raw_ids.size() != n) throw ArgumentError("segment id buffer does not match dimensions");
    SegmentMap out{width, height, 0, std::vector<int>(n)};
    std::vector<std::pair<int, int>> remap;  // raw -> compact, kept sorted by raw id
    for (std::size_t i = 0; i < n; ++i) {
        const int raw = raw_ids[i];
        auto it = std::lower_bound(remap.begin(), remap.end(), std::pair{raw, -1});
        if (it == remap.end() || it->first != raw) {
            it = remap.insert(it, {raw, out.segment_count++});
        }
        out.ids[i] = it->second;
    }
    return out;
}

SegmentMap connected_components(const LabelMap& labels) {
    const int w = labels.width();
    const int h = labels.height();
    SegmentMap out{w, h, 0, std::vector<int>(labels.size(), -1)};
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < labels.size(); ++seed) {
        if (out.ids[seed] != -1) continue;
        const int id = out.segment_count++;
        const int label = labels[seed];
        out.ids[seed] = id;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(p % w);
            const int y = static_cast<int>(p / w);
            const auto visit = [&](std::size_t q) {
                if (out.ids[q] == -1 && labels[q] == label) {
                    out.ids[q] = id;
                    stack.push_back(q);
                }
            };
            if (x > 0) visit(p - 1);
            if (x + 1 < w) visit(p + 1);
            if (y > 0) visit(p - w);
            if (y + 1 < h) visit(p + w);
        }
    }
    return out;
}

LabelMap dominant_label_projection(const SegmentMap& segments, const LabelMap& labels) {
    if (segments.width != labels.width() || segments.height != labels.height() ||
        segments.ids.size() != labels.size()) {
        throw ArgumentError("segment map and label map dimensions differ");
    }
    const int k = labels.num_classes();
    std::vector<std::size_t> counts(static_cast<std::size_t>(segments.segment_count) * k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int s = segments.ids[i];
        if (s < 0 || s >= segments.segment_count) throw ArgumentError("segment id out of range");
        ++counts[static_cast<std::size_t>(s) * k + labels[i]];
    }
    std::vector<int> dominant(segments.segment_count, 0);
    for (int s = 0; s < segments.segment_count; ++s) {
        const auto* row = &counts[static_cast<std::size_t>(s) * k];
        // max_element returns the first maximum, i.e. the smaller label.
        dominant[s] = static_cast<int>(std::max_element(row, row + k) - row);
    }
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = dominant[segments.ids[i]];
    return LabelMap(labels.width(), labels.height(), k, std::move(out));
}

// ---------------------------------------------------------------------------
// Evaluation

MetricsAccumulator::MetricsAccumulator(int num_classes)
    : num_classes_(num_classes), intersection_(num_classes), pred_count_(num_classes),
      truth_count_(num_classes) {
    if (num_classes < 1) throw ArgumentError("class count must be at least 1");
}

void MetricsAccumulator::add(const LabelMap& pred, const LabelMap& truth) {
    if (pred.width() != truth.width() || pred.height() != truth.height()) {
        throw ArgumentError("predicted and ground-truth label maps differ in size");
    }
    if (pred.num_classes() != num_classes_ || truth.num_classes() != num_classes_) {
        throw ArgumentError("label maps disagree on the class count");
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred[i];
        const int t = truth[i];
        ++pred_count_[p];
        ++truth_count_[t];
        if (p == t) {
            ++correct_;
            ++intersection_[p];
        }
    }
    total_ += pred.size();
}

Metrics MetricsAccumulator::result() const {
    Metrics m;
    m.correct = correct_;
    m.total = total_;
    m.pixel_accuracy = total_ == 0 ? 0.0 : static_cast<double>(correct_) / total_;
    m.per_class_iou.resize(num_classes_);
    double sum = 0.0;
    int defined = 0;
    for (int k = 0; k < num_classes_; ++k) {
        const std::size_t uni = pred_count_[k] + truth_count_[k] - intersection_[k];
        if (uni == 0) continue;
        const double iou = static_cast<double>(intersection_[k]) / static_cast<double>(uni);
        m.per_class_iou[k] = iou;
        sum += iou;
        ++defined;
    }
    if (defined > 0) m.mean_iou = sum / defined;
    return m;
}

Metrics evaluate(const LabelMap& pred, const LabelMap& truth) {
    MetricsAccumulator acc(truth.num_classes());
    acc.add(pred, truth);
    return acc.result();
}

}  // namespace hcrf
