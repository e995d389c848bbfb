#include "hcrf/descriptor.hpp"

#include <cmath>
#include <string>

#include "hcrf/errors.hpp"

namespace hcrf {

void DescriptorConfig::validate() const {
    if (grid < 1) throw ArgumentError("descriptor grid must be at least 1");
    if (num_classes < 1) throw ArgumentError("descriptor class count must be at least 1");
    if (!(appearance_weight >= 0.0)) throw ArgumentError("appearance weight must be >= 0");
}

std::vector<CellRect> grid_cells(int width, int height, int grid) {
    if (grid < 1) throw ArgumentError("grid must be at least 1");
    if (width < grid || height < grid) {
        throw ArgumentError("image " + std::to_string(width) + "x" + std::to_string(height) +
                            " is smaller than a " + std::to_string(grid) + "x" +
                            std::to_string(grid) + " grid");
    }
    const auto split = [grid](int extent, int i) {
        return static_cast<int>(static_cast<long long>(i) * extent / grid);
    };
    std::vector<CellRect> cells;
    cells.reserve(static_cast<std::size_t>(grid) * grid);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            cells.push_back({split(height, i), split(height, i + 1), split(width, j),
                             split(width, j + 1)});
        }
    }
    return cells;
}

namespace {

void check_classes(const LabelMap& labels, const DescriptorConfig& config) {
    config.validate();
    if (labels.num_classes() > config.num_classes) {
        throw ArgumentError("label map has " + std::to_string(labels.num_classes()) +
                            " classes but the descriptor is configured for " +
                            std::to_string(config.num_classes));
    }
}

}  // namespace

std::vector<double> positional_descriptor(const LabelMap& labels, const DescriptorConfig& config) {
    check_classes(labels, config);
    const auto cells = grid_cells(labels.width(), labels.height(), config.grid);
    const int k_count = config.num_classes;
    std::vector<double> out(static_cast<std::size_t>(config.positional_length()), 0.0);
    std::vector<long> counts(k_count);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const CellRect& cell = cells[c];
        std::fill(counts.begin(), counts.end(), 0);
        for (int y = cell.row0; y < cell.row1; ++y) {
            for (int x = cell.col0; x < cell.col1; ++x) ++counts[labels.at(x, y)];
        }
        const double area = cell.area();
        for (int k = 0; k < k_count; ++k) out[c * k_count + k] = counts[k] / area;
    }
    return out;
}

std::vector<double> appearance_descriptor(const RgbImage& image, const LabelMap& labels,
                                          const DescriptorConfig& config) {
    check_classes(labels, config);
    if (image.width() != labels.width() || image.height() != labels.height()) {
        throw ArgumentError("image and label map dimensions differ");
    }
    const auto cells = grid_cells(labels.width(), labels.height(), config.grid);
    const int k_count = config.num_classes;
    std::vector<double> out(static_cast<std::size_t>(config.appearance_length()), 0.0);
    std::vector<long> counts(k_count);
    std::vector<Rgb> sums(k_count);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const CellRect& cell = cells[c];
        std::fill(counts.begin(), counts.end(), 0);
        std::fill(sums.begin(), sums.end(), Rgb{});
        for (int y = cell.row0; y < cell.row1; ++y) {
            for (int x = cell.col0; x < cell.col1; ++x) {
                const int k = labels.at(x, y);
                const Rgb& p = image.at(x, y);
                ++counts[k];
                sums[k].r += p.r;
                sums[k].g += p.g;
                sums[k].b += p.b;
            }
        }
        const double area = cell.area();
        for (int k = 0; k < k_count; ++k) {
            if (counts[k] == 0) continue;
            const double coverage = counts[k] / area;
            const double n = static_cast<double>(counts[k]);
            double* entry = &out[(c * k_count + k) * 3];
            entry[0] = coverage * (sums[k].r / n);
            entry[1] = coverage * (sums[k].g / n);
            entry[2] = coverage * (sums[k].b / n);
        }
    }
    return out;
}

std::vector<double> combine(std::span<const double> positional, std::span<const double> appearance,
                            const DescriptorConfig& config) {
    config.validate();
    if (positional.size() != static_cast<std::size_t>(config.positional_length()) ||
        appearance.size() != static_cast<std::size_t>(config.appearance_length())) {
        throw ArgumentError("descriptor part lengths do not match the configuration");
    }
    std::vector<double> out;
    out.reserve(positional.size() + appearance.size());
    out.insert(out.end(), positional.begin(), positional.end());
    for (double v : appearance) out.push_back(config.appearance_weight * v);
    return out;
}

std::vector<double> label_descriptor(const RgbImage& image, const LabelMap& labels,
                                     const DescriptorConfig& config) {
    return combine(positional_descriptor(labels, config),
                   appearance_descriptor(image, labels, config), config);
}

double descriptor_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ArgumentError("descriptor lengths differ (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

}  // namespace hcrf
