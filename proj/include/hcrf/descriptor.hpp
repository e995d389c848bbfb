#pragma once

#include <span>
#include <vector>

#include "hcrf/image.hpp"

namespace hcrf {

struct DescriptorConfig {
    int grid = 4;          // cells per axis
    int num_classes = 3;
    double appearance_weight = 1.0;

    int cell_count() const { return grid * grid; }
    int positional_length() const { return num_classes * cell_count(); }
    int appearance_length() const { return 3 * num_classes * cell_count(); }
    int combined_length() const { return 4 * num_classes * cell_count(); }

    void validate() const;

    friend bool operator==(const DescriptorConfig&, const DescriptorConfig&) = default;
};

// Half-open pixel rectangle [row0, row1) x [col0, col1).
struct CellRect {
    int row0;
    int row1;
    int col0;
    int col1;

    int area() const { return (row1 - row0) * (col1 - col0); }
    friend bool operator==(const CellRect&, const CellRect&) = default;
};

/// Splits a width x height image into grid x grid cells, row-major.
/// Cell (i, j) covers rows [floor(i*H/grid), floor((i+1)*H/grid)) and the
/// analogous column range.
std::vector<CellRect> grid_cells(int width, int height, int grid);

/// Class coverage per cell: entry (cell, k) is the fraction of the cell's
/// pixels carrying label k. Cell-major, class-minor.
std::vector<double> positional_descriptor(const LabelMap& labels, const DescriptorConfig& config);

/// Mean color of each class inside each cell, scaled by that class's
/// coverage of the cell. A class absent from a cell contributes zeros.
/// Cell-major, class-minor, channel-innermost.
std::vector<double> appearance_descriptor(const RgbImage& image, const LabelMap& labels,
                                          const DescriptorConfig& config);

// [positional | appearance_weight * appearance]
std::vector<double> combine(std::span<const double> positional, std::span<const double> appearance,
                            const DescriptorConfig& config);

std::vector<double> label_descriptor(const RgbImage& image, const LabelMap& labels,
                                     const DescriptorConfig& config);

double descriptor_distance(std::span<const double> a, std::span<const double> b);

}  // namespace hcrf
