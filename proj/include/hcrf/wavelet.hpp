#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hcrf/image.hpp"

namespace hcrf {

/// Dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);
    Matrix(int rows, int cols, std::vector<double> data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

enum class Subband { LH = 0, HL = 1, HH = 2 };

// Detail subbands produced at one decomposition level.
//   HL: horizontal differences (across columns), vertically averaged
//   LH: vertical differences (across rows), horizontally averaged
//   HH: diagonal differences
struct DetailLevel {
    std::array<Matrix, 3> bands;  // indexed by Subband

    Matrix& band(Subband s) { return bands[static_cast<int>(s)]; }
    const Matrix& band(Subband s) const { return bands[static_cast<int>(s)]; }
};

/// Multi-level 2-D Haar decomposition.
///
/// details[0] is the finest level. At level l (1-based) every subband has
/// ceil(base / 2^l) rows and columns; an odd-sized input at any level is
/// padded by repeating its last row or column before the level is split.
struct WaveletPyramid {
    int base_rows = 0;
    int base_cols = 0;
    std::vector<DetailLevel> details;
    Matrix approximation;  // LL at the coarsest level

    int levels() const { return static_cast<int>(details.size()); }
    std::size_t detail_count() const;
};

// Input size at the given level (level 0 is the base matrix).
int level_extent(int base, int level);

int max_haar_levels(int rows, int cols);

WaveletPyramid haar_forward_2d(const Matrix& matrix, int levels);

Matrix haar_inverse_2d(const WaveletPyramid& pyramid);

/// Keeps the ceil(keep_fraction * N) detail coefficients of largest magnitude
/// and zeros the rest. The approximation band is never touched. Ties resolve
/// to the coefficient met first in level, subband (LH, HL, HH), row-major order.
WaveletPyramid threshold_compress(const WaveletPyramid& pyramid, double keep_fraction);

/// Per-pixel share of the detail energy whose spatial support covers the
/// pixel, normalized by total detail energy plus 1e-12. Values lie in [0, 1].
Matrix wavelet_energy_feature(const GrayImage& image, int levels);

Matrix to_matrix(const GrayImage& image);

}  // namespace hcrf
