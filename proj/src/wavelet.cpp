#include "hcrf/wavelet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "hcrf/errors.hpp"

namespace hcrf {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols),
      data_(static_cast<std::size_t>(std::max(rows, 0)) * std::max(cols, 0), fill) {
    if (rows < 0 || cols < 0) throw ArgumentError("negative matrix dimensions");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0 ||
        data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ArgumentError("matrix buffer length does not match its dimensions");
    }
}

std::size_t WaveletPyramid::detail_count() const {
    std::size_t n = 0;
    for (const auto& level : details) {
        for (const auto& band : level.bands) n += band.data().size();
    }
    return n;
}

int level_extent(int base, int level) {
    int extent = base;
    for (int l = 0; l < level; ++l) extent = (extent + 1) / 2;
    return extent;
}

int max_haar_levels(int rows, int cols) {
    const int m = std::min(rows, cols);
    if (m < 1) return 0;
    return std::bit_width(static_cast<unsigned>(m)) - 1;
}

namespace {

constexpr double kHalf = 0.5;

// Clamped read realizing the repeat-last-sample padding for odd sizes.
double padded(const Matrix& m, int r, int c) {
    return m(std::min(r, m.rows() - 1), std::min(c, m.cols() - 1));
}

}  // namespace

WaveletPyramid haar_forward_2d(const Matrix& matrix, int levels) {
    if (matrix.empty()) throw ArgumentError("cannot transform an empty matrix");
    const int max_levels = max_haar_levels(matrix.rows(), matrix.cols());
    if (levels < 1 || levels > max_levels) {
        throw ArgumentError("wavelet levels " + std::to_string(levels) + " outside [1, " +
                            std::to_string(max_levels) + "] for a " +
                            std::to_string(matrix.rows()) + "x" +
                            std::to_string(matrix.cols()) + " matrix");
    }

    WaveletPyramid pyramid;
    pyramid.base_rows = matrix.rows();
    pyramid.base_cols = matrix.cols();
    pyramid.details.resize(levels);

    Matrix current = matrix;
    for (int l = 0; l < levels; ++l) {
        const int rows = (current.rows() + 1) / 2;
        const int cols = (current.cols() + 1) / 2;
        Matrix ll(rows, cols);
        DetailLevel& level = pyramid.details[l];
        for (auto& band : level.bands) band = Matrix(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                const double a = padded(current, 2 * i, 2 * j);
                const double b = padded(current, 2 * i, 2 * j + 1);
                const double c = padded(current, 2 * i + 1, 2 * j);
                const double d = padded(current, 2 * i + 1, 2 * j + 1);
                ll(i, j) = kHalf * (a + b + c + d);
                level.band(Subband::HL)(i, j) = kHalf * (a - b + c - d);
                level.band(Subband::LH)(i, j) = kHalf * (a + b - c - d);
                level.band(Subband::HH)(i, j) = kHalf * (a - b - c + d);
            }
        }
        current = std::move(ll);
    }
    pyramid.approximation = std::move(current);
    return pyramid;
}

Matrix haar_inverse_2d(const WaveletPyramid& pyramid) {
    const int levels = pyramid.levels();
    if (levels < 1 || pyramid.base_rows < 1 || pyramid.base_cols < 1) {
        throw StructureError("wavelet pyramid has no levels or empty base dimensions");
    }
    const int coarse_rows = level_extent(pyramid.base_rows, levels);
    const int coarse_cols = level_extent(pyramid.base_cols, levels);
    if (pyramid.approximation.rows() != coarse_rows ||
        pyramid.approximation.cols() != coarse_cols) {
        throw StructureError("approximation band has inconsistent dimensions");
    }
    for (int l = 0; l < levels; ++l) {
        const int rows = level_extent(pyramid.base_rows, l + 1);
        const int cols = level_extent(pyramid.base_cols, l + 1);
        for (const auto& band : pyramid.details[l].bands) {
            if (band.rows() != rows || band.cols() != cols) {
                throw StructureError("detail band at level " + std::to_string(l + 1) +
                                     " has inconsistent dimensions");
            }
        }
    }

    Matrix current = pyramid.approximation;
    for (int l = levels - 1; l >= 0; --l) {
        const DetailLevel& level = pyramid.details[l];
        const int out_rows = level_extent(pyramid.base_rows, l);
        const int out_cols = level_extent(pyramid.base_cols, l);
        Matrix out(out_rows, out_cols);
        for (int i = 0; i < current.rows(); ++i) {
            for (int j = 0; j < current.cols(); ++j) {
                const double ll = current(i, j);
                const double hl = level.band(Subband::HL)(i, j);
                const double lh = level.band(Subband::LH)(i, j);
                const double hh = level.band(Subband::HH)(i, j);
                const int r0 = 2 * i;
                const int c0 = 2 * j;
                // Samples landing in the padding row/column are discarded.
                out(r0, c0) = kHalf * (ll + hl + lh + hh);
                if (c0 + 1 < out_cols) out(r0, c0 + 1) = kHalf * (ll - hl + lh - hh);
                if (r0 + 1 < out_rows) {
                    out(r0 + 1, c0) = kHalf * (ll + hl - lh - hh);
                    if (c0 + 1 < out_cols) out(r0 + 1, c0 + 1) = kHalf * (ll - hl - lh + hh);
                }
            }
        }
        current = std::move(out);
    }
    return current;
}

WaveletPyramid threshold_compress(const WaveletPyramid& pyramid, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
        throw ArgumentError("keep fraction must lie in (0, 1]");
    }
    WaveletPyramid out = pyramid;

    // Flattened scan order: level, then LH/HL/HH, then row-major.
    std::vector<double*> coeffs;
    coeffs.reserve(out.detail_count());
    for (auto& level : out.details) {
        for (auto& band : level.bands) {
            for (double& v : band.data()) coeffs.push_back(&v);
        }
    }
    const std::size_t n = coeffs.size();
    const auto keep = static_cast<std::size_t>(
        std::ceil(keep_fraction * static_cast<double>(n) - 1e-9));
    if (keep >= n) return out;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(*coeffs[a]) > std::abs(*coeffs[b]);
    });
    for (std::size_t i = keep; i < n; ++i) *coeffs[order[i]] = 0.0;
    return out;
}

Matrix to_matrix(const GrayImage& image) {
    return Matrix(image.height(), image.width(),
                  std::vector<double>(image.values().begin(), image.values().end()));
}

Matrix wavelet_energy_feature(const GrayImage& image, int levels) {
    const WaveletPyramid pyramid = haar_forward_2d(to_matrix(image), levels);
    const int rows = image.height();
    const int cols = image.width();

    Matrix energy(rows, cols);
    double total = 0.0;
    for (const auto& level : pyramid.details) {
        for (const auto& band : level.bands) {
            for (double v : band.data()) total += v * v;
        }
    }
    const double norm = 1.0 / (total + 1e-12);

    for (int l = 0; l < levels; ++l) {
        const int shift = l + 1;
        for (const auto& band : pyramid.details[l].bands) {
            for (int y = 0; y < rows; ++y) {
                for (int x = 0; x < cols; ++x) {
                    const double c = band(y >> shift, x >> shift);
                    energy(y, x) += c * c;
                }
            }
        }
    }
    for (double& v : energy.data()) v = std::min(v * norm, 1.0);
    return energy;
}

}  // namespace hcrf
