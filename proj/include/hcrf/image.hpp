#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hcrf {

// Largest accepted pixel count; anything bigger is treated as a corrupt header.
inline constexpr std::size_t kMaxPixels = std::size_t{1} << 28;

// Maximum number of classes a label map can carry (labels travel as 8-bit PGM).
inline constexpr int kMaxClasses = 256;

struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Throws FormatError for zero or overflowing dimensions.
std::size_t checked_pixel_count(int width, int height);

/// Dense row-major RGB image with channels in [0, 1].
class RgbImage {
public:
    RgbImage(int width, int height, std::vector<Rgb> pixels);
    RgbImage(int width, int height, Rgb fill);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }

    const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
    const Rgb& operator[](std::size_t i) const { return pixels_[i]; }
    std::span<const Rgb> pixels() const { return pixels_; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

private:
    int width_;
    int height_;
    std::vector<Rgb> pixels_;
};

/// Single-channel image with values in [0, 1].
class GrayImage {
public:
    GrayImage(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }

    double at(int x, int y) const {
        return values_[static_cast<std::size_t>(y) * width_ + x];
    }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

private:
    int width_;
    int height_;
    std::vector<double> values_;
};

class BinaryImage {
public:
    BinaryImage(int width, int height, std::vector<std::uint8_t> bits);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return bits_.size(); }

    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
    std::span<const std::uint8_t> bits() const { return bits_; }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> bits_;
};

/// Per-pixel class indices in {0..K-1}.
class LabelMap {
public:
    LabelMap(int width, int height, int num_classes, std::vector<int> labels);

    int width() const { return width_; }
    int height() const { return height_; }
    int num_classes() const { return num_classes_; }
    std::size_t size() const { return labels_.size(); }

    int at(int x, int y) const {
        return labels_[static_cast<std::size_t>(y) * width_ + x];
    }
    int operator[](std::size_t i) const { return labels_[i]; }
    std::span<const int> labels() const { return labels_; }

    friend bool operator==(const LabelMap&, const LabelMap&) = default;

private:
    int width_;
    int height_;
    int num_classes_;
    std::vector<int> labels_;
};

// 8-bit single-channel raster as stored in a PGM file.
struct ByteRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;
};

std::uint8_t quantize_channel(double v);

// Reads PPM (P3/P6, maxval <= 255) or PNG (8-bit RGB/RGBA, alpha dropped).
RgbImage load_image(const std::filesystem::path& path);

// Writes binary PPM (P6).
void save_image(const RgbImage& image, const std::filesystem::path& path);

// Reads PGM (P2/P5, maxval <= 255).
ByteRaster load_pgm(const std::filesystem::path& path);
void save_pgm(const ByteRaster& raster, const std::filesystem::path& path);

// Label maps travel as PGM whose byte values are class indices.
LabelMap load_label_map(const std::filesystem::path& path, int num_classes);
void save_label_map(const LabelMap& labels, const std::filesystem::path& path);

GrayImage to_grayscale(const RgbImage& image);

// Bin index used by otsu_threshold for a value in [0, 1].
int histogram_bin(double v);

/// Otsu threshold over a 256-bin histogram of the gray values.
///
/// Candidate thresholds are the bin edges t/255 for t in 1..255; pixels in
/// bins below t form the dark class. The edge that maximizes between-class
/// variance wins, ties going to the lowest edge. A constant image returns
/// the edge of its single populated bin.
double otsu_threshold(const GrayImage& gray);

BinaryImage binarize(const GrayImage& gray, double threshold);

RgbImage render_label_map(const LabelMap& labels, std::span<const Rgb> palette);

// A fixed palette of visually distinct colors; cycles past its natural length.
std::vector<Rgb> default_palette(int num_classes);

}  // namespace hcrf

namespace hcrf {

// An image paired with its ground-truth labeling.
struct LabeledImage {
    RgbImage image;
    LabelMap labels;
};

}  // namespace hcrf
