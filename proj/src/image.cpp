#include "hcrf/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "hcrf/errors.hpp"

namespace hcrf {

std::size_t checked_pixel_count(int width, int height) {
    if (width <= 0 || height <= 0) {
        throw FormatError("degenerate image dimensions " + std::to_string(width) + "x" +
                          std::to_string(height));
    }
    const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (count > kMaxPixels) {
        throw FormatError("image dimensions " + std::to_string(width) + "x" +
                          std::to_string(height) + " exceed the supported pixel count");
    }
    return count;
}

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

RgbImage::RgbImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (pixels_.size() != checked_pixel_count(width, height)) {
        throw ArgumentError("pixel buffer length does not match image dimensions");
    }
    for (const Rgb& p : pixels_) {
        if (!in_unit(p.r) || !in_unit(p.g) || !in_unit(p.b)) {
            throw ArgumentError("RGB channel value outside [0, 1]");
        }
    }
}

RgbImage::RgbImage(int width, int height, Rgb fill)
    : RgbImage(width, height, std::vector<Rgb>(checked_pixel_count(width, height), fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (values_.size() != checked_pixel_count(width, height)) {
        throw ArgumentError("gray buffer length does not match image dimensions");
    }
    for (double v : values_) {
        if (!in_unit(v)) throw ArgumentError("gray value outside [0, 1]");
    }
}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (bits_.size() != checked_pixel_count(width, height)) {
        throw ArgumentError("bit buffer length does not match image dimensions");
    }
    for (auto b : bits_) {
        if (b > 1) throw ArgumentError("binary image bit outside {0, 1}");
    }
}

LabelMap::LabelMap(int width, int height, int num_classes, std::vector<int> labels)
    : width_(width), height_(height), num_classes_(num_classes), labels_(std::move(labels)) {
    if (num_classes < 1 || num_classes > kMaxClasses) {
        throw ArgumentError("class count " + std::to_string(num_classes) + " outside [1, " +
                            std::to_string(kMaxClasses) + "]");
    }
    if (labels_.size() != checked_pixel_count(width, height)) {
        throw ArgumentError("label buffer length does not match image dimensions");
    }
    for (int l : labels_) {
        if (l < 0 || l >= num_classes) {
            throw ArgumentError("label " + std::to_string(l) + " outside [0, " +
                                std::to_string(num_classes - 1) + "]");
        }
    }
}

std::uint8_t quantize_channel(double v) {
    const double scaled = std::round(v * 255.0);
    return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

// ---------------------------------------------------------------------------
// PNM

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

// Cursor over a PNM byte stream; header tokens may be separated by
// whitespace and '#' comments.
class PnmReader {
public:
    PnmReader(const std::string& bytes, std::string name)
        : bytes_(bytes), name_(std::move(name)) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            throw FormatError(name_ + ": expected an integer in PNM data");
        }
        long long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > std::numeric_limits<int>::max()) {
                throw FormatError(name_ + ": integer overflow in PNM data");
            }
            ++pos_;
        }
        return static_cast<int>(v);
    }

    // After the maxval token exactly one whitespace byte precedes raster data.
    void skip_single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw FormatError(name_ + ": missing whitespace before raster data");
        }
        ++pos_;
    }

    std::uint8_t next_byte() {
        if (pos_ >= bytes_.size()) throw FormatError(name_ + ": truncated raster data");
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& bytes_;
    std::string name_;
    std::size_t pos_ = 2;
};

struct PnmHeader {
    int width;
    int height;
    int maxval;
};

PnmHeader read_pnm_header(PnmReader& reader, const std::string& name) {
    PnmHeader h{};
    h.width = reader.next_int();
    h.height = reader.next_int();
    h.maxval = reader.next_int();
    checked_pixel_count(h.width, h.height);
    if (h.maxval < 1 || h.maxval > 255) {
        throw FormatError(name + ": unsupported PNM maxval " + std::to_string(h.maxval) +
                          " (only 8-bit samples are supported)");
    }
    return h;
}

std::vector<std::uint8_t> read_samples(PnmReader& reader, std::size_t count, bool ascii,
                                       int maxval, const std::string& name) {
    std::vector<std::uint8_t> samples(count);
    if (!ascii) reader.skip_single_whitespace();
    for (auto& s : samples) {
        const int v = ascii ? reader.next_int() : reader.next_byte();
        if (v > maxval) throw FormatError(name + ": sample exceeds maxval");
        s = static_cast<std::uint8_t>(v);
    }
    return samples;
}

bool has_png_signature(const std::string& bytes) {
    static constexpr std::array<unsigned char, 8> sig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return bytes.size() >= sig.size() && std::equal(sig.begin(), sig.end(), bytes.begin(),
                                                    [](unsigned char a, char b) {
                                                        return a == static_cast<unsigned char>(b);
                                                    });
}

struct PngReadState {
    const std::string* bytes;
    std::size_t pos;
};

void png_read_from_string(png_structp png, png_bytep out, png_size_t length) {
    auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (state->pos + length > state->bytes->size()) png_error(png, "truncated PNG data");
    std::copy_n(state->bytes->data() + state->pos, length, reinterpret_cast<char*>(out));
    state->pos += length;
}

[[noreturn]] void png_error_to_exception(png_structp, png_const_charp message) {
    throw FormatError(std::string("PNG decode error: ") + message);
}

void png_warning_ignore(png_structp, png_const_charp) {}

RgbImage decode_png(const std::string& bytes, const std::string& name) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_to_exception, png_warning_ignore);
    if (png == nullptr) throw FormatError(name + ": cannot initialize PNG decoder");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* png;
        png_infop* info;
        ~Guard() { png_destroy_read_struct(png, info, nullptr); }
    } guard{&png, &info};
    if (info == nullptr) throw FormatError(name + ": cannot initialize PNG decoder");

    PngReadState state{&bytes, 0};
    png_set_read_fn(png, &state, png_read_from_string);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth != 8) {
        throw FormatError(name + ": unsupported PNG bit depth " + std::to_string(bit_depth));
    }
    int channels = 0;
    if (color_type == PNG_COLOR_TYPE_RGB) {
        channels = 3;
    } else if (color_type == PNG_COLOR_TYPE_RGB_ALPHA) {
        channels = 4;
    } else {
        throw FormatError(name + ": unsupported PNG color type " + std::to_string(color_type) +
                          " (expected RGB or RGBA)");
    }
    const auto width = static_cast<int>(png_get_image_width(png, info));
    const auto height = static_cast<int>(png_get_image_height(png, info));
    checked_pixel_count(width, height);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    std::vector<png_byte> raster(stride * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = raster.data() + y * stride;
    png_read_image(png, rows.data());

    std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const png_byte* p = raster.data() + i * channels;
        pixels[i] = {p[0] / 255.0, p[1] / 255.0, p[2] / 255.0};
    }
    return RgbImage(width, height, std::move(pixels));
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
    const std::string name = path.string();
    const std::string bytes = read_file(path);
    if (has_png_signature(bytes)) return decode_png(bytes, name);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '3' && bytes[1] != '6')) {
        throw FormatError(name + ": unsupported image format (expected PPM P3/P6 or PNG)");
    }
    const bool ascii = bytes[1] == '3';
    PnmReader reader(bytes, name);
    const PnmHeader h = read_pnm_header(reader, name);
    const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
    const auto samples = read_samples(reader, count * 3, ascii, h.maxval, name);
    const double scale = 1.0 / h.maxval;
    std::vector<Rgb> pixels(count);
    for (std::size_t i = 0; i < count; ++i) {
        pixels[i] = {samples[3 * i] * scale, samples[3 * i + 1] * scale,
                     samples[3 * i + 2] * scale};
    }
    return RgbImage(h.width, h.height, std::move(pixels));
}

void save_image(const RgbImage& image, const std::filesystem::path& path) {
    std::string out = "P6\n" + std::to_string(image.width()) + " " +
                      std::to_string(image.height()) + "\n255\n";
    out.reserve(out.size() + image.size() * 3);
    for (const Rgb& p : image.pixels()) {
        out.push_back(static_cast<char>(quantize_channel(p.r)));
        out.push_back(static_cast<char>(quantize_channel(p.g)));
        out.push_back(static_cast<char>(quantize_channel(p.b)));
    }
    write_file(path, out);
}

ByteRaster load_pgm(const std::filesystem::path& path) {
    const std::string name = path.string();
    const std::string bytes = read_file(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw FormatError(name + ": unsupported format (expected PGM P2/P5)");
    }
    PnmReader reader(bytes, name);
    const PnmHeader h = read_pnm_header(reader, name);
    ByteRaster raster;
    raster.width = h.width;
    raster.height = h.height;
    raster.data = read_samples(reader, static_cast<std::size_t>(h.width) * h.height,
                               bytes[1] == '2', h.maxval, name);
    return raster;
}

void save_pgm(const ByteRaster& raster, const std::filesystem::path& path) {
    const std::size_t count = checked_pixel_count(raster.width, raster.height);
    if (raster.data.size() != count) {
        throw ArgumentError("PGM raster length does not match its dimensions");
    }
    std::string out = "P5\n" + std::to_string(raster.width) + " " +
                      std::to_string(raster.height) + "\n255\n";
    out.append(raster.data.begin(), raster.data.end());
    write_file(path, out);
}

LabelMap load_label_map(const std::filesystem::path& path, int num_classes) {
    const ByteRaster raster = load_pgm(path);
    std::vector<int> labels(raster.data.begin(), raster.data.end());
    for (int l : labels) {
        if (l >= num_classes) {
            throw FormatError(path.string() + ": label " + std::to_string(l) +
                              " is not valid for " + std::to_string(num_classes) + " classes");
        }
    }
    return LabelMap(raster.width, raster.height, num_classes, std::move(labels));
}

void save_label_map(const LabelMap& labels, const std::filesystem::path& path) {
    ByteRaster raster{labels.width(), labels.height(), {}};
    raster.data.assign(labels.labels().begin(), labels.labels().end());
    save_pgm(raster, path);
}

// ---------------------------------------------------------------------------
// Grayscale and binarization

GrayImage to_grayscale(const RgbImage& image) {
    std::vector<double> values(image.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Rgb& p = image[i];
        values[i] = std::clamp(0.299 * p.r + 0.587 * p.g + 0.114 * p.b, 0.0, 1.0);
    }
    return GrayImage(image.width(), image.height(), std::move(values));
}

int histogram_bin(double v) {
    // The small offset keeps exact multiples of 1/255 in their own bin.
    const int bin = static_cast<int>(std::floor(v * 255.0 + 1e-9));
    return std::clamp(bin, 0, 255);
}

double otsu_threshold(const GrayImage& gray) {
    std::array<std::uint64_t, 256> hist{};
    for (double v : gray.values()) ++hist[histogram_bin(v)];

    const auto populated = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
    if (populated == 1) {
        const auto bin = std::find_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
        return static_cast<double>(bin - hist.begin()) / 255.0;
    }

    // Integer running sums keep the class statistics exact.
    std::uint64_t total_count = 0;
    std::uint64_t total_sum = 0;
    for (int b = 0; b < 256; ++b) {
        total_count += hist[b];
        total_sum += hist[b] * static_cast<std::uint64_t>(b);
    }

    std::uint64_t dark_count = 0;
    std::uint64_t dark_sum = 0;
    int best_t = 1;
    double best_var = -1.0;
    for (int t = 1; t < 256; ++t) {
        dark_count += hist[t - 1];
        dark_sum += hist[t - 1] * static_cast<std::uint64_t>(t - 1);
        const std::uint64_t light_count = total_count - dark_count;
        if (dark_count == 0 || light_count == 0) continue;
        const double mean_dark = static_cast<double>(dark_sum) / dark_count;
        const double mean_light = static_cast<double>(total_sum - dark_sum) / light_count;
        const double diff = mean_dark - mean_light;
        const double var = static_cast<double>(dark_count) * static_cast<double>(light_count) *
                           diff * diff;
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t / 255.0;
}

BinaryImage binarize(const GrayImage& gray, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ArgumentError("binarization threshold must lie in [0, 1]");
    }
    std::vector<std::uint8_t> bits(gray.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = gray[i] >= threshold ? 1 : 0;
    return BinaryImage(gray.width(), gray.height(), std::move(bits));
}

RgbImage render_label_map(const LabelMap& labels, std::span<const Rgb> palette) {
    if (palette.size() < static_cast<std::size_t>(labels.num_classes())) {
        throw ArgumentError("palette has " + std::to_string(palette.size()) +
                            " colors but the label map has " +
                            std::to_string(labels.num_classes()) + " classes");
    }
    std::vector<Rgb> pixels(labels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = palette[labels[i]];
    return RgbImage(labels.width(), labels.height(), std::move(pixels));
}

std::vector<Rgb> default_palette(int num_classes) {
    static constexpr std::array<Rgb, 12> base{{
        {0.50, 0.50, 0.50}, {0.50, 0.25, 0.50}, {0.90, 0.10, 0.10}, {0.15, 0.55, 0.15},
        {0.25, 0.45, 0.85}, {0.95, 0.80, 0.15}, {0.55, 0.35, 0.15}, {0.10, 0.75, 0.75},
        {0.95, 0.55, 0.20}, {0.60, 0.85, 0.30}, {0.85, 0.45, 0.70}, {0.20, 0.20, 0.20},
    }};
    std::vector<Rgb> palette(static_cast<std::size_t>(std::max(num_classes, 0)));
    for (std::size_t i = 0; i < palette.size(); ++i) palette[i] = base[i % base.size()];
    return palette;
}

}  // namespace hcrf
