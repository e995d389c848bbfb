#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcrf/image.hpp"

namespace hcrf {

struct Band {
    int label = 0;
    double fraction = 0.0;
    Rgb color;
};

// Axis-aligned rectangle [x0, x1) x [y0, y1) painted over the bands.
struct SceneObject {
    int label = 0;
    Rgb color;
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;
};

struct SceneSpec {
    std::string family;
    int width = 32;
    int height = 32;
    int num_classes = 3;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
    std::vector<Band> bands;  // top to bottom; fractions sum to 1
    std::vector<SceneObject> objects;
};

/// Paints the bands top to bottom (band i ends at row floor(H * sum of the
/// first i+1 fractions), the last band at H), then the objects in order, then
/// adds per-channel Gaussian noise from XorShift64Star(seed) in row-major,
/// r-g-b order, clamped to [0, 1]. The label map is the painted geometry.
LabeledImage generate_scene(const SceneSpec& spec);

struct SceneRecord {
    std::string name;
    std::string family;
    LabeledImage scene;
};

struct Benchmark {
    std::vector<SceneRecord> train;
    std::vector<SceneRecord> test;
};

// Class indices and base colors shared by the bimodal benchmark.
namespace bimodal {
inline constexpr int kNumClasses = 3;
inline constexpr int kBackdrop = 0;  // sky in family A, grass in family B
inline constexpr int kRoad = 1;
inline constexpr int kWall = 2;
inline constexpr Rgb kGray{0.5, 0.5, 0.5};
inline constexpr Rgb kSky{0.25, 0.55, 0.90};
inline constexpr Rgb kGrass{0.20, 0.65, 0.25};
inline constexpr double kDefaultNoise = 0.05;

// Family A: sky band on top, gray road below; the sky fraction is
// uniform in [0.15, 0.30]. Family B: gray wall on top, grass below; the
// wall fraction is uniform in [0.70, 0.85].
SceneSpec family_a(int size, double top_fraction, std::uint64_t seed, double noise_sigma);
SceneSpec family_b(int size, double top_fraction, std::uint64_t seed, double noise_sigma);

std::vector<std::string> class_names();
}  // namespace bimodal

/// Two scene families sharing K = 3 and one ambiguous mid-gray color that
/// is road in family A and wall in family B. Each family contributes
/// count_per_family scenes, the first round(0.7 * count) of which go to the
/// training split. Deterministic in (seed, count_per_family, size, noise).
Benchmark generate_bimodal_benchmark(std::uint64_t seed, int count_per_family, int size,
                                     double noise_sigma = bimodal::kDefaultNoise);

}  // namespace hcrf
