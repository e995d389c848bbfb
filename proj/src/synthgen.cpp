#include "hcrf/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "hcrf/errors.hpp"
#include "hcrf/rng.hpp"

namespace hcrf {

namespace {

bool valid_color(const Rgb& c) {
    const auto ok = [](double v) { return v >= 0.0 && v <= 1.0; };
    return ok(c.r) && ok(c.g) && ok(c.b);
}

void validate(const SceneSpec& spec) {
    checked_pixel_count(spec.width, spec.height);
    if (spec.num_classes < 1 || spec.num_classes > kMaxClasses) {
        throw ArgumentError("scene class count out of range");
    }
    if (!(spec.noise_sigma >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
    if (spec.bands.empty()) throw ArgumentError("scene needs at least one band");
    double sum = 0.0;
    for (const Band& b : spec.bands) {
        if (!(b.fraction >= 0.0)) throw ArgumentError("band fractions must be >= 0");
        if (b.label < 0 || b.label >= spec.num_classes) throw ArgumentError("band label out of range");
        if (!valid_color(b.color)) throw ArgumentError("band color outside [0, 1]");
        sum += b.fraction;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ArgumentError("band fractions sum to " + std::to_string(sum) + ", expected 1");
    }
    for (const SceneObject& o : spec.objects) {
        if (o.label < 0 || o.label >= spec.num_classes) {
            throw ArgumentError("object label out of range");
        }
        if (!valid_color(o.color)) throw ArgumentError("object color outside [0, 1]");
        if (o.x0 < 0 || o.y0 < 0 || o.x1 > spec.width || o.y1 > spec.height || o.x0 > o.x1 ||
            o.y0 > o.y1) {
            throw ArgumentError("object rectangle outside the scene");
        }
    }
}

}  // namespace

LabeledImage generate_scene(const SceneSpec& spec) {
    validate(spec);
    const int w = spec.width;
    const int h = spec.height;
    std::vector<Rgb> pixels(static_cast<std::size_t>(w) * h);
    std::vector<int> labels(pixels.size());

    int row = 0;
    double cumulative = 0.0;
    for (std::size_t b = 0; b < spec.bands.size(); ++b) {
        cumulative += spec.bands[b].fraction;
        const int end = b + 1 == spec.bands.size()
                            ? h
                            : std::clamp(static_cast<int>(std::floor(cumulative * h)), row, h);
        for (int y = row; y < end; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                pixels[p] = spec.bands[b].color;
                labels[p] = spec.bands[b].label;
            }
        }
        row = end;
    }
    for (const SceneObject& o : spec.objects) {
        for (int y = o.y0; y < o.y1; ++y) {
            for (int x = o.x0; x < o.x1; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                pixels[p] = o.color;
                labels[p] = o.label;
            }
        }
    }
    if (spec.noise_sigma > 0.0) {
        XorShift64Star rng(spec.seed);
        const auto jitter = [&](double v) {
            return std::clamp(v + spec.noise_sigma * rng.normal(), 0.0, 1.0);
        };
        for (Rgb& p : pixels) {
            p.r = jitter(p.r);
            p.g = jitter(p.g);
            p.b = jitter(p.b);
        }
    }
    return {RgbImage(w, h, std::move(pixels)), LabelMap(w, h, spec.num_classes, std::move(labels))};
}

namespace bimodal {

SceneSpec family_a(int size, double top_fraction, std::uint64_t seed, double noise_sigma) {
    SceneSpec spec;
    spec.family = "A";
    spec.width = spec.height = size;
    spec.num_classes = kNumClasses;
    spec.seed = seed;
    spec.noise_sigma = noise_sigma;
    spec.bands = {{kBackdrop, top_fraction, kSky}, {kRoad, 1.0 - top_fraction, kGray}};
    return spec;
}

SceneSpec family_b(int size, double top_fraction, std::uint64_t seed, double noise_sigma) {
    SceneSpec spec;
    spec.family = "B";
    spec.width = spec.height = size;
    spec.num_classes = kNumClasses;
    spec.seed = seed;
    spec.noise_sigma = noise_sigma;
    spec.bands = {{kWall, top_fraction, kGray}, {kBackdrop, 1.0 - top_fraction, kGrass}};
    return spec;
}

std::vector<std::string> class_names() { return {"backdrop", "road", "wall"}; }

}  // namespace bimodal

Benchmark generate_bimodal_benchmark(std::uint64_t seed, int count_per_family, int size,
                                     double noise_sigma) {
    if (count_per_family < 2) {
        throw ArgumentError("count_per_family must be at least 2, got " +
                            std::to_string(count_per_family));
    }
    if (size < 4) throw ArgumentError("benchmark scenes must be at least 4x4");
    const int train_count =
        std::clamp(static_cast<int>(std::lround(0.7 * count_per_family)), 1, count_per_family - 1);

    XorShift64Star rng(seed);
    Benchmark out;
    for (int family = 0; family < 2; ++family) {
        for (int i = 0; i < count_per_family; ++i) {
            const double u = rng.uniform();
            const std::uint64_t noise_seed = rng.next_u64();
            const SceneSpec spec = family == 0
                                       ? bimodal::family_a(size, 0.15 + 0.15 * u, noise_seed, noise_sigma)
                                       : bimodal::family_b(size, 0.70 + 0.15 * u, noise_seed, noise_sigma);
            char name[32];
            std::snprintf(name, sizeof name, "%s%03d", spec.family.c_str(), i);
            SceneRecord record{name, spec.family, generate_scene(spec)};
            (i < train_count ? out.train : out.test).push_back(std::move(record));
        }
    }
    return out;
}

}  // namespace hcrf
