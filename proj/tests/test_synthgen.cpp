#include <gtest/gtest.h>

#include "hcrf/descriptor.hpp"
#include "hcrf/errors.hpp"
#include "hcrf/synthgen.hpp"

namespace hcrf {
namespace {

SceneSpec two_bands(int height, double noise) {
    SceneSpec s;
    s.family = "t";
    s.width = 3;
    s.height = height;
    s.num_classes = 2;
    s.seed = 5;
    s.noise_sigma = noise;
    s.bands = {{0, 0.5, {1, 0, 0}}, {1, 0.5, {0, 0, 1}}};
    return s;
}

TEST(GenerateScene, SingleNoiselessBandIsConstant) {
    SceneSpec s = two_bands(5, 0.0);
    s.bands = {{1, 1.0, {0.2, 0.3, 0.4}}};
    const LabeledImage li = generate_scene(s);
    for (const Rgb& p : li.image.pixels()) EXPECT_EQ(p, (Rgb{0.2, 0.3, 0.4}));
    for (int v : li.labels.labels()) EXPECT_EQ(v, 1);
}

TEST(GenerateScene, HalfBandsSplitRows) {
    const LabeledImage li = generate_scene(two_bands(4, 0.0));
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 3; ++x) {
            EXPECT_EQ(li.labels.at(x, y), y < 2 ? 0 : 1);
            EXPECT_EQ(li.image.at(x, y), y < 2 ? (Rgb{1, 0, 0}) : (Rgb{0, 0, 1}));
        }
}

TEST(GenerateScene, ObjectsArePaintedOverBands) {
    SceneSpec s = two_bands(6, 0.0);
    s.width = 6;
    s.objects = {{1, {0, 1, 0}, 1, 1, 3, 2}};
    const LabeledImage li = generate_scene(s);
    EXPECT_EQ(li.labels.at(1, 1), 1);
    EXPECT_EQ(li.labels.at(2, 1), 1);
    EXPECT_EQ(li.labels.at(3, 1), 0);
    EXPECT_EQ(li.labels.at(1, 2), 0);
    EXPECT_EQ(li.image.at(2, 1), (Rgb{0, 1, 0}));
}

TEST(GenerateScene, NoiseIsSeededAndClamped) {
    const SceneSpec s = two_bands(8, 0.3);
    const LabeledImage a = generate_scene(s);
    const LabeledImage b = generate_scene(s);
    EXPECT_EQ(a.image.pixels().size(), b.image.pixels().size());
    EXPECT_TRUE(std::equal(a.image.pixels().begin(), a.image.pixels().end(), b.image.pixels().begin()));
    EXPECT_EQ(a.labels, b.labels);
    bool differs = false;
    for (const Rgb& p : a.image.pixels()) {
        for (double c : {p.r, p.g, p.b}) {
            EXPECT_GE(c, 0.0);
            EXPECT_LE(c, 1.0);
        }
        differs = differs || !(p == Rgb{1, 0, 0} || p == Rgb{0, 0, 1});
    }
    EXPECT_TRUE(differs);
    SceneSpec other = s;
    other.seed = 6;
    EXPECT_FALSE(std::equal(a.image.pixels().begin(), a.image.pixels().end(),
                            generate_scene(other).image.pixels().begin()));
    // Noise never moves labels.
    EXPECT_EQ(generate_scene(two_bands(8, 0.0)).labels, a.labels);
}

TEST(GenerateScene, RejectsInvalidSpecs) {
    SceneSpec s = two_bands(4, 0.0);
    s.bands[1].fraction = 0.4;
    EXPECT_THROW(generate_scene(s), ArgumentError);
    SceneSpec neg = two_bands(4, -0.1);
    EXPECT_THROW(generate_scene(neg), ArgumentError);
    SceneSpec bad_label = two_bands(4, 0.0);
    bad_label.bands[0].label = 2;
    EXPECT_THROW(generate_scene(bad_label), ArgumentError);
}

TEST(Bimodal, SplitsSeventyThirtyPerFamily) {
    const Benchmark b = generate_bimodal_benchmark(7, 10, 32);
    ASSERT_EQ(b.train.size(), 14u);
    ASSERT_EQ(b.test.size(), 6u);
    int a_train = 0;
    for (const SceneRecord& r : b.train) a_train += r.family == "A";
    EXPECT_EQ(a_train, 7);
    EXPECT_EQ(b.train[0].name, "A000");
    std::vector<std::string> test_names;
    for (const SceneRecord& r : b.test) test_names.push_back(r.name);
    EXPECT_EQ(test_names, (std::vector<std::string>{"A007", "A008", "A009", "B007", "B008", "B009"}));
    EXPECT_THROW(generate_bimodal_benchmark(7, 1, 32), ArgumentError);
}

TEST(Bimodal, IsDeterministic) {
    const Benchmark a = generate_bimodal_benchmark(3, 4, 16);
    const Benchmark b = generate_bimodal_benchmark(3, 4, 16);
    ASSERT_EQ(a.train.size(), b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        EXPECT_EQ(a.train[i].name, b.train[i].name);
        EXPECT_EQ(a.train[i].scene.labels, b.train[i].scene.labels);
        EXPECT_TRUE(std::equal(a.train[i].scene.image.pixels().begin(), a.train[i].scene.image.pixels().end(),
                               b.train[i].scene.image.pixels().begin()));
    }
}

TEST(Bimodal, NoiselessScenesReproducePrototypes) {
    const Benchmark b = generate_bimodal_benchmark(11, 3, 16, 0.0);
    for (const auto* split : {&b.train, &b.test})
        for (const SceneRecord& r : *split) {
            const LabeledImage& li = r.scene;
            for (std::size_t p = 0; p < li.image.size(); ++p) {
                const int k = li.labels[p];
                const Rgb expected = k == bimodal::kBackdrop ? (r.family == "A" ? bimodal::kSky : bimodal::kGrass)
                                                             : bimodal::kGray;
                EXPECT_EQ(li.image[p], expected);
                EXPECT_TRUE(r.family == "A" ? k != bimodal::kWall : k != bimodal::kRoad);
            }
        }
}

TEST(Bimodal, FamiliesSeparateInDescriptorSpace) {
    const DescriptorConfig cfg{4, bimodal::kNumClasses, 1.0};
    const LabeledImage a = generate_scene(bimodal::family_a(32, 0.2, 0, 0.0));
    const LabeledImage b = generate_scene(bimodal::family_b(32, 0.8, 0, 0.0));
    const LabeledImage a2 = generate_scene(bimodal::family_a(32, 0.3, 0, 0.0));
    const auto da = positional_descriptor(a.labels, cfg);
    const auto db = positional_descriptor(b.labels, cfg);
    const auto da2 = positional_descriptor(a2.labels, cfg);
    // Every cell of A carries no wall and every cell of B no road.
    double a_wall = 0, b_road = 0, a_road = 0, b_wall = 0;
    for (int c = 0; c < 16; ++c) {
        a_road += da[c * 3 + bimodal::kRoad];
        a_wall += da[c * 3 + bimodal::kWall];
        b_road += db[c * 3 + bimodal::kRoad];
        b_wall += db[c * 3 + bimodal::kWall];
    }
    EXPECT_EQ(a_wall, 0.0);
    EXPECT_EQ(b_road, 0.0);
    EXPECT_GT(a_road, 8.0);
    EXPECT_GT(b_wall, 8.0);
    EXPECT_GT(descriptor_distance(da, db), 4.0 * descriptor_distance(da, da2));
}

TEST(Bimodal, GrayPixelsAreGenuinelyAmbiguous) {
    const Benchmark b = generate_bimodal_benchmark(7, 10, 32, 0.0);
    long road = 0, wall = 0, total = 0;
    for (const SceneRecord& r : b.train)
        for (std::size_t p = 0; p < r.scene.image.size(); ++p) {
            ++total;
            if (!(r.scene.image[p] == bimodal::kGray)) continue;
            road += r.scene.labels[p] == bimodal::kRoad;
            wall += r.scene.labels[p] == bimodal::kWall;
        }
    // A color-only classifier labels all gray pixels alike, so it is capped at
    // the majority share.
    const double majority = static_cast<double>(std::max(road, wall)) / (road + wall);
    EXPECT_LT(majority, 0.75);
    EXPECT_GT(static_cast<double>(road + wall) / total, 0.15);
}

}  // namespace
}  // namespace hcrf
