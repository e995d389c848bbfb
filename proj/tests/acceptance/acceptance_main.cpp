// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "hcrf/clustering.hpp"
#include "hcrf/crf.hpp"
#include "hcrf/descriptor.hpp"
#include "hcrf/manifest.hpp"
#include "hcrf/pipeline.hpp"
#include "hcrf/synthgen.hpp"
#include "hcrf/wavelet.hpp"
#include "oracles/oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace hcrf;
namespace fs = std::filesystem;

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

// Criterion 2 bound: the calibrated match rate (0.920 on this instance set)
// minus 10 points.
constexpr double kIcmMatchRateBound = 0.82;

int failures = 0;

void report(int id, const char* name, double limit_seconds, const std::function<Verdict()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v.ok = false;
        v.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.ok && seconds > limit_seconds) {
        v.ok = false;
        v.detail += " (over the " + std::to_string(limit_seconds) + " s budget)";
    }
    if (!v.ok) ++failures;
    std::printf("%s [%d] %s: %s (%.3f s)\n", v.ok ? "PASS" : "FAIL", id, name, v.detail.c_str(), seconds);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Verdict descriptor_arithmetic() {
    Verdict v;
    const DescriptorConfig cfg{3, 3, 1.0};
    const LabelMap zeros(9, 9, 3, std::vector<int>(81, 0));
    const auto pos = positional_descriptor(zeros, cfg);
    const auto app = appearance_descriptor(RgbImage(9, 9, Rgb{}), zeros, cfg);
    v.require(pos.size() == 27, "positional length " + std::to_string(pos.size()));
    v.require(app.size() == 81, "appearance length " + std::to_string(app.size()));
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> dim(3, 40);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const LabelMap labels = testing::random_labels(rng, dim(rng), dim(rng), 3);
        const auto s = positional_descriptor(labels, cfg);
        for (int c = 0; c < 9; ++c)
            worst = std::max(worst, std::abs(s[c * 3] + s[c * 3 + 1] + s[c * 3 + 2] - 1.0));
    }
    v.require(worst <= 1e-12, "cell sum deviation " + fmt("%.3g", worst));
    if (v.ok) v.detail = "lengths 27/81, worst cell-sum deviation " + fmt("%.3g", worst) + " over 100 maps";
    return v;
}

Verdict inference_soundness() {
    Verdict v;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> weight(0.0, 1.0);
    std::uniform_real_distribution<double> lambda(0.0, 2.0);
    int matches = 0;
    for (int i = 0; i < 200; ++i) {
        const RgbImage img = testing::random_image(rng, 3, 3);
        const PixelFeatureMap f = extract_features(img);
        std::vector<double> w(2 * kFeatureDim);
        for (double& x : w) x = weight(rng);
        const CrfModel model{UnaryModel(2, kFeatureDim, w), lambda(rng)};
        std::vector<double> trace;
        IcmOptions opt;
        opt.energy_trace = &trace;
        const IcmResult r = icm_infer(model, img, f, nullptr, opt);
        const double exact = total_energy(model, img, f, exact_map_enumerate(model, img, f));
        v.require(r.energy >= exact - 1e-12, "ICM below the exact minimum on instance " + std::to_string(i));
        v.require(!trace.empty() && r.energy <= trace.front() + 1e-12,
                  "ICM above its initial energy on instance " + std::to_string(i));
        for (std::size_t t = 1; t < trace.size(); ++t)
            v.require(trace[t] <= trace[t - 1] + 1e-12, "energy rose on instance " + std::to_string(i));
        if (r.energy <= exact + 1e-12) ++matches;
    }
    const double rate = matches / 200.0;
    v.require(rate >= kIcmMatchRateBound, "match rate " + fmt("%.3f", rate));
    if (v.ok) v.detail = "exact-minimum match rate " + fmt("%.3f", rate) + " over 200 instances";
    return v;
}

Verdict gradient_check() {
    Verdict v;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> f(5 * 4);
        for (double& x : f) x = n(rng);
        const PixelFeatureMap features(5, 1, 4, f);
        const LabelMap labels = testing::random_labels(rng, 5, 1, 3);
        const std::vector<FeatureSample> data{{&features, &labels}};
        std::vector<double> w(12);
        for (double& x : w) x = n(rng);
        std::vector<double> grad(12);
        unary_objective(w, 3, 4, data, 1e-4, grad);
        const auto fd = oracle::central_difference(
            [&](const std::vector<double>& x) { return unary_objective(x, 3, 4, data, 1e-4); }, w, 1e-5);
        for (std::size_t j = 0; j < w.size(); ++j)
            worst = std::max(worst, std::abs(grad[j] - fd[j]) / std::max(1.0, std::abs(fd[j])));
    }
    v.require(worst <= 1e-5, "relative error " + fmt("%.3g", worst));
    if (v.ok) v.detail = "worst relative error " + fmt("%.3g", worst) + " on 20 instances";
    return v;
}

Verdict wavelet_exactness() {
    Verdict v;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_roundtrip = 0, worst_parseval = 0;
    for (int rows = 2; rows <= 64; rows += 3)
        for (int cols : {rows, rows + 1, 64}) {
            Matrix m(rows, cols);
            for (double& x : m.data()) x = u(rng);
            for (int levels = 1; levels <= std::min(3, max_haar_levels(rows, cols)); ++levels) {
                const WaveletPyramid p = haar_forward_2d(m, levels);
                const Matrix back = haar_inverse_2d(p);
                for (std::size_t i = 0; i < m.data().size(); ++i)
                    worst_roundtrip = std::max(worst_roundtrip, std::abs(back.data()[i] - m.data()[i]));
                // Parseval holds when no level needs padding.
                if (rows % (1 << levels) || cols % (1 << levels)) continue;
                double e_in = 0, e_out = 0;
                for (double x : m.data()) e_in += x * x;
                for (double x : p.approximation.data()) e_out += x * x;
                for (const DetailLevel& d : p.details)
                    for (const Matrix& b : d.bands)
                        for (double x : b.data()) e_out += x * x;
                worst_parseval = std::max(worst_parseval, std::abs(e_out - e_in) / e_in);
            }
        }
    v.require(worst_roundtrip <= 1e-9, "roundtrip error " + fmt("%.3g", worst_roundtrip));
    v.require(worst_parseval <= 1e-9, "Parseval deviation " + fmt("%.3g", worst_parseval));
    if (v.ok)
        v.detail = "roundtrip " + fmt("%.3g", worst_roundtrip) + ", Parseval " + fmt("%.3g", worst_parseval);
    return v;
}

Verdict hierarchical_benefit() {
    Verdict v;
    const Benchmark bench = generate_bimodal_benchmark(7, 10, 32, 0.05);
    std::vector<LabeledImage> train;
    for (const SceneRecord& r : bench.train) train.push_back(r.scene);
    const HierarchicalModel model = train_hierarchical(train, HierarchicalConfig{});

    // Purity: share of training images that sit in their cluster's majority family.
    std::map<int, std::map<std::string, int>> by_cluster;
    for (std::size_t i = 0; i < bench.train.size(); ++i)
        ++by_cluster[model.clusters.assignments[i]][bench.train[i].family];
    int majority = 0;
    for (const auto& [c, fams] : by_cluster) {
        int best = 0;
        for (const auto& [fam, n] : fams) best = std::max(best, n);
        majority += best;
    }
    const double purity = static_cast<double>(majority) / bench.train.size();

    double global_acc = 0, hier_acc = 0;
    for (const SceneRecord& r : bench.test) {
        const LabelingResult res = label_image(model, r.scene.image);
        global_acc += pixel_accuracy(res.initial, r.scene.labels);
        hier_acc += pixel_accuracy(res.final_labels, r.scene.labels);
    }
    global_acc /= bench.test.size();
    hier_acc /= bench.test.size();

    long gray = 0, total = 0;
    for (const auto* split : {&bench.train, &bench.test})
        for (const SceneRecord& r : *split)
            for (int k : r.scene.labels.labels()) {
                ++total;
                gray += k == bimodal::kRoad || k == bimodal::kWall;
            }
    const double gray_fraction = static_cast<double>(gray) / total;

    v.require(gray_fraction >= 0.15, "gray-pixel fraction " + fmt("%.3f", gray_fraction));
    v.require(purity >= 0.90, "cluster purity " + fmt("%.3f", purity));
    v.require(hier_acc - global_acc >= 0.05,
              "accuracy gain " + fmt("%.4f", hier_acc) + " vs " + fmt("%.4f", global_acc));
    v.detail = "global " + fmt("%.4f", global_acc) + ", hierarchical " + fmt("%.4f", hier_acc) + ", purity " +
               fmt("%.3f", purity) + ", gray-pixel fraction " + fmt("%.3f", gray_fraction) +
               (v.ok ? "" : "; " + v.detail);
    return v;
}

struct PipelineBytes {
    std::string model;
    std::map<std::string, std::string> label_maps;
};

PipelineBytes cli_pipeline(const std::string& tag, const char* threads) {
    if (threads) setenv("HCRF_THREADS", threads, 1);
    else unsetenv("HCRF_THREADS");
    const fs::path dir = testing::scratch_dir("acceptance_" + tag);
    std::ostringstream out, err;
    const auto call = [&](std::vector<std::string> args) {
        if (cli::run(args, out, err) != 0) throw std::runtime_error("hcrf " + args[0] + " failed: " + err.str());
    };
    call({"synth", "--benchmark", "bimodal", "--seed", "7", "--count", "10", "--size", "32", "--noise", "0.05",
          "--out", (dir / "data").string()});
    call({"train", "--manifest", (dir / "data" / "train.tsv").string(), "--out", (dir / "model.hcrf").string()});
    call({"label", "--model", (dir / "model.hcrf").string(), "--manifest", (dir / "data" / "test.tsv").string(),
          "--out-dir", (dir / "labels").string()});
    PipelineBytes bytes{testing::read_bytes(dir / "model.hcrf"), {}};
    for (const auto& entry : fs::directory_iterator(dir / "labels"))
        bytes.label_maps[entry.path().filename().string()] = testing::read_bytes(entry.path());
    unsetenv("HCRF_THREADS");
    return bytes;
}

Verdict determinism() {
    Verdict v;
    const PipelineBytes a = cli_pipeline("run_a", nullptr);
    const PipelineBytes b = cli_pipeline("run_b", nullptr);
    const PipelineBytes one = cli_pipeline("threads_1", "1");
    const PipelineBytes four = cli_pipeline("threads_4", "4");
    v.require(!a.model.empty() && !a.label_maps.empty(), "pipeline produced no output");
    for (const auto* other : {&b, &one, &four}) {
        v.require(other->model == a.model, "model files differ");
        v.require(other->label_maps == a.label_maps, "label outputs differ");
    }
    if (v.ok)
        v.detail = "model and " + std::to_string(a.label_maps.size()) +
                   " label outputs byte-identical across 2 runs and HCRF_THREADS=1/4";
    return v;
}

Verdict oracle_equivalence() {
    Verdict v;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 30), kk(1, 5);
    int kmeans_checks = 0, otsu_checks = 0, component_checks = 0;
    for (int i = 0; i < 50; ++i) {
        // k-means
        const int n = 10 + i, k = 1 + i % 6;
        std::vector<std::vector<double>> pts(n, std::vector<double>(4));
        for (auto& p : pts)
            for (double& x : p) x = u(rng);
        const ClusterSet c = kmeans(pts, k, {static_cast<std::uint64_t>(i)});
        for (int p = 0; p < n; ++p)
            v.require(c.assignments[p] == oracle::nearest_by_scan(c.centroids, pts[p]), "k-means assignment");
        ++kmeans_checks;

        // Otsu
        const int w = dim(rng), h = dim(rng);
        std::vector<double> values(static_cast<std::size_t>(w) * h);
        for (double& x : values) x = i % 2 ? u(rng) : std::round(u(rng) * 5) / 5;
        const GrayImage g(w, h, values);
        std::vector<int> bins;
        for (double x : values) bins.push_back(histogram_bin(x));
        const int t = static_cast<int>(std::lround(otsu_threshold(g) * 255.0));
        const double best = oracle::otsu_best_score(bins);
        v.require(std::abs(oracle::otsu_score(bins, t) - best) <= 1e-9 * std::max(1.0, best), "Otsu threshold");
        ++otsu_checks;

        // Connected components
        const LabelMap labels = testing::random_labels(rng, dim(rng), dim(rng), kk(rng));
        v.require(connected_components(labels).ids ==
                      oracle::components_union_find(labels.labels(), labels.width(), labels.height()),
                  "connected components");
        ++component_checks;
    }
    if (v.ok)
        v.detail = std::to_string(kmeans_checks) + " k-means, " + std::to_string(otsu_checks) + " Otsu, " +
                   std::to_string(component_checks) + " component checks agree";
    return v;
}

}  // namespace

int main() {
    report(1, "descriptor arithmetic", 1.0, descriptor_arithmetic);
    report(2, "inference soundness", 10.0, inference_soundness);
    report(3, "gradient check", 5.0, gradient_check);
    report(4, "wavelet exactness", 5.0, wavelet_exactness);
    report(5, "hierarchical benefit", 120.0, hierarchical_benefit);
    report(6, "determinism", 600.0, determinism);
    report(7, "oracle equivalence", 5.0, oracle_equivalence);
    std::printf("%s: %d of 7 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
