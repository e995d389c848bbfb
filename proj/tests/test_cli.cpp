#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "hcrf/image.hpp"
#include "hcrf/manifest.hpp"
#include "hcrf/pipeline.hpp"
#include "test_support.hpp"

namespace hcrf {
namespace {

namespace fs = std::filesystem;
using testing::read_bytes;
using testing::scratch_dir;
using testing::write_bytes;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Parses "k=v k2=v2" tokens from one output line.
std::map<std::string, std::string> fields(const std::string& line) {
    std::map<std::string, std::string> kv;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

class CliWorkflow : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = new fs::path(scratch_dir("cli_workflow"));
        const Outcome s = run({"synth", "--seed", "7", "--count", "4", "--size", "16", "--out", (*root_ / "data").string()});
        ASSERT_EQ(s.code, 0) << s.err;
        const Outcome t = run({"train", "--manifest", (*root_ / "data" / "train.tsv").string(), "--out",
                           (*root_ / "model.hcrf").string(), "--clusters", "2", "--epochs", "60",
                           "--lambda-grid", "0,1"});
        ASSERT_EQ(t.code, 0) << t.err;
        train_out_ = new std::string(t.out);
    }
    static void TearDownTestSuite() {
        delete root_;
        delete train_out_;
    }
    static fs::path data() { return *root_ / "data"; }
    static std::string model() { return (*root_ / "model.hcrf").string(); }

    static fs::path* root_;
    static std::string* train_out_;
};

fs::path* CliWorkflow::root_ = nullptr;
std::string* CliWorkflow::train_out_ = nullptr;

TEST_F(CliWorkflow, SynthWritesManifestsAndIsByteIdentical) {
    ASSERT_TRUE(fs::exists(data() / "train.tsv"));
    ASSERT_TRUE(fs::exists(data() / "palette.txt"));
    const auto entries = read_manifest(data() / "train.tsv");
    ASSERT_EQ(entries.size(), 6u);
    EXPECT_TRUE(fs::exists(entries[0].image));
    const fs::path again = scratch_dir("cli_synth_again");
    ASSERT_EQ(run({"synth", "--seed", "7", "--count", "4", "--size", "16", "--out", again.string()}).code, 0);
    for (const char* rel : {"train.tsv", "test.tsv", "train/A000.ppm", "train/B002.pgm", "test/A003.ppm"})
        EXPECT_EQ(read_bytes(data() / rel), read_bytes(again / rel)) << rel;
}

TEST_F(CliWorkflow, TrainIsDeterministicAndReportsClusters) {
    const fs::path other = scratch_dir("cli_train_again") / "m.hcrf";
    const Outcome t = run({"train", "--manifest", (data() / "train.tsv").string(), "--out", other.string(),
                       "--clusters", "2", "--epochs", "60", "--lambda-grid", "0,1"});
    ASSERT_EQ(t.code, 0);
    EXPECT_EQ(read_bytes(other), read_bytes(model()));
    EXPECT_EQ(t.out, *train_out_);
    EXPECT_EQ(fields(lines(t.out)[0])["clusters"], "2");
    EXPECT_EQ(read_bytes(model()).rfind("HCRF-HIER v1", 0), 0u);
}

TEST_F(CliWorkflow, SingleClusterModelHasOneClusterModel) {
    const fs::path path = scratch_dir("cli_k1") / "m.hcrf";
    ASSERT_EQ(run({"train", "--manifest", (data() / "train.tsv").string(), "--out", path.string(),
                   "--clusters", "1", "--epochs", "20", "--lambda-grid", "0"})
                  .code,
              0);
    std::ifstream in(path);
    const HierarchicalModel m = read_hierarchical_model(in);
    EXPECT_EQ(m.cluster_count(), 1);
    EXPECT_EQ(m.cluster_models.size(), 1u);
}

TEST_F(CliWorkflow, LabelingATrainingImageRetrievesItsCluster) {
    std::ifstream in(model());
    const HierarchicalModel m = read_hierarchical_model(in);
    const auto entries = read_manifest(data() / "train.tsv");
    const fs::path out = scratch_dir("cli_label");
    const Outcome r = run({"label", "--model", model(), "--manifest", (data() / "train.tsv").string(),
                       "--out-dir", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto out_lines = lines(r.out);
    ASSERT_EQ(out_lines.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto kv = fields(out_lines[i]);
        EXPECT_EQ(std::stoi(kv["cluster"]), m.clusters.assignments[i]) << out_lines[i];
        EXPECT_TRUE(kv.count("final_accuracy"));
        const std::string stem = entries[i].image.stem().string();
        const LabelMap fin = load_label_map(out / (stem + ".final.pgm"), 3);
        EXPECT_EQ(fin.width(), 16);
        EXPECT_EQ(fin.height(), 16);
        EXPECT_TRUE(fs::exists(out / (stem + ".initial.ppm")));
    }
}

TEST_F(CliWorkflow, GlobalOnlyKeepsInitialLabels) {
    const auto entries = read_manifest(data() / "test.tsv");
    const fs::path out = scratch_dir("cli_global_only");
    const Outcome r = run({"label", "--model", model(), "--image", entries[0].image.string(), "--out-dir",
                       out.string(), "--global-only"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(fields(r.out)["cluster"], "-1");
    const std::string stem = entries[0].image.stem().string();
    EXPECT_EQ(read_bytes(out / (stem + ".initial.pgm")), read_bytes(out / (stem + ".final.pgm")));
}

TEST_F(CliWorkflow, LabelRejectsTruthWithTooManyClasses) {
    const fs::path dir = scratch_dir("cli_label_k");
    save_label_map(LabelMap(16, 16, 5, std::vector<int>(256, 4)), dir / "truth.pgm");
    const auto entries = read_manifest(data() / "test.tsv");
    const Outcome r = run({"label", "--model", model(), "--image", entries[0].image.string(), "--truth",
                       (dir / "truth.pgm").string(), "--out-dir", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliWorkflow, EvalComparesGlobalAndHierarchical) {
    const Outcome r = run({"eval", "--manifest", (data() / "test.tsv").string(), "--model", model()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::map<std::string, std::string> kv;
    for (const auto& l : lines(r.out))
        for (auto& [k, v] : fields(l)) kv[k] = v;
    ASSERT_TRUE(kv.count("global.pixel_accuracy"));
    ASSERT_TRUE(kv.count("hierarchical.pixel_accuracy"));
    EXPECT_GT(std::stod(kv["hierarchical.pixel_accuracy"]), std::stod(kv["global.pixel_accuracy"]));

    const Outcome j = run({"eval", "--manifest", (data() / "test.tsv").string(), "--model", model(), "--json"});
    ASSERT_EQ(j.code, 0);
    EXPECT_NE(j.out.find("\"hierarchical\""), std::string::npos);
}

TEST_F(CliWorkflow, EvalOfTruthAgainstItselfIsPerfect) {
    const Outcome r = run({"eval", "--manifest", (data() / "test.tsv").string(), "--pred-dir",
                       (data() / "test").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::map<std::string, std::string> kv;
    for (const auto& l : lines(r.out))
        for (auto& [k, v] : fields(l)) kv[k] = v;
    EXPECT_EQ(std::stod(kv["pixel_accuracy"]), 1.0);
    EXPECT_EQ(std::stod(kv["mean_iou"]), 1.0);
}

TEST_F(CliWorkflow, EvalOfLabelOutputMatchesLibrary) {
    const fs::path out = scratch_dir("cli_eval_pred");
    ASSERT_EQ(run({"label", "--model", model(), "--manifest", (data() / "test.tsv").string(), "--out-dir",
                   out.string()})
                  .code,
              0);
    const Outcome r = run({"eval", "--manifest", (data() / "test.tsv").string(), "--pred-dir", out.string(),
                       "--pred-suffix", ".final.pgm"});
    ASSERT_EQ(r.code, 0) << r.err;
    MetricsAccumulator acc(3);
    for (const ManifestEntry& e : read_manifest(data() / "test.tsv"))
        acc.add(load_label_map(out / (e.labels.stem().string() + ".final.pgm"), 3), load_label_map(e.labels, 3));
    std::map<std::string, std::string> kv;
    for (const auto& l : lines(r.out))
        for (auto& [k, v] : fields(l)) kv[k] = v;
    EXPECT_NEAR(std::stod(kv["pixel_accuracy"]), acc.result().pixel_accuracy, 1e-6);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"synth"}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({"synth", "--out", "x", "--noise", "-1"}).code, 2);
    const fs::path dir = scratch_dir("cli_usage");
    save_image(RgbImage(4, 4, Rgb{}), dir / "i.ppm");
    for (const char* keep : {"0", "1.5", "abc"})
        EXPECT_EQ(run({"wavelet", "--image", (dir / "i.ppm").string(), "--keep", keep, "--out",
                       (dir / "o.ppm").string()})
                      .code,
                  2)
            << keep;
}

TEST(Cli, DataErrorsExitOne) {
    const fs::path dir = scratch_dir("cli_data_errors");
    const Outcome count = run({"synth", "--count", "1", "--out", dir.string()});
    EXPECT_EQ(count.code, 1);
    EXPECT_NE(count.err.find("2"), std::string::npos);
    EXPECT_EQ(run({"train", "--manifest", (dir / "missing.tsv").string(), "--out", (dir / "m").string()}).code, 1);
    write_bytes(dir / "empty.tsv", "# nothing\n");
    EXPECT_EQ(run({"eval", "--manifest", (dir / "empty.tsv").string(), "--pred-dir", dir.string()}).code, 1);
    save_image(RgbImage(4, 4, Rgb{}), dir / "i.ppm");
    EXPECT_EQ(run({"wavelet", "--image", (dir / "i.ppm").string(), "--levels", "5", "--out",
                   (dir / "o.ppm").string()})
                  .code,
              1);
}

TEST(Cli, WaveletReportsPsnr) {
    const fs::path dir = scratch_dir("cli_wavelet");
    std::mt19937_64 rng(100);
    const RgbImage img = testing::random_byte_image(rng, 24, 20);
    save_image(img, dir / "noise.ppm");
    const Outcome full = run({"wavelet", "--image", (dir / "noise.ppm").string(), "--keep", "1", "--levels", "2",
                          "--out", (dir / "full.ppm").string()});
    ASSERT_EQ(full.code, 0) << full.err;
    EXPECT_EQ(fields(full.out)["psnr"], "inf");
    EXPECT_EQ(read_bytes(dir / "full.ppm"), read_bytes(dir / "noise.ppm"));

    const Outcome lossy = run({"wavelet", "--image", (dir / "noise.ppm").string(), "--keep", "0.1", "--levels", "2",
                           "--out", (dir / "lossy.ppm").string(), "--coeffs", (dir / "coeffs.ppm").string()});
    ASSERT_EQ(lossy.code, 0) << lossy.err;
    EXPECT_TRUE(fs::exists(dir / "coeffs.ppm"));
    // Recompute PSNR from the two files' bytes.
    const std::string a = read_bytes(dir / "noise.ppm"), b = read_bytes(dir / "lossy.ppm");
    const std::size_t header = std::string("P6\n24 20\n255\n").size();
    ASSERT_EQ(a.size(), b.size());
    double se = 0;
    for (std::size_t i = header; i < a.size(); ++i) {
        const double d = static_cast<unsigned char>(a[i]) - static_cast<double>(static_cast<unsigned char>(b[i]));
        se += d * d;
    }
    const double psnr = 10 * std::log10(255.0 * 255.0 / (se / (a.size() - header)));
    EXPECT_NEAR(std::stod(fields(lossy.out)["psnr"]), psnr, 1e-4);
}

TEST(Cli, DescriptorPrintsHeaderAndValues) {
    const fs::path dir = scratch_dir("cli_descriptor");
    std::vector<Rgb> px(16, Rgb{0, 0, 0});
    std::vector<int> l(16, 1);
    for (int i = 0; i < 8; ++i) px[i] = Rgb{1, 1, 1}, l[i] = 0;
    save_image(RgbImage(4, 4, px), dir / "i.ppm");
    save_label_map(LabelMap(4, 4, 2, l), dir / "l.pgm");
    const Outcome r = run({"descriptor", "--image", (dir / "i.ppm").string(), "--labels", (dir / "l.pgm").string(),
                       "--classes", "2", "--grid", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto out = lines(r.out);
    ASSERT_EQ(out.size(), 33u);
    EXPECT_EQ(fields(out[0])["length"], "32");
    EXPECT_EQ(fields(out[0])["positional"], "8");
    const std::vector<double> expected_pos{1, 0, 1, 0, 0, 1, 0, 1};
    for (int i = 0; i < 8; ++i) EXPECT_EQ(std::stod(out[1 + i]), expected_pos[i]);
    EXPECT_EQ(std::stod(out[9]), 1.0);
}

TEST(Cli, SegmentCountsAndProjects) {
    const fs::path dir = scratch_dir("cli_segment");
    save_label_map(LabelMap(3, 3, 2, std::vector<int>(9, 1)), dir / "flat.pgm");
    const Outcome flat = run({"segment", "--labels", (dir / "flat.pgm").string(), "--out", (dir / "s.pgm").string()});
    ASSERT_EQ(flat.code, 0) << flat.err;
    EXPECT_EQ(fields(flat.out)["segment_count"], "1");
    EXPECT_NE(read_bytes(dir / "s.pgm.count").find("1"), std::string::npos);

    save_label_map(LabelMap(2, 2, 4, {0, 1, 2, 3}), dir / "four.pgm");
    EXPECT_EQ(fields(run({"segment", "--labels", (dir / "four.pgm").string(), "--out", (dir / "f.pgm").string()})
                         .out)["segment_count"],
              "4");

    std::mt19937_64 rng(101);
    save_label_map(testing::random_labels(rng, 9, 7, 3), dir / "rand.pgm");
    ASSERT_EQ(run({"segment", "--labels", (dir / "rand.pgm").string(), "--out", (dir / "r.pgm").string()}).code, 0);
    const Outcome proj = run({"segment", "--labels", (dir / "rand.pgm").string(), "--segments",
                          (dir / "r.pgm").string(), "--out", (dir / "r2.pgm").string(), "--projected",
                          (dir / "p.pgm").string()});
    ASSERT_EQ(proj.code, 0) << proj.err;
    EXPECT_EQ(read_bytes(dir / "p.pgm"), read_bytes(dir / "rand.pgm"));

    save_label_map(LabelMap(2, 2, 2, {0, 0, 0, 0}), dir / "small.pgm");
    EXPECT_EQ(run({"segment", "--labels", (dir / "rand.pgm").string(), "--segments", (dir / "small.pgm").string(),
                   "--out", (dir / "x.pgm").string(), "--projected", (dir / "y.pgm").string()})
                  .code,
              1);
}

TEST(Cli, ConfigFileValuesYieldToFlags) {
    const fs::path dir = scratch_dir("cli_config");
    write_bytes(dir / "synth.cfg", "# synth defaults\ncount = 3\nsize = 8\nseed = 2\n");
    const Outcome a = run({"synth", "--config", (dir / "synth.cfg").string(), "--out", (dir / "a").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(read_manifest(dir / "a" / "train.tsv").size() + read_manifest(dir / "a" / "test.tsv").size(), 6u);
    EXPECT_EQ(load_image(dir / "a" / "train" / "A000.ppm").width(), 8);
    const Outcome b = run({"synth", "--config", (dir / "synth.cfg").string(), "--size", "10", "--out",
                       (dir / "b").string()});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(load_image(dir / "b" / "train" / "A000.ppm").width(), 10);
    write_bytes(dir / "bad.cfg", "count 3\n");
    EXPECT_EQ(run({"synth", "--config", (dir / "bad.cfg").string(), "--out", (dir / "c").string()}).code, 2);
}

}  // namespace
}  // namespace hcrf
