#include "oracles.hpp"

#include <mcac/io.hpp>
#include <mcac/metrics.hpp>
#include <mcac/pipeline.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace mcac;
namespace fs = std::filesystem;

namespace {

const synth::TrainedTemplate& leaf() {
    static const synth::TrainedTemplate t = [] {
        synth::TemplateOptions opt;
        opt.train.max_iterations = 400;
        return synth::train_template(synth::leaf_template(), opt);
    }();
    return t;
}

SilhouetteMask square(int w, int h, int x0, int y0, int side) {
    SilhouetteMask m(w, h, 0.0);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) m.at(x, y) = 1.0;
    return m;
}

ContourPolyline dense_square(Point2 origin, double side, int per_edge) {
    ContourPolyline c{{}, true};
    const Point2 corners[4] = {origin, origin + Point2{side, 0}, origin + Point2{side, side}, origin + Point2{0, side}};
    for (int e = 0; e < 4; ++e) {
        for (int k = 0; k < per_edge; ++k) {
            const double t = static_cast<double>(k) / per_edge;
            c.points.push_back(corners[e] + (corners[(e + 1) % 4] - corners[e]) * t);
        }
    }
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("mcac_pipeline_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("jaccard examples") {
    const SilhouetteMask a = square(20, 20, 2, 2, 8);
    CHECK(jaccard(a, a) == 1.0);
    CHECK(jaccard(a, square(20, 20, 11, 11, 8)) == 0.0);
    // Shifted by half a side: overlap 32, union 96.
    const SilhouetteMask half = square(20, 20, 6, 2, 8);
    CHECK(jaccard(a, half) == doctest::Approx(1.0 / 3.0));
    CHECK(jaccard(half, a) == jaccard(a, half));
    const SilhouetteMask empty(20, 20, 0.0);
    CHECK(jaccard(empty, empty) == 1.0);
    CHECK_THROWS_AS(jaccard(a, SilhouetteMask(21, 20, 0.0)), DimensionMismatch);
}

TEST_CASE("jaccard is symmetric on random masks") {
    std::mt19937_64 rng(51);
    std::bernoulli_distribution coin(0.4);
    for (int k = 0; k < 20; ++k) {
        SilhouetteMask a(16, 12, 0.0), b(16, 12, 0.0);
        for (double& v : a.values()) v = coin(rng) ? 1.0 : 0.0;
        for (double& v : b.values()) v = coin(rng) ? 1.0 : 0.0;
        const double j = jaccard(a, b);
        CHECK(j == jaccard(b, a));
        CHECK(j >= 0.0);
        CHECK(j <= 1.0);
    }
}

TEST_CASE("normalized Hausdorff examples") {
    const ContourPolyline sq = dense_square({0, 0}, 1.0, 200);
    CHECK(normalized_hausdorff(sq, sq) == 0.0);
    CHECK(normalized_hausdorff(std::vector<Point2>{{0, 0}}, std::vector<Point2>{{3, 4}}) == 1.0);
    const ContourPolyline moved = dense_square({0.1, 0}, 1.0, 200);
    const double expected = 0.1 / std::hypot(1.1, 1.0);
    CHECK(std::abs(normalized_hausdorff(sq, moved) - expected) <= 0.05 * expected);
    CHECK(normalized_hausdorff(moved, sq) == normalized_hausdorff(sq, moved));
    CHECK_THROWS_AS(normalized_hausdorff(sq, ContourPolyline{}), EmptyContour);
}

TEST_CASE("normalized Hausdorff matches the brute-force oracle") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(0, 50);
    for (int k = 0; k < 10; ++k) {
        std::vector<Point2> a(7), b(11);
        for (auto& p : a) p = {u(rng), u(rng)};
        for (auto& p : b) p = {u(rng), u(rng)};
        std::vector<Point2> all = a;
        all.insert(all.end(), b.begin(), b.end());
        double diam = 0.0;
        for (const auto& p : all)
            for (const auto& q : all) diam = std::max(diam, norm(p - q));
        CHECK(normalized_hausdorff(a, b) == doctest::Approx(oracle::hausdorff(a, b) / diam).epsilon(1e-12));
    }
}

TEST_CASE("identity synthetic instance is the rendered template") {
    const auto& t = leaf();
    synth::SuiteOptions opt;
    opt.force_identity = true;
    const auto suite = synth::synth_affine_suite(t, 1, opt, 3);
    REQUIRE(suite.size() == 1);
    const PosedShape at_origin{t.model, AffineMap::translation(t.origin)};
    const SilhouetteMask own = mask_from_field(rasterize(at_origin, opt.width, opt.height));
    CHECK(suite[0].pose == AffineMap::translation(t.origin));
    CHECK(suite[0].image == synth::render(own));
    CHECK(jaccard(own, t.mask) >= 0.9);
}

TEST_CASE("synthetic suite parameter audit") {
    synth::SuiteOptions opt;
    const auto suite = synth::synth_affine_suite(leaf(), 100, opt, 5);
    REQUIRE(suite.size() == 100);
    for (const auto& inst : suite) {
        const double d = inst.pose.a.det();
        CHECK(is_valid(inst.pose));
        CHECK(d >= opt.det_lo);
        CHECK(d <= opt.det_hi);
    }
}

TEST_CASE("ground-truth contours lie on the posed model zero set") {
    const auto& t = leaf();
    const auto suite = synth::synth_affine_suite(t, 10, {}, 6);
    for (const auto& inst : suite) {
        const PosedShape s{t.model, inst.pose};
        const ContourPolyline ref = transformed(inst.truth_contour, invert_affine(inst.pose));
        CHECK(invariance_residual(s, ref) <= 1e-6);
    }
}

TEST_CASE("synthetic suites are deterministic per seed") {
    const auto a = synth::synth_affine_suite(leaf(), 3, {}, 9);
    const auto b = synth::synth_affine_suite(leaf(), 3, {}, 9);
    const auto c = synth::synth_affine_suite(leaf(), 3, {}, 10);
    for (int k = 0; k < 3; ++k) {
        CHECK(a[k].pose == b[k].pose);
        CHECK(a[k].image == b[k].image);
        CHECK(a[k].target == b[k].target);
    }
    CHECK_FALSE(a[0].pose == c[0].pose);
}

TEST_CASE("noise suite") {
    const ScalarField2D base(64, 64, 128.0);
    const auto zero = synth::synth_noise_suite(base, {0.0}, 3, 1);
    for (const auto& n : zero) CHECK(n.image == base);

    std::mt19937_64 rng(53);
    const ScalarField2D noisy = synth::add_noise(base, 5.0, rng, false);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        const double d = noisy.values()[i] - base.values()[i];
        sum += d;
        sq += d * d;
    }
    const double n = static_cast<double>(noisy.size());
    const double sd = std::sqrt((sq - sum * sum / n) / (n - 1));
    CHECK(std::abs(sd - 5.0) <= 0.05 * 5.0);

    const ScalarField2D bright(8, 8, 250.0);
    const ScalarField2D clipped = synth::add_noise(bright, 20.0, rng);
    for (double v : clipped.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
    }

    const auto levels = synth::default_noise_levels();
    CHECK(levels.size() == 20);
    CHECK(synth::synth_noise_suite(ScalarField2D(4, 4, 100.0), levels, 30, 2).size() == 600);
}

TEST_CASE("identity segmentation recovers the template") {
    const auto& t = leaf();
    synth::SuiteOptions opt;
    opt.force_identity = true;
    opt.pose_noise_a = 0.0;
    opt.pose_noise_b = 0.0;
    const auto suite = synth::synth_affine_suite(t, 1, opt, 4);
    const SegmentationResult r = segment_instance(input_from_synthetic(t.model, suite[0]));
    REQUIRE(r.final_jaccard.has_value());
    CHECK(*r.final_jaccard >= 0.95);
    CHECK(r.trajectory.back().J <= r.trajectory.front().J);
}

TEST_CASE("batch rows are deterministic and the CSV has the fixed header") {
    const auto suite = synth::synth_affine_suite(leaf(), 2, {}, 12);
    const auto rows_a = run_batch(leaf().model, suite);
    const auto rows_b = run_batch(leaf().model, suite);
    const fs::path dir = scratch("batch");
    write_batch_csv(dir / "a.csv", rows_a);
    write_batch_csv(dir / "b.csv", rows_b);
    const std::string text = slurp(dir / "a.csv");
    CHECK(text.rfind("instance,initial_jaccard,final_jaccard,nhd_initial,nhd_final\n", 0) == 0);
    CHECK(text == slurp(dir / "b.csv"));
    fs::remove_all(dir);
}

TEST_CASE("segment reports missing files by path") {
    PipelineConfig cfg;
    const fs::path dir = scratch("missing");
    {
        std::ofstream m(dir / "model.txt");
        write_model(m, leaf().model);
    }
    io::write_pgm(dir / "image.pgm", ScalarField2D(16, 16, 10.0));
    io::write_points_csv(dir / "src.csv", {{0, 0}, {1, 0}, {0, 1}});
    io::write_points_csv(dir / "tgt.csv", {{0, 0}, {1, 0}, {0, 1}});
    cfg.model = dir / "model.txt";
    cfg.image = dir / "image.pgm";
    cfg.source_points = dir / "src.csv";
    cfg.target_points = dir / "tgt.csv";
    cfg.correspondences = dir / "nowhere" / "corr.csv";
    try {
        segment(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find((dir / "nowhere" / "corr.csv").string()) != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("invariance report rows and CSV") {
    const auto& t = leaf();
    const auto rows = invariance_report(t.model, synth::reference_contour(t), 5, 7);
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) {
        CHECK(r.nhd_invariant >= 0.0);
        CHECK(r.nhd_invariant <= 1.0);
        CHECK(r.nhd_noninvariant <= 1.0);
    }
    const fs::path dir = scratch("inv");
    write_invariance_csv(dir / "inv.csv", rows);
    CHECK(slurp(dir / "inv.csv").rfind("trial,nhd_invariant,nhd_noninvariant\n", 0) == 0);
    fs::remove_all(dir);
}

}  // TEST_SUITE
