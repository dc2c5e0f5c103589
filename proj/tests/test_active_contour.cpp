#include "oracles.hpp"

#include <mcac/active_contour.hpp>
#include <mcac/synth.hpp>

#include <doctest.h>

#include <numbers>
#include <random>

using namespace mcac;

namespace {

constexpr double kPi = std::numbers::pi;

EdgeIndicatorField constant_edges(int w, int h, double value) {
    ScalarField2D g(w, h, value);
    GradientField grad = gradient_field(g);
    return {std::move(g), std::move(grad)};
}

ContourPolyline circle(Point2 c, double r, int n) {
    ContourPolyline p{{}, true};
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * kPi * k / n;
        p.points.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
    }
    return p;
}

double polyline_length(const ContourPolyline& c) {
    double len = 0.0;
    const std::size_t n = c.points.size();
    const std::size_t segs = c.closed ? n : n - 1;
    for (std::size_t k = 0; k < segs; ++k) len += norm(c.points[(k + 1) % n] - c.points[k]);
    return len;
}

// Blurred bright disk: a smooth edge valley of radius r around c.
EdgeIndicatorField disk_edges(int w, int h, Point2 c, double r, double sigma_g) {
    const ScalarField2D img = oracle::field_from(w, h, [&](double x, double y) {
        return std::hypot(x - c.x, y - c.y) <= r ? 200.0 : 60.0;
    });
    return edge_indicator(img, sigma_g);
}

RbfShapeModel round_model() { return {{{0, 0}}, {1.0}, -0.5, 12.0}; }

RbfShapeModel blob() { return {{{-6, 0}, {6, 0}, {0, 5}}, {1.0, 1.0, 0.8}, -0.5, 6.0}; }

std::vector<double> flat(const PoseGradient& g) {
    const auto a = g.d_ainv.flat();
    return {a[0], a[1], a[2], a[3], g.d_b.x, g.d_b.y};
}

// J as a function of the six inverse-chart parameters, via raster and re-extraction.
double energy_at(const RbfShapeModel& m, const std::array<double, 6>& q, const EdgeIndicatorField& e) {
    const Mat2 a_inv = Mat2::from_flat({q[0], q[1], q[2], q[3]});
    return evaluate_contour({m, {a_inv.inverse(), {q[4], q[5]}}}, e).energy;
}

}  // namespace

TEST_SUITE("active_contour") {

TEST_CASE("constant image gives g = 1") {
    const EdgeIndicatorField e = edge_indicator(ScalarField2D(20, 16, 87.0), 1.5);
    for (double v : e.g.values()) CHECK(v == 1.0);
}

TEST_CASE("step edge value with central differences") {
    const double h = 3.0;
    const ScalarField2D step = oracle::field_from(12, 6, [&](double x, double) { return x >= 6 ? h : 0.0; });
    const EdgeIndicatorField e = edge_indicator(step, 0.0);
    // Central difference across the step spans two pixels: |grad| = h / 2.
    const double grad = 0.5 * (step.at(7, 3) - step.at(5, 3));
    const double expected = 1.0 / (1.0 + grad * grad);
    CHECK(expected == doctest::Approx(1.0 / (1.0 + h * h / 4.0)));
    CHECK(e.g.at(6, 3) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(e.g.at(5, 3) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(e.g.at(2, 3) == 1.0);
}

TEST_CASE("stronger edges never raise g at the edge") {
    for (double h : {1.0, 5.0, 40.0}) {
        for (double sg : {0.0, 1.0, 2.5}) {
            const auto img = [&](double contrast) {
                return oracle::field_from(32, 8, [&](double x, double) { return x >= 16 ? contrast : 0.0; });
            };
            const EdgeIndicatorField lo = edge_indicator(img(h), sg);
            const EdgeIndicatorField hi = edge_indicator(img(2 * h), sg);
            CHECK(hi.g.at(16, 4) <= lo.g.at(16, 4));
            CHECK(hi.g.at(15, 4) <= lo.g.at(15, 4));
        }
    }
}

TEST_CASE("g stays in (0, 1]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0, 255);
    ScalarField2D img(24, 24);
    for (double& v : img.values()) v = u(rng);
    const EdgeIndicatorField e = edge_indicator(img, 0.5);
    for (double v : e.g.values()) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("gaussian_blur preserves constants and mass") {
    const ScalarField2D c(10, 9, 4.5);
    const ScalarField2D blurred = gaussian_blur(c, 2.0);
    for (double v : blurred.values()) CHECK(v == doctest::Approx(4.5));
    ScalarField2D spike(41, 41);
    spike.at(20, 20) = 1.0;
    const ScalarField2D b = gaussian_blur(spike, 1.5);
    double sum = 0.0;
    for (double v : b.values()) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b.at(19, 20) == doctest::Approx(b.at(21, 20)));
    CHECK(gaussian_blur(spike, 0.0) == spike);
    CHECK_THROWS_AS(gaussian_blur(spike, -1.0), InvalidArgument);
}

TEST_CASE("circle curvature and normal orientation") {
    const Point2 c{64.3, 63.8};
    const double r = 25.0;
    const ScalarField2D f = oracle::field_from(128, 128, [&](double x, double y) { return std::hypot(x - c.x, y - c.y) - r; });
    const auto cs = extract_contour(f);
    REQUIRE(cs.size() == 1);
    const ContourGeometry g = contour_geometry(cs[0], f);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(std::abs(g.curvature[k] - 1.0 / r) <= 0.05 / r);
        CHECK(norm(g.normal[k]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(dot(g.normal[k], g.tangent[k])) <= 1e-9);
        // Toward increasing phi, which is outward for this field.
        CHECK(dot(g.normal[k], g.position[k] - c) > 0.0);
    }
    double total = 0.0;
    for (double d : g.ds) total += d;
    CHECK(total == doctest::Approx(polyline_length(cs[0])).epsilon(1e-12));
}

TEST_CASE("straight zero set has zero curvature") {
    const ScalarField2D f = oracle::field_from(40, 40, [](double x, double y) { return 0.3 * x + 0.8 * y - 20.0; });
    const auto cs = extract_contour(f);
    const ContourGeometry g = contour_geometry(cs[0], f);
    for (double k : g.curvature) CHECK(std::abs(k) <= 1e-3);
    for (const Vec2& v : gac_functional_gradient(g, constant_edges(40, 40, 1.0))) CHECK(norm(v) <= 1e-3);
}

TEST_CASE("contour_geometry rejects flat fields") {
    const ScalarField2D f(10, 10, 0.0);
    CHECK_THROWS_AS(contour_geometry({{{5, 5}}, false}, f), VanishingGradient);
}

TEST_CASE("arc weights are trapezoidal") {
    const ContourPolyline open{{{0, 0}, {3, 0}, {3, 4}}, false};
    const auto ds = arc_weights(open);
    CHECK(ds[0] == 1.5);
    CHECK(ds[1] == 3.5);
    CHECK(ds[2] == 2.0);
    const ContourPolyline closed{{{0, 0}, {3, 0}, {3, 4}}, true};
    const auto dc = arc_weights(closed);
    CHECK(dc[0] == 4.0);
    CHECK(dc[0] + dc[1] + dc[2] == 12.0);
}

TEST_CASE("gac_energy quadrature") {
    const ContourPolyline p{{{2, 2}, {10, 2}, {10, 8}, {4, 9}}, true};
    CHECK(gac_energy(p, constant_edges(16, 16, 1.0)) == doctest::Approx(polyline_length(p)));
    const double r = 20.0;
    const double cval = 0.37;
    const double j = gac_energy(circle({50, 50}, r, 200), constant_edges(100, 100, cval));
    CHECK(std::abs(j - 2 * kPi * r * cval) <= 0.02 * 2 * kPi * r * cval);
}

TEST_CASE("contour on an edge valley costs a tenth of a displaced one") {
    ScalarField2D g(60, 40, 1.0);
    for (int y = 0; y < 40; ++y) g.at(20, y) = 0.1;
    EdgeIndicatorField e{g, gradient_field(g)};
    const ContourPolyline on{{{20, 5}, {20, 15}, {20, 25}, {20, 35}}, false};
    const ContourPolyline off{{{40, 5}, {40, 15}, {40, 25}, {40, 35}}, false};
    CHECK(gac_energy(on, e) / gac_energy(off, e) == doctest::Approx(0.1));
}

TEST_CASE("shorter contours cost less in constant g") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> r(10, 30);
    const EdgeIndicatorField e = constant_edges(100, 100, 0.6);
    for (int k = 0; k < 20; ++k) {
        ContourPolyline p{{}, true};
        for (int i = 0; i < 12; ++i) {
            const double t = 2 * kPi * i / 12;
            const double rad = r(rng);
            p.points.push_back({50 + rad * std::cos(t), 50 + rad * std::sin(t)});
        }
        const ContourPolyline q = transformed(p, {Mat2::diag(0.9, 0.9), {5, 5}});
        CHECK(gac_energy(q, e) < gac_energy(p, e));
    }
}

TEST_CASE("functional gradient in constant g is pure curvature flow") {
    const double r = 25.0;
    const Point2 c{64, 64};
    const ScalarField2D f = oracle::field_from(128, 128, [&](double x, double y) { return r - std::hypot(x - c.x, y - c.y); });
    const auto cs = extract_contour(f);
    const ContourGeometry g = contour_geometry(cs[0], f);
    const auto grad = gac_functional_gradient(g, constant_edges(128, 128, 1.0));
    const auto speed = gac_normal_speed(g, constant_edges(128, 128, 1.0));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec2 expect = g.normal[k] * (-g.curvature[k]);
        CHECK(norm(grad[k] - expect) <= 1e-12);
        CHECK(std::abs(norm(grad[k]) - 1.0 / r) <= 0.05 / r);
        CHECK(speed[k] == doctest::Approx(g.curvature[k]));
    }
}

TEST_CASE("translation gradient vanishes for a centred round shape in a radial field") {
    const Point2 c{32, 32};
    const EdgeIndicatorField e = disk_edges(65, 65, c, 14.0, 1.5);
    const PosedShape s{round_model(), AffineMap::translation(c)};
    const PoseGradient g = grad_J_pose(s, evaluate_contour(s, e), e);
    CHECK(norm(g.d_b) <= 1e-6);
}

TEST_CASE("scaling gradient of a circle in constant g shrinks it") {
    const EdgeIndicatorField e = constant_edges(65, 65, 1.0);
    const PosedShape s{round_model(), AffineMap::translation({32, 32})};
    const ContourEvaluation ev = evaluate_contour(s, e);
    const PoseGradient g = grad_J_pose(s, ev, e);
    CHECK(g.d_ainv.a11 < 0.0);
    CHECK(g.d_ainv.a22 == doctest::Approx(g.d_ainv.a11).epsilon(1e-3));
    CHECK(std::abs(g.d_ainv.a12) <= 1e-3 * std::abs(g.d_ainv.a11));
    CHECK(std::abs(g.d_ainv.a21) <= 1e-3 * std::abs(g.d_ainv.a11));
    const double t = 0.01 / frobenius_norm(g.d_ainv);
    const Mat2 a_inv = Mat2::identity() - g.d_ainv * t;
    const ContourEvaluation next = evaluate_contour({s.model, {a_inv.inverse(), s.pose.b}}, e);
    CHECK(next.energy < ev.energy);
    CHECK(vertex_count(next.contours) > 0);
}

TEST_CASE("pose gradient matches the re-extraction finite-difference oracle") {
    const EdgeIndicatorField e = disk_edges(96, 96, {48, 47}, 16.0, 2.0);
    std::mt19937_64 rng(33);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const AffineMap pose = oracle::random_pose(rng, 0.7, 1.4, {47, 48}, 3.0);
        const PosedShape s{blob(), pose};
        const PoseGradient g = grad_J_pose(s, evaluate_contour(s, e), e);
        const Mat2 ai = pose.a.inverse();
        const std::array<double, 6> q0{ai.a11, ai.a12, ai.a21, ai.a22, pose.b.x, pose.b.y};
        std::vector<double> fd;
        for (int i = 0; i < 6; ++i) {
            const double h = i < 4 ? 1e-4 : 1e-3;
            auto qp = q0;
            auto qm = q0;
            qp[i] += h;
            qm[i] -= h;
            fd.push_back((energy_at(s.model, qp, e) - energy_at(s.model, qm, e)) / (2 * h));
        }
        worst = std::max(worst, oracle::rel_err(flat(g), fd));
    }
    CHECK(worst <= 5e-2);
}

TEST_CASE("continuum pose gradient agrees with the discrete one on slowly varying g") {
    const ScalarField2D g = oracle::field_from(96, 96, [](double x, double y) {
        return 0.2 + 0.0004 * ((x - 48) * (x - 48) + (y - 47) * (y - 47));
    });
    const EdgeIndicatorField e{g, gradient_field(g)};
    std::mt19937_64 rng(35);
    for (int k = 0; k < 5; ++k) {
        const PosedShape s{blob(), oracle::random_pose(rng, 0.7, 1.4, {47, 48}, 3.0)};
        const ContourEvaluation ev = evaluate_contour(s, e);
        PoseGradient cont;
        for (const auto& c : ev.contours) cont += grad_J_pose_continuum(s, c, contour_geometry(c, ev.phi), e);
        CHECK(oracle::rel_err(flat(cont), flat(grad_J_pose(s, ev, e))) <= 5e-2);
    }
}

TEST_CASE("negative pose gradient is a descent direction") {
    std::mt19937_64 rng(34);
    for (int k = 0; k < 10; ++k) {
        const EdgeIndicatorField e = disk_edges(96, 96, {48, 48}, 15.0 + k, 1.5);
        const PosedShape s{blob(), oracle::random_pose(rng, 0.6, 1.6, {48, 48}, 4.0)};
        const ContourEvaluation ev = evaluate_contour(s, e);
        const PoseGradient g = grad_J_pose(s, ev, e);
        const double scale = 1.0 / std::sqrt(frobenius(g.d_ainv, g.d_ainv) + squared_norm(g.d_b));
        const Mat2 ai = s.pose.a.inverse();
        bool decreased = false;
        for (double t = 1e-1; t > 1e-7 && !decreased; t *= 0.5) {
            const Mat2 a_inv = ai - g.d_ainv * (t * scale);
            const AffineMap trial{a_inv.inverse(), s.pose.b - g.d_b * (t * scale)};
            decreased = evaluate_contour({s.model, trial}, e).energy <= ev.energy;
        }
        CHECK(decreased);
    }
}

}  // TEST_SUITE
