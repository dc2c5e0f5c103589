#include "oracles.hpp"

#include <mcac/core.hpp>
#include <mcac/io.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace mcac;

TEST_SUITE("core") {

TEST_CASE("apply_affine on simple maps") {
    CHECK(apply_affine(AffineMap::identity(), {3, 4}) == Point2{3, 4});
    CHECK(apply_affine({Mat2::diag(2, 2), {0, 0}}, {1, 1}) == Point2{2, 2});
}

TEST_CASE("invert_affine closed forms") {
    CHECK(invert_affine(AffineMap::identity()) == AffineMap::identity());
    const AffineMap inv = invert_affine({Mat2::diag(2.0, 0.5), {1.0, 0.0}});
    CHECK(inv.a.a11 == doctest::Approx(0.5));
    CHECK(inv.a.a22 == doctest::Approx(2.0));
    CHECK(inv.a.a12 == 0.0);
    CHECK(inv.a.a21 == 0.0);
    CHECK(inv.b.x == doctest::Approx(-0.5));
    CHECK(inv.b.y == doctest::Approx(0.0));
}

TEST_CASE("invert_affine rejects singular maps") {
    CHECK_THROWS_AS(invert_affine({Mat2{1, 2, 2, 4}, {0, 0}}), SingularMap);
    CHECK_THROWS_AS(invert_affine({Mat2::diag(1e-4, 1e-4), {0, 0}}), SingularMap);
    CHECK_NOTHROW(invert_affine({Mat2::diag(1e-2, 1e-2), {0, 0}}));
    CHECK_FALSE(is_valid({Mat2::zero(), {}}));
}

TEST_CASE("affine round trip over random maps") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-50, 50);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const AffineMap m = oracle::random_pose(rng, 0.2, 5.0, {0, 0}, 30.0);
        const AffineMap inv = invert_affine(m);
        for (int j = 0; j < 10; ++j) {
            const Point2 z{u(rng), u(rng)};
            worst = std::max(worst, norm(apply_affine(inv, apply_affine(m, z)) - z));
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("compose applies the second map first") {
    const AffineMap f{Mat2::diag(2, 3), {1, 0}};
    const AffineMap g{Mat2::rotation(0.3), {0, -2}};
    const Point2 z{1.5, -0.7};
    const Point2 expect = apply_affine(f, apply_affine(g, z));
    const Point2 got = apply_affine(compose(f, g), z);
    CHECK(norm(got - expect) < 1e-12);
}

TEST_CASE("ScalarField2D validation") {
    CHECK_THROWS_AS(ScalarField2D(1, 5), InvalidArgument);
    CHECK_THROWS_AS(ScalarField2D(3, 3, std::vector<double>(8, 0.0)), DimensionMismatch);
    ScalarField2D f(3, 2, 1.5);
    CHECK(f.all_finite());
    f.at(2, 1) = std::nan("");
    CHECK_FALSE(f.all_finite());
    CHECK(f.at_clamped(-4, 0) == 1.5);
}

TEST_CASE("bilinear_sample examples") {
    ScalarField2D f(5, 5);
    f.at(2, 3) = 7.0;
    CHECK(bilinear_sample(f, {2, 3}) == 7.0);

    const ScalarField2D lin = oracle::field_from(4, 3, [](double x, double) { return 2.0 * x + 1.0; });
    CHECK(bilinear_sample(lin, {1.5, 0}) == doctest::Approx(4.0));

    ScalarField2D g(4, 4);
    g.at(0, 0) = -3.0;
    CHECK(bilinear_sample(g, {-5, -5}) == -3.0);
}

TEST_CASE("bilinear_sample agrees with stored values at every lattice point") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0, 1);
    ScalarField2D f(7, 5);
    for (double& v : f.values()) v = n(rng);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 7; ++x) CHECK(bilinear_sample(f, {double(x), double(y)}) == f.at(x, y));
    }
}

TEST_CASE("central_gradient examples") {
    const ScalarField2D c(10, 10, 4.0);
    CHECK(central_gradient(c, {3.3, 4.1}) == Vec2{0, 0});

    const ScalarField2D fx = oracle::field_from(10, 10, [](double x, double) { return x; });
    const Vec2 g = central_gradient(fx, {4.5, 5.25});
    CHECK(g.x == doctest::Approx(1.0));
    CHECK(g.y == doctest::Approx(0.0));

    const ScalarField2D q = oracle::field_from(20, 5, [](double x, double) { return x * x; });
    CHECK(std::abs(central_gradient(q, {10, 2}).x - 20.0) <= 1e-9);
}

TEST_CASE("central_gradient is exact on affine fields at interior lattice points") {
    const ScalarField2D f = oracle::field_from(9, 8, [](double x, double y) { return 0.5 - 1.25 * x + 3.5 * y; });
    for (int y = 1; y < 7; ++y) {
        for (int x = 1; x < 8; ++x) {
            const Vec2 g = central_gradient(f, {double(x), double(y)});
            CHECK(std::abs(g.x + 1.25) < 1e-12);
            CHECK(std::abs(g.y - 3.5) < 1e-12);
        }
    }
}

TEST_CASE("io round trips") {
    const auto dir = std::filesystem::temp_directory_path() / "mcac_core_io";
    std::filesystem::create_directories(dir);

    ScalarField2D img(6, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 6; ++x) img.at(x, y) = 40.0 * x + y;
    }
    io::write_pgm(dir / "a.pgm", img);
    CHECK(io::read_pgm(dir / "a.pgm") == img);
    io::write_pgm(dir / "b.pgm", img, 16);
    CHECK(io::read_pgm(dir / "b.pgm") == img);

    ScalarField2D raw(3, 2, std::vector<double>{0.1, -2.5, 1e-300, 7.0, std::acos(-1.0), -0.0});
    io::write_raw_field(dir / "c.mcf", raw);
    CHECK(io::read_raw_field(dir / "c.mcf") == raw);
    CHECK(std::filesystem::file_size(dir / "c.mcf") == 16 + 6 * 8);

    const PointSet pts{{1.5, -2.25}, {0, 3}};
    io::write_points_csv(dir / "p.csv", pts);
    CHECK(io::read_points_csv(dir / "p.csv") == pts);

    const std::vector<std::pair<int, int>> pairs{{0, 3}, {2, 1}};
    io::write_pairs_csv(dir / "q.csv", pairs);
    CHECK(io::read_pairs_csv(dir / "q.csv") == pairs);
    std::filesystem::remove_all(dir);
}

TEST_CASE("io reports malformed input") {
    const auto dir = std::filesystem::temp_directory_path() / "mcac_core_bad";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
    CHECK_THROWS_AS(io::read_pgm(dir / "bad.pgm"), FormatError);
    std::ofstream(dir / "bad.csv") << "x,y\n1,2\nfoo,3\n";
    CHECK_THROWS_AS(io::read_points_csv(dir / "bad.csv"), FormatError);
    std::ofstream(dir / "bad.mcf") << "XXXX";
    CHECK_THROWS_AS(io::read_raw_field(dir / "bad.mcf"), FormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fmt is fixed precision and never prints negative zero") {
    CHECK(io::fmt(1.0) == "1.000000");
    CHECK(io::fmt(-1e-12) == "0.000000");
    CHECK(io::fmt(-0.5, 2) == "-0.50");
}

}  // TEST_SUITE
