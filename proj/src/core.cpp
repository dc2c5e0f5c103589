#include <mcac/core.hpp>

#include <algorithm>
#include <string>

namespace mcac {

Mat2 Mat2::rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c, -s, s, c};
}

Mat2 Mat2::inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

Point2 apply_affine(const AffineMap& m, const Point2& z) {
    return m.a * z + m.b;
}

AffineMap invert_affine(const AffineMap& m, double det_min) {
    const double d = m.a.det();
    if (!(std::abs(d) >= det_min)) {
        throw SingularMap("invert_affine: |det(A)| = " + std::to_string(std::abs(d)) +
                          " below " + std::to_string(det_min));
    }
    const Mat2 inv = m.a.inverse();
    return {inv, (inv * m.b) * -1.0};
}

AffineMap compose(const AffineMap& first, const AffineMap& second) {
    return {first.a * second.a, first.a * second.b + first.b};
}

bool is_valid(const AffineMap& m, double det_min) {
    const auto f = m.a.flat();
    const bool finite = std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); }) &&
                        std::isfinite(m.b.x) && std::isfinite(m.b.y);
    return finite && std::abs(m.a.det()) >= det_min;
}

ScalarField2D::ScalarField2D(int width, int height, double fill)
    : ScalarField2D(width, height,
                    std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                            static_cast<std::size_t>(std::max(height, 0)),
                                        fill)) {}

ScalarField2D::ScalarField2D(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width < 2 || height < 2) {
        throw InvalidArgument("ScalarField2D: width and height must be >= 2");
    }
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatch("ScalarField2D: value count does not match width*height");
    }
}

double ScalarField2D::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
}

bool ScalarField2D::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double bilinear_sample(const ScalarField2D& f, const Point2& z) {
    const double x = std::clamp(z.x, 0.0, static_cast<double>(f.width() - 1));
    const double y = std::clamp(z.y, 0.0, static_cast<double>(f.height() - 1));
    const int x0 = std::min(static_cast<int>(std::floor(x)), f.width() - 2);
    const int y0 = std::min(static_cast<int>(std::floor(y)), f.height() - 2);
    const double tx = x - x0;
    const double ty = y - y0;
    // Lattice points are returned exactly; the interpolation below would round.
    if (tx == 0.0 && ty == 0.0) return f.at(x0, y0);
    const double v00 = f.at(x0, y0);
    const double v10 = f.at(x0 + 1, y0);
    const double v01 = f.at(x0, y0 + 1);
    const double v11 = f.at(x0 + 1, y0 + 1);
    return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
}

Vec2 lattice_gradient(const ScalarField2D& f, int x, int y) {
    const int w = f.width();
    const int h = f.height();
    double gx;
    double gy;
    if (x == 0) {
        gx = f.at(1, y) - f.at(0, y);
    } else if (x == w - 1) {
        gx = f.at(w - 1, y) - f.at(w - 2, y);
    } else {
        gx = 0.5 * (f.at(x + 1, y) - f.at(x - 1, y));
    }
    if (y == 0) {
        gy = f.at(x, 1) - f.at(x, 0);
    } else if (y == h - 1) {
        gy = f.at(x, h - 1) - f.at(x, h - 2);
    } else {
        gy = 0.5 * (f.at(x, y + 1) - f.at(x, y - 1));
    }
    return {gx, gy};
}

GradientField gradient_field(const ScalarField2D& f) {
    GradientField g{ScalarField2D(f.width(), f.height()), ScalarField2D(f.width(), f.height())};
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            const Vec2 d = lattice_gradient(f, x, y);
            g.dx.at(x, y) = d.x;
            g.dy.at(x, y) = d.y;
        }
    }
    return g;
}

Vec2 sample(const GradientField& g, const Point2& z) {
    return {bilinear_sample(g.dx, z), bilinear_sample(g.dy, z)};
}

Vec2 central_gradient(const ScalarField2D& f, const Point2& z) {
    const double x = std::clamp(z.x, 0.0, static_cast<double>(f.width() - 1));
    const double y = std::clamp(z.y, 0.0, static_cast<double>(f.height() - 1));
    const int x0 = std::min(static_cast<int>(std::floor(x)), f.width() - 2);
    const int y0 = std::min(static_cast<int>(std::floor(y)), f.height() - 2);
    const double tx = x - x0;
    const double ty = y - y0;
    const Vec2 g00 = lattice_gradient(f, x0, y0);
    if (tx == 0.0 && ty == 0.0) return g00;
    const Vec2 g10 = lattice_gradient(f, x0 + 1, y0);
    const Vec2 g01 = lattice_gradient(f, x0, y0 + 1);
    const Vec2 g11 = lattice_gradient(f, x0 + 1, y0 + 1);
    return (1.0 - ty) * ((1.0 - tx) * g00 + tx * g10) + ty * ((1.0 - tx) * g01 + tx * g11);
}

}  // namespace mcac
