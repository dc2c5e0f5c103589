/**
 * @file core.hpp
 * @brief Geometry and raster primitives shared by every module.
 *
 * Pixel coordinates: origin at the top-left lattice point, x to the right,
 * y downward. Lattice point (x, y) stores values[y * width + x].
 */
#pragma once

#include <mcac/error.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mcac {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    constexpr Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Point2& operator+=(const Point2& o) { x += o.x; y += o.y; return *this; }
    constexpr Point2& operator-=(const Point2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Point2&) const = default;
};

constexpr Point2 operator*(double s, const Point2& p) { return p * s; }
constexpr double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Point2& p) { return std::hypot(p.x, p.y); }
constexpr double squared_norm(const Point2& p) { return p.x * p.x + p.y * p.y; }

using Vec2 = Point2;
using PointSet = std::vector<Point2>;

/// Row-major 2x2 matrix.
struct Mat2 {
    double a11 = 1.0, a12 = 0.0;
    double a21 = 0.0, a22 = 1.0;

    static constexpr Mat2 identity() { return {}; }
    static constexpr Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }
    static constexpr Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
    static Mat2 rotation(double theta);
    /// u v^T
    static constexpr Mat2 outer(const Vec2& u, const Vec2& v) {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }

    constexpr double det() const { return a11 * a22 - a12 * a21; }
    constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }
    constexpr Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    constexpr Mat2 operator*(const Mat2& m) const {
        return {a11 * m.a11 + a12 * m.a21, a11 * m.a12 + a12 * m.a22,
                a21 * m.a11 + a22 * m.a21, a21 * m.a12 + a22 * m.a22};
    }
    constexpr Mat2 operator+(const Mat2& m) const { return {a11 + m.a11, a12 + m.a12, a21 + m.a21, a22 + m.a22}; }
    constexpr Mat2 operator-(const Mat2& m) const { return {a11 - m.a11, a12 - m.a12, a21 - m.a21, a22 - m.a22}; }
    constexpr Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    constexpr Mat2& operator+=(const Mat2& m) { *this = *this + m; return *this; }
    constexpr bool operator==(const Mat2&) const = default;

    /// Entries in row-major order (a11, a12, a21, a22).
    constexpr std::array<double, 4> flat() const { return {a11, a12, a21, a22}; }
    static constexpr Mat2 from_flat(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }

    Mat2 inverse() const;
};

/// Frobenius inner product.
constexpr double frobenius(const Mat2& a, const Mat2& b) {
    return a.a11 * b.a11 + a.a12 * b.a12 + a.a21 * b.a21 + a.a22 * b.a22;
}
inline double frobenius_norm(const Mat2& a) { return std::sqrt(frobenius(a, a)); }

inline constexpr double kDefaultDetMin = 1e-6;

/// z -> a z + b.
struct AffineMap {
    Mat2 a = Mat2::identity();
    Vec2 b{};

    static AffineMap identity() { return {}; }
    static AffineMap translation(const Vec2& t) { return {Mat2::identity(), t}; }

    bool operator==(const AffineMap&) const = default;
};

Point2 apply_affine(const AffineMap& m, const Point2& z);

/// Throws SingularMap when |det(a)| < det_min.
AffineMap invert_affine(const AffineMap& m, double det_min = kDefaultDetMin);

/// (first ∘ second)(z) = first(second(z)).
AffineMap compose(const AffineMap& first, const AffineMap& second);

bool is_valid(const AffineMap& m, double det_min = kDefaultDetMin);

/// Dense real field on a width x height lattice, row-major.
class ScalarField2D {
public:
    ScalarField2D() = default;
    ScalarField2D(int width, int height, double fill = 0.0);
    ScalarField2D(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    /// Clamped lattice access.
    double at_clamped(int x, int y) const;

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool same_shape(const ScalarField2D& o) const { return width_ == o.width_ && height_ == o.height_; }
    bool all_finite() const;

    bool operator==(const ScalarField2D&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Bilinear interpolation; coordinates outside the lattice clamp to the border.
double bilinear_sample(const ScalarField2D& f, const Point2& z);

/// Lattice gradient by central differences (one-sided at the border).
Vec2 lattice_gradient(const ScalarField2D& f, int x, int y);

/// Lattice gradient bilinearly interpolated at z.
Vec2 central_gradient(const ScalarField2D& f, const Point2& z);

/// Both gradient components as fields, for repeated sampling.
struct GradientField {
    ScalarField2D dx;
    ScalarField2D dy;
};
GradientField gradient_field(const ScalarField2D& f);
Vec2 sample(const GradientField& g, const Point2& z);

}  // namespace mcac
