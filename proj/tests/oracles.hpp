// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <mcac/affine_shape.hpp>
#include <mcac/core.hpp>
#include <mcac/shape_model.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using mcac::AffineMap;
using mcac::Mat2;
using mcac::Point2;
using mcac::Vec2;

/// Central difference of f along one scalar parameter.
inline double central_difference(const std::function<double(double)>& f, double x0, double h) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

/// |a - b| / max(|a|, |b|, floor).
inline double rel_err(double a, double b, double floor = 1e-12) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Relative error between two vectors measured in the Euclidean norm.
inline double rel_err(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12) {
    double diff = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        diff += (a[k] - b[k]) * (a[k] - b[k]);
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

/// Term-by-term phi(z), written without any library helper.
inline double decision_sum(const mcac::RbfShapeModel& m, const Point2& z) {
    double s = m.bias;
    for (std::size_t i = 0; i < m.centers.size(); ++i) {
        const double dx = z.x - m.centers[i].x;
        const double dy = z.y - m.centers[i].y;
        s += m.weights[i] * std::exp(-(dx * dx + dy * dy) / (m.sigma * m.sigma));
    }
    return s;
}

/// Term-by-term phi_S(z) with v_i = A^-1 z - p_i - A^-1 b.
inline double posed_sum(const mcac::RbfShapeModel& m, const AffineMap& pose, const Point2& z) {
    const double det = pose.a.a11 * pose.a.a22 - pose.a.a12 * pose.a.a21;
    const double i11 = pose.a.a22 / det;
    const double i12 = -pose.a.a12 / det;
    const double i21 = -pose.a.a21 / det;
    const double i22 = pose.a.a11 / det;
    double s = m.bias;
    for (std::size_t i = 0; i < m.centers.size(); ++i) {
        const double vx = i11 * z.x + i12 * z.y - m.centers[i].x - (i11 * pose.b.x + i12 * pose.b.y);
        const double vy = i21 * z.x + i22 * z.y - m.centers[i].y - (i21 * pose.b.x + i22 * pose.b.y);
        s += m.weights[i] * std::exp(-(vx * vx + vy * vy) / (m.sigma * m.sigma));
    }
    return s;
}

/// phi_S as a function of the inverse chart (A^-1 entries, b), evaluated literally.
inline double posed_sum_inverse_chart(const mcac::RbfShapeModel& m, const Mat2& a_inv, const Vec2& b,
                                      const Point2& z) {
    double s = m.bias;
    const Vec2 d{z.x - b.x, z.y - b.y};
    for (std::size_t i = 0; i < m.centers.size(); ++i) {
        const double vx = a_inv.a11 * d.x + a_inv.a12 * d.y - m.centers[i].x;
        const double vy = a_inv.a21 * d.x + a_inv.a22 * d.y - m.centers[i].y;
        s += m.weights[i] * std::exp(-(vx * vx + vy * vy) / (m.sigma * m.sigma));
    }
    return s;
}

/// Per-pixel sum of squared silhouette differences, arctan Heaviside.
inline double fit_error_sum(const mcac::RbfShapeModel& m, const mcac::SilhouetteMask& mask, double eps_h) {
    const double pi = std::acos(-1.0);
    double e = 0.0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const double phi = decision_sum(m, {static_cast<double>(x), static_cast<double>(y)});
            const double he = 0.5 * (1.0 + (2.0 / pi) * std::atan(phi / eps_h));
            const double d = mask.at(x, y) - he;
            e += d * d;
        }
    }
    return e;
}

inline mcac::SilhouetteMask disk_mask(int w, int h, Point2 c, double r) {
    mcac::SilhouetteMask m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m.at(x, y) = std::hypot(x - c.x, y - c.y) <= r ? 1.0 : 0.0;
    }
    return m;
}

inline mcac::ScalarField2D field_from(int w, int h, const std::function<double(double, double)>& f) {
    mcac::ScalarField2D out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out.at(x, y) = f(x, y);
    }
    return out;
}

/// Random pose with det in [det_lo, det_hi], built from rotations and a diagonal scale.
inline AffineMap random_pose(std::mt19937_64& rng, double det_lo, double det_hi, Vec2 b_center, double b_spread) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::acos(-1.0));
    std::uniform_real_distribution<double> sc(std::sqrt(det_lo), std::sqrt(det_hi));
    std::uniform_real_distribution<double> shift(-b_spread, b_spread);
    for (;;) {
        const double s1 = sc(rng);
        const double s2 = sc(rng);
        const double t1 = ang(rng);
        const double t2 = ang(rng);
        if (s1 * s2 < det_lo || s1 * s2 > det_hi) continue;
        const Mat2 a = Mat2::rotation(t1) * Mat2::diag(s1, s2) * Mat2::rotation(t2);
        return {a, {b_center.x + shift(rng), b_center.y + shift(rng)}};
    }
}

/// Brute-force Hausdorff distance between two point sets.
inline double hausdorff(const std::vector<Point2>& a, const std::vector<Point2>& b) {
    auto directed = [](const std::vector<Point2>& p, const std::vector<Point2>& q) {
        double worst = 0.0;
        for (const Point2& u : p) {
            double best = 1e300;
            for (const Point2& v : q) best = std::min(best, std::hypot(u.x - v.x, u.y - v.y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace oracle
