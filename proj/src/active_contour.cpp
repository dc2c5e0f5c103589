#include <mcac/active_contour.hpp>

#include <algorithm>
#include <string>

namespace mcac {

namespace {

int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        i = i < 0 ? -i - 1 : 2 * n - i - 1;
    }
    return i;
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

}  // namespace

ScalarField2D gaussian_blur(const ScalarField2D& image, double sigma) {
    if (sigma < 0.0) throw InvalidArgument("gaussian_blur: sigma must be >= 0");
    if (sigma == 0.0) return image;
    const std::vector<double> k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    const int w = image.width();
    const int h = image.height();
    ScalarField2D tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * image.at(reflect(x + i, w), y);
            tmp.at(x, y) = acc;
        }
    }
    ScalarField2D out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, reflect(y + i, h));
            out.at(x, y) = acc;
        }
    }
    return out;
}

EdgeIndicatorField edge_indicator(const ScalarField2D& image, double sigma_g) {
    if (sigma_g < 0.0) throw InvalidArgument("edge_indicator: sigma_g must be >= 0");
    const ScalarField2D smooth = gaussian_blur(image, sigma_g);
    ScalarField2D g(image.width(), image.height());
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            g.at(x, y) = 1.0 / (1.0 + squared_norm(lattice_gradient(smooth, x, y)));
        }
    }
    GradientField grad = gradient_field(g);
    return {std::move(g), std::move(grad)};
}

std::vector<double> arc_weights(const ContourPolyline& c) {
    const std::size_t n = c.points.size();
    std::vector<double> ds(n, 0.0);
    if (n < 2) return ds;
    const std::size_t segments = c.closed ? n : n - 1;
    for (std::size_t k = 0; k < segments; ++k) {
        const double len = norm(c.points[(k + 1) % n] - c.points[k]);
        ds[k] += 0.5 * len;
        ds[(k + 1) % n] += 0.5 * len;
    }
    return ds;
}

double lattice_curvature(const ScalarField2D& f, int x, int y) {
    // Samples one step outside the lattice are linearly extrapolated, so planar fields stay flat at the border.
    const int w = f.width();
    const int h = f.height();
    auto row = [&](int xi, int yi) {
        if (xi < 0) return 2.0 * f.at(0, yi) - f.at(std::min(1, w - 1), yi);
        if (xi >= w) return 2.0 * f.at(w - 1, yi) - f.at(std::max(w - 2, 0), yi);
        return f.at(xi, yi);
    };
    auto v = [&](int dx, int dy) {
        const int xi = x + dx;
        const int yi = y + dy;
        if (yi < 0) return 2.0 * row(xi, 0) - row(xi, std::min(1, h - 1));
        if (yi >= h) return 2.0 * row(xi, h - 1) - row(xi, std::max(h - 2, 0));
        return row(xi, yi);
    };
    const double fx = 0.5 * (v(1, 0) - v(-1, 0));
    const double fy = 0.5 * (v(0, 1) - v(0, -1));
    const double fxx = v(1, 0) - 2.0 * v(0, 0) + v(-1, 0);
    const double fyy = v(0, 1) - 2.0 * v(0, 0) + v(0, -1);
    const double fxy = 0.25 * (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1));
    const double g2 = fx * fx + fy * fy;
    if (g2 < 1e-24) return 0.0;
    return (fxx * fy * fy - 2.0 * fx * fy * fxy + fyy * fx * fx) / (g2 * std::sqrt(g2));
}

ContourGeometry contour_geometry(const ContourPolyline& c, const ScalarField2D& phi_field) {
    ContourGeometry geom;
    geom.closed = c.closed;
    geom.position = c.points;
    geom.ds = arc_weights(c);
    const int w = phi_field.width();
    const int h = phi_field.height();
    for (const Point2& p : c.points) {
        const Vec2 grad = central_gradient(phi_field, p);
        const double len = norm(grad);
        if (!(len >= 1e-8)) {
            throw VanishingGradient("contour_geometry: |grad phi| = " + std::to_string(len) + " at (" +
                                    std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
        }
        const Vec2 n = grad * (1.0 / len);
        geom.normal.push_back(n);
        geom.tangent.push_back({-n.y, n.x});

        const double x = std::clamp(p.x, 0.0, double(w - 1));
        const double y = std::clamp(p.y, 0.0, double(h - 1));
        const int x0 = std::min(static_cast<int>(std::floor(x)), w - 2);
        const int y0 = std::min(static_cast<int>(std::floor(y)), h - 2);
        const double tx = x - x0;
        const double ty = y - y0;
        const double k = (1 - ty) * ((1 - tx) * lattice_curvature(phi_field, x0, y0) +
                                     tx * lattice_curvature(phi_field, x0 + 1, y0)) +
                         ty * ((1 - tx) * lattice_curvature(phi_field, x0, y0 + 1) +
                               tx * lattice_curvature(phi_field, x0 + 1, y0 + 1));
        geom.curvature.push_back(k);
    }
    return geom;
}

double gac_energy(const ContourPolyline& c, const EdgeIndicatorField& e) {
    const std::vector<double> ds = arc_weights(c);
    double j = 0.0;
    for (std::size_t k = 0; k < ds.size(); ++k) j += bilinear_sample(e.g, c.points[k]) * ds[k];
    return j;
}

double gac_energy(const std::vector<ContourPolyline>& contours, const EdgeIndicatorField& e) {
    double j = 0.0;
    for (const auto& c : contours) j += gac_energy(c, e);
    return j;
}

std::vector<Vec2> gac_functional_gradient(const ContourGeometry& geom, const EdgeIndicatorField& e) {
    std::vector<Vec2> out;
    out.reserve(geom.size());
    for (std::size_t k = 0; k < geom.size(); ++k) {
        const Vec2& n = geom.normal[k];
        const double g = bilinear_sample(e.g, geom.position[k]);
        const Vec2 dg = sample(e.grad_g, geom.position[k]);
        out.push_back(n * (dot(dg, n) - g * geom.curvature[k]));
    }
    return out;
}

std::vector<double> gac_normal_speed(const ContourGeometry& geom, const EdgeIndicatorField& e) {
    std::vector<double> out;
    out.reserve(geom.size());
    for (std::size_t k = 0; k < geom.size(); ++k) {
        const double g = bilinear_sample(e.g, geom.position[k]);
        const Vec2 dg = sample(e.grad_g, geom.position[k]);
        out.push_back(dot(dg, geom.normal[k]) + g * geom.curvature[k]);
    }
    return out;
}

PoseGradient grad_J_pose_continuum(const PosedShape& s, const ContourPolyline& c, const ContourGeometry& geom,
                                   const EdgeIndicatorField& e) {
    if (geom.size() != c.points.size()) throw DimensionMismatch("grad_J_pose: geometry/contour size mismatch");
    const std::vector<double> speed = gac_normal_speed(geom, e);
    PoseGradient grad;
    for (std::size_t k = 0; k < geom.size(); ++k) {
        const Point2& z = c.points[k];
        const double denom = dot(geom.normal[k], grad_z_phi_s(s, z));
        if (!(std::abs(denom) >= 1e-8)) {
            throw VanishingGradient("grad_J_pose: <N, grad phi_S> vanishes at a contour vertex");
        }
        const double factor = -speed[k] * geom.ds[k] / denom;
        grad.d_ainv += d_phi_s_d_ainv(s, z) * factor;
        grad.d_b += d_phi_s_d_b(s, z) * factor;
    }
    return grad;
}

namespace {

// dJ/dv_k for J = sum over segments of (g_a + g_b) / 2 * |segment|, without the g-gradient part.
Vec2 length_term(const ContourPolyline& c, std::size_t k, const EdgeIndicatorField& e) {
    const std::size_t n = c.points.size();
    const Point2& v = c.points[k];
    const double gv = bilinear_sample(e.g, v);
    Vec2 out{};
    auto segment = [&](std::size_t other) {
        const Point2& w = c.points[other];
        const double len = norm(v - w);
        if (len > 0.0) out += (v - w) * (0.5 * (gv + bilinear_sample(e.g, w)) / len);
    };
    if (c.closed || k + 1 < n) segment((k + 1) % n);
    if (c.closed || k > 0) segment((k + n - 1) % n);
    return out;
}

}  // namespace

PoseGradient grad_J_pose(const PosedShape& s, const ContourPolyline& c, const EdgeIndicatorField& e) {
    const std::vector<double> ds = arc_weights(c);
    PoseGradient grad;
    for (std::size_t k = 0; k < c.points.size(); ++k) {
        const Point2& v = c.points[k];
        const bool on_row = v.y == std::floor(v.y);
        const bool on_col = v.x == std::floor(v.x);
        if (on_row == on_col) {
            // A vertex on a lattice point has no unique edge; move it along the normal instead.
            const Vec2 gphi = grad_z_phi_s(s, v);
            const double len = norm(gphi);
            if (!(len >= 1e-8)) throw VanishingGradient("grad_J_pose: grad phi_S vanishes at a contour vertex");
            const Vec2 n = gphi * (1.0 / len);
            const double dg = (bilinear_sample(e.g, v + n * 1e-6) - bilinear_sample(e.g, v - n * 1e-6)) / 2e-6;
            const double factor = -(dot(length_term(c, k, e), n) + dg * ds[k]) / len;
            grad.d_ainv += d_phi_s_d_ainv(s, v) * factor;
            grad.d_b += d_phi_s_d_b(s, v) * factor;
            continue;
        }
        // The vertex slides along its cell edge p0 -> p1 at t = phi0 / (phi0 - phi1).
        const Vec2 dir = on_row ? Vec2{1, 0} : Vec2{0, 1};
        const Point2 p0{std::floor(v.x), std::floor(v.y)};
        const Point2 p1 = p0 + dir;
        const double t = on_row ? v.x - p0.x : v.y - p0.y;
        const double phi0 = eval_phi_s(s, p0);
        const double phi1 = eval_phi_s(s, p1);
        if (!(std::abs(phi1 - phi0) >= 1e-12)) throw VanishingGradient("grad_J_pose: flat cell edge at a contour vertex");
        // Bilinear g is linear along a lattice edge.
        const double dg = bilinear_sample(e.g, p1) - bilinear_sample(e.g, p0);
        const double dj_dt = dot(length_term(c, k, e), dir) + dg * ds[k];
        const double factor = -dj_dt / (phi1 - phi0);
        grad.d_ainv += (d_phi_s_d_ainv(s, p0) * (1.0 - t) + d_phi_s_d_ainv(s, p1) * t) * factor;
        grad.d_b += (d_phi_s_d_b(s, p0) * (1.0 - t) + d_phi_s_d_b(s, p1) * t) * factor;
    }
    return grad;
}

ContourEvaluation evaluate_contour(const PosedShape& s, const EdgeIndicatorField& e) {
    ContourEvaluation ev;
    ev.phi = rasterize(s, e.g.width(), e.g.height());
    ev.contours = extract_contour(ev.phi);
    ev.energy = gac_energy(ev.contours, e);
    return ev;
}

PoseGradient grad_J_pose(const PosedShape& s, const ContourEvaluation& eval, const EdgeIndicatorField& e) {
    PoseGradient total;
    for (const auto& c : eval.contours) total += grad_J_pose(s, c, e);
    return total;
}

}  // namespace mcac
