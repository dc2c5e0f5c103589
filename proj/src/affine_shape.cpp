#include <mcac/affine_shape.hpp>
#include <mcac/io.hpp>

#include <algorithm>
#include <array>
#include <fstream>

namespace mcac {

namespace {

struct InverseFrame {
    Mat2 a_inv;
    Vec2 b;
};

InverseFrame inverse_frame(const PosedShape& s) {
    const double d = s.pose.a.det();
    if (!(std::abs(d) >= kDefaultDetMin)) throw SingularMap("posed shape: pose is not invertible");
    return {s.pose.a.inverse(), s.pose.b};
}

}  // namespace

double eval_phi_s(const PosedShape& s, const Point2& z) {
    const InverseFrame f = inverse_frame(s);
    const Point2 u = f.a_inv * (z - f.b);
    return eval_decision(s.model, u);
}

double eval_phi_noninvariant(const PosedShape& s, const Point2& z) {
    const RbfShapeModel& m = s.model;
    const double inv_s2 = 1.0 / (m.sigma * m.sigma);
    double phi = m.bias;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Point2 q = apply_affine(s.pose, m.centers[i]);
        phi += m.weights[i] * std::exp(-squared_norm(z - q) * inv_s2);
    }
    return phi;
}

double eval_posed(const PosedShape& s, const Point2& z, Representation rep) {
    return rep == Representation::Invariant ? eval_phi_s(s, z) : eval_phi_noninvariant(s, z);
}

Vec2 grad_z_phi_s(const PosedShape& s, const Point2& z) {
    const InverseFrame f = inverse_frame(s);
    const RbfShapeModel& m = s.model;
    const double inv_s2 = 1.0 / (m.sigma * m.sigma);
    const Point2 u = f.a_inv * (z - f.b);
    Vec2 acc{};
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Vec2 v = u - m.centers[i];
        acc += (m.weights[i] * std::exp(-squared_norm(v) * inv_s2)) * v;
    }
    return (f.a_inv.transpose() * acc) * (-2.0 * inv_s2);
}

Mat2 d_phi_s_d_ainv(const PosedShape& s, const Point2& z) {
    const InverseFrame f = inverse_frame(s);
    const RbfShapeModel& m = s.model;
    const double inv_s2 = 1.0 / (m.sigma * m.sigma);
    const Vec2 zb = z - f.b;
    const Point2 u = f.a_inv * zb;
    Vec2 acc{};
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Vec2 v = u - m.centers[i];
        acc += (m.weights[i] * std::exp(-squared_norm(v) * inv_s2)) * v;
    }
    return Mat2::outer(acc, zb) * (-2.0 * inv_s2);
}

Vec2 d_phi_s_d_b(const PosedShape& s, const Point2& z) {
    return grad_z_phi_s(s, z) * -1.0;
}

ScalarField2D rasterize(const PosedShape& s, int width, int height, Representation rep) {
    s.model.validate();
    ScalarField2D f(width, height);
    if (rep == Representation::NonInvariant) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) f.at(x, y) = eval_phi_noninvariant(s, {double(x), double(y)});
        }
        return f;
    }
    const InverseFrame fr = inverse_frame(s);
    const RbfShapeModel& m = s.model;
    const double inv_s2 = 1.0 / (m.sigma * m.sigma);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Point2 u = fr.a_inv * (Point2{double(x), double(y)} - fr.b);
            double phi = m.bias;
            for (std::size_t i = 0; i < m.size(); ++i) {
                phi += m.weights[i] * std::exp(-squared_norm(u - m.centers[i]) * inv_s2);
            }
            f.at(x, y) = phi;
        }
    }
    return f;
}

std::vector<ContourPolyline> extract_contour(const ScalarField2D& f) {
    if (!f.all_finite()) throw InvalidArgument("extract_contour: field has non-finite values");
    const int w = f.width();
    const int h = f.height();
    const int n_horizontal = h * (w - 1);
    const int n_edges = n_horizontal + (h - 1) * w;
    auto hedge = [&](int x, int y) { return y * (w - 1) + x; };
    auto vedge = [&](int x, int y) { return n_horizontal + y * w + x; };
    auto positive = [&](int x, int y) { return f.at(x, y) >= 0.0; };

    std::vector<Point2> vertex(n_edges);
    std::vector<char> crossed(n_edges, 0);
    auto crossing = [&](int x0, int y0, int x1, int y1) {
        const double v0 = f.at(x0, y0);
        const double v1 = f.at(x1, y1);
        const double t = v0 / (v0 - v1);
        return Point2{x0 + t * (x1 - x0), y0 + t * (y1 - y0)};
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            if (positive(x, y) != positive(x + 1, y)) {
                crossed[hedge(x, y)] = 1;
                vertex[hedge(x, y)] = crossing(x, y, x + 1, y);
            }
        }
    }
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (positive(x, y) != positive(x, y + 1)) {
                crossed[vedge(x, y)] = 1;
                vertex[vedge(x, y)] = crossing(x, y, x, y + 1);
            }
        }
    }

    // Each crossed edge is shared by at most two cells, so every vertex has degree <= 2.
    std::vector<std::array<int, 2>> link(n_edges, {-1, -1});
    auto connect = [&](int a, int b) {
        for (int e : {a, b}) {
            const int other = e == a ? b : a;
            if (link[e][0] < 0) {
                link[e][0] = other;
            } else {
                link[e][1] = other;
            }
        }
    };
    bool any = false;
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            const std::array<int, 4> e{hedge(x, y), vedge(x + 1, y), hedge(x, y + 1), vedge(x, y)};
            std::array<int, 4> cut{};
            int count = 0;
            for (int k = 0; k < 4; ++k) {
                if (crossed[e[k]]) cut[count++] = k;
            }
            if (count == 0) continue;
            any = true;
            if (count == 2) {
                connect(e[cut[0]], e[cut[1]]);
                continue;
            }
            // Saddle: corners 0 and 2 share a sign, 1 and 3 the other.
            const double center = 0.25 * (f.at(x, y) + f.at(x + 1, y) + f.at(x + 1, y + 1) + f.at(x, y + 1));
            if ((center >= 0.0) == positive(x, y)) {
                connect(e[0], e[1]);
                connect(e[2], e[3]);
            } else {
                connect(e[3], e[0]);
                connect(e[1], e[2]);
            }
        }
    }
    if (!any) throw EmptyContour("extract_contour: field has uniform sign");

    std::vector<char> visited(n_edges, 0);
    std::vector<ContourPolyline> out;
    auto walk = [&](int start, bool closed) {
        ContourPolyline poly;
        poly.closed = closed;
        int prev = -1;
        int cur = start;
        while (cur >= 0 && !visited[cur]) {
            visited[cur] = 1;
            const Point2 p = vertex[cur];
            if (poly.points.empty() || squared_norm(p - poly.points.back()) > 1e-24) poly.points.push_back(p);
            const int next = link[cur][0] != prev ? link[cur][0] : link[cur][1];
            prev = cur;
            cur = next;
        }
        if (closed && poly.points.size() > 1 && squared_norm(poly.points.front() - poly.points.back()) <= 1e-24) {
            poly.points.pop_back();
        }
        if (poly.points.size() >= 2) out.push_back(std::move(poly));
    };
    for (int e = 0; e < n_edges; ++e) {
        if (crossed[e] && !visited[e] && link[e][1] < 0) walk(e, false);
    }
    for (int e = 0; e < n_edges; ++e) {
        if (crossed[e] && !visited[e]) walk(e, true);
    }
    if (out.empty()) throw EmptyContour("extract_contour: no polyline with two or more vertices");
    return out;
}

ContourPolyline snap_to_zero_set(const PosedShape& s, const ContourPolyline& c, int max_iterations) {
    ContourPolyline out = c;
    for (Point2& p : out.points) {
        for (int it = 0; it < max_iterations; ++it) {
            const double phi = eval_phi_s(s, p);
            const Vec2 g = grad_z_phi_s(s, p);
            const double g2 = squared_norm(g);
            if (g2 < 1e-300) break;
            const Vec2 step = g * (phi / g2);
            p -= step;
            if (squared_norm(step) < 1e-28) break;
        }
    }
    return out;
}

double invariance_residual(const PosedShape& s, const ContourPolyline& reference_contour, Representation rep) {
    double worst = 0.0;
    for (const Point2& zc : reference_contour.points) {
        worst = std::max(worst, std::abs(eval_posed(s, apply_affine(s.pose, zc), rep)));
    }
    return worst;
}

ContourPolyline transformed(const ContourPolyline& c, const AffineMap& m) {
    ContourPolyline out{{}, c.closed};
    out.points.reserve(c.points.size());
    for (const Point2& p : c.points) out.points.push_back(apply_affine(m, p));
    return out;
}

std::size_t vertex_count(const std::vector<ContourPolyline>& contours) {
    std::size_t n = 0;
    for (const auto& c : contours) n += c.points.size();
    return n;
}

std::vector<Point2> all_vertices(const std::vector<ContourPolyline>& contours) {
    std::vector<Point2> v;
    v.reserve(vertex_count(contours));
    for (const auto& c : contours) v.insert(v.end(), c.points.begin(), c.points.end());
    return v;
}

void write_contours_csv(const std::filesystem::path& path, const std::vector<ContourPolyline>& contours) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "x,y,polyline_id,closed\n";
    for (std::size_t id = 0; id < contours.size(); ++id) {
        for (const Point2& p : contours[id].points) {
            out << io::fmt(p.x) << ',' << io::fmt(p.y) << ',' << id << ',' << (contours[id].closed ? 1 : 0) << '\n';
        }
    }
}

}  // namespace mcac
