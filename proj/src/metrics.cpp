#include <mcac/metrics.hpp>

#include <algorithm>
#include <limits>

namespace mcac {

double jaccard(const SilhouetteMask& a, const SilhouetteMask& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("jaccard: masks differ in size");
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t k = 0; k < va.size(); ++k) {
        const bool in_a = va[k] == 1.0;
        const bool in_b = vb[k] == 1.0;
        inter += (in_a && in_b) ? 1 : 0;
        uni += (in_a || in_b) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double directed_hausdorff(const std::vector<Point2>& from, const std::vector<Point2>& to) {
    double worst = 0.0;
    for (const Point2& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point2& q : to) {
            best = std::min(best, squared_norm(p - q));
            if (best <= worst) break;
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

}  // namespace

double normalized_hausdorff(const std::vector<Point2>& a, const std::vector<Point2>& b) {
    if (a.empty() || b.empty()) throw EmptyContour("normalized_hausdorff: empty point set");
    const double h = std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
    std::vector<Point2> all(a);
    all.insert(all.end(), b.begin(), b.end());
    double diam2 = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) diam2 = std::max(diam2, squared_norm(all[i] - all[j]));
    }
    return diam2 > 0.0 ? h / std::sqrt(diam2) : 0.0;
}

double normalized_hausdorff(const ContourPolyline& a, const ContourPolyline& b) {
    return normalized_hausdorff(a.points, b.points);
}

double normalized_hausdorff(const std::vector<ContourPolyline>& a, const std::vector<ContourPolyline>& b) {
    return normalized_hausdorff(all_vertices(a), all_vertices(b));
}

SilhouetteMask mask_from_field(const ScalarField2D& f) {
    SilhouetteMask m(f.width(), f.height());
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) m.at(x, y) = f.at(x, y) >= 0.0 ? 1.0 : 0.0;
    }
    return m;
}

SilhouetteMask binarize(const ScalarField2D& f, double threshold) {
    SilhouetteMask m(f.width(), f.height());
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) m.at(x, y) = f.at(x, y) > threshold ? 1.0 : 0.0;
    }
    return m;
}

}  // namespace mcac
