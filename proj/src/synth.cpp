#include <mcac/active_contour.hpp>
#include <mcac/metrics.hpp>
#include <mcac/synth.hpp>

#include <algorithm>
#include <numbers>

namespace mcac::synth {

namespace {

constexpr double kPi = std::numbers::pi;

Template closed_curve(std::string name, int samples, auto&& curve) {
    Template t{std::move(name), {}};
    t.outline.reserve(samples);
    for (int k = 0; k < samples; ++k) t.outline.push_back(curve(2.0 * kPi * k / samples));
    return t;
}

bool inside_margin(const std::vector<Point2>& pts, int width, int height, double margin) {
    for (const Point2& p : pts) {
        if (p.x < margin || p.y < margin || p.x > width - 1 - margin || p.y > height - 1 - margin) return false;
    }
    return true;
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, int dim, double sd) {
    std::normal_distribution<double> n(0.0, sd);
    std::vector<double> v(dim);
    for (double& x : v) x = n(rng);
    return v;
}

}  // namespace

Template leaf_template() {
    // Pointed tip on the right, blunter base on the left.
    constexpr double kHalfLength = 36.0;
    constexpr double kHalfWidth = 20.0;
    constexpr int kSide = 80;
    Template t{"leaf", {}};
    for (int k = 0; k <= kSide; ++k) {
        const double s = static_cast<double>(k) / kSide;
        t.outline.push_back({kHalfLength * (2.0 * s - 1.0), -kHalfWidth * std::sin(kPi * s) * (1.0 - 0.35 * s)});
    }
    for (int k = kSide - 1; k > 0; --k) {
        const double s = static_cast<double>(k) / kSide;
        t.outline.push_back({kHalfLength * (2.0 * s - 1.0), kHalfWidth * std::sin(kPi * s) * (1.0 - 0.35 * s)});
    }
    return t;
}

Template ellipse_template() {
    return closed_curve("ellipse", 160, [](double th) { return Point2{34.0 * std::cos(th), 21.0 * std::sin(th)}; });
}

Template bean_template() {
    return closed_curve("bean", 160, [](double th) {
        return Point2{32.0 * std::cos(th), 18.0 * std::sin(th) + 9.0 * std::cos(2.0 * th) - 3.0};
    });
}

Template template_by_name(const std::string& name) {
    if (name == "leaf") return leaf_template();
    if (name == "ellipse") return ellipse_template();
    if (name == "bean") return bean_template();
    throw InvalidArgument("unknown template '" + name + "' (expected leaf, ellipse or bean)");
}

bool point_in_polygon(const std::vector<Point2>& polygon, const Point2& z) {
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a.y > z.y) != (b.y > z.y) && z.x < (b.x - a.x) * (z.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
}

SilhouetteMask polygon_mask(const std::vector<Point2>& outline, const AffineMap& pose, int width, int height) {
    if (outline.size() < 3) throw InvalidArgument("polygon_mask: outline needs at least 3 vertices");
    const AffineMap inv = invert_affine(pose);
    SilhouetteMask m(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Point2 p = apply_affine(inv, {static_cast<double>(x), static_cast<double>(y)});
            m.at(x, y) = point_in_polygon(outline, p) ? 1.0 : 0.0;
        }
    }
    return m;
}

PointSet interior_grid(const SilhouetteMask& mask, double spacing, double margin) {
    if (!(spacing > 0.0) || margin < 0.0) throw InvalidArgument("interior_grid: spacing > 0 and margin >= 0 required");
    validate_mask(mask);
    const int w = mask.width();
    const int h = mask.height();
    Point2 centroid;
    double count = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (mask.at(x, y) == 1.0) {
                centroid += Point2{static_cast<double>(x), static_cast<double>(y)};
                count += 1.0;
            }
        }
    }
    centroid = centroid * (1.0 / count);

    const auto clear_of_background = [&](const Point2& p) {
        const int r = static_cast<int>(std::ceil(margin)) + 1;
        const int cx = static_cast<int>(std::lround(p.x));
        const int cy = static_cast<int>(std::lround(p.y));
        if (cx < 0 || cy < 0 || cx >= w || cy >= h || mask.at(cx, cy) != 1.0) return false;
        for (int y = cy - r; y <= cy + r; ++y) {
            for (int x = cx - r; x <= cx + r; ++x) {
                const bool bg = x < 0 || y < 0 || x >= w || y >= h || mask.at(x, y) != 1.0;
                if (bg && squared_norm(Point2{static_cast<double>(x), static_cast<double>(y)} - p) < margin * margin) {
                    return false;
                }
            }
        }
        return true;
    };

    const double row = spacing * std::sqrt(3.0) / 2.0;
    const int ny = static_cast<int>(std::ceil(h / row)) + 1;
    const int nx = static_cast<int>(std::ceil(w / spacing)) + 1;
    PointSet out;
    for (int j = -ny; j <= ny; ++j) {
        const double offset = (j % 2 != 0) ? 0.5 * spacing : 0.0;
        for (int i = -nx; i <= nx; ++i) {
            const Point2 p{centroid.x + i * spacing + offset, centroid.y + j * row};
            if (clear_of_background(p)) out.push_back(p);
        }
    }
    return out;
}

ScalarField2D render(const SilhouetteMask& mask, const RenderOptions& opt) {
    ScalarField2D img(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) img.at(x, y) = mask.at(x, y) == 1.0 ? opt.foreground : opt.background;
    }
    return gaussian_blur(img, opt.edge_blur);
}

TrainedTemplate train_template(const Template& t, const TemplateOptions& opt) {
    const Vec2 center{0.5 * (opt.width - 1), 0.5 * (opt.height - 1)};
    TrainedTemplate out;
    out.mask = polygon_mask(t.outline, AffineMap::translation(center), opt.width, opt.height);
    const PointSet centers = interior_grid(out.mask, opt.center_spacing, opt.center_margin);
    if (centers.empty()) throw InvalidArgument("train_template: no interior centers; reduce spacing or margin");
    const std::vector<double> grid = opt.sigma_candidates.empty() ? default_sigma_grid() : opt.sigma_candidates;
    const double sigma = select_sigma(out.mask, centers, opt.heaviside, grid);
    TrainResult tr = train_logged(initial_model(centers, sigma), out.mask, opt.heaviside, opt.train);
    out.fit_score = fit_score(tr.model, out.mask, opt.heaviside);
    out.error_log = std::move(tr.error_log);

    Point2 origin;
    for (const Point2& c : centers) origin += c;
    out.origin = origin * (1.0 / static_cast<double>(centers.size()));
    out.model = translated(tr.model, out.origin * -1.0);
    out.shape.name = t.name;
    for (const Point2& p : t.outline) out.shape.outline.push_back(p + center - out.origin);
    return out;
}

ContourPolyline reference_contour(const TrainedTemplate& t) {
    const PosedShape at_origin{t.model, AffineMap::translation(t.origin)};
    const std::vector<ContourPolyline> cs = extract_contour(rasterize(at_origin, t.mask.width(), t.mask.height()));
    const auto longest = std::max_element(cs.begin(), cs.end(), [](const auto& a, const auto& b) {
        return a.points.size() < b.points.size();
    });
    const ContourPolyline snapped = snap_to_zero_set(at_origin, *longest);
    return transformed(snapped, AffineMap::translation(t.origin * -1.0));
}

Mat2 random_linear(std::mt19937_64& rng, double det_lo, double det_hi, double sv_lo, double sv_hi) {
    if (!(det_lo > 0.0) || det_hi < det_lo || !(sv_lo > 0.0) || sv_hi < sv_lo || sv_lo * sv_lo > det_hi ||
        sv_hi * sv_hi < det_lo) {
        throw InvalidArgument("random_linear: empty parameter range");
    }
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> log_sv(std::log(sv_lo), std::log(sv_hi));
    for (;;) {
        const double t1 = angle(rng);
        const double t2 = angle(rng);
        const double s1 = std::exp(log_sv(rng));
        const double s2 = std::exp(log_sv(rng));
        const double det = s1 * s2;
        if (det < det_lo || det > det_hi) continue;
        return Mat2::rotation(t1) * Mat2::diag(s1, s2) * Mat2::rotation(t2);
    }
}

std::vector<SynthInstance> synth_affine_suite(const TrainedTemplate& t, int count, const SuiteOptions& opt,
                                              std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("synth_affine_suite: count must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> shift(-opt.max_translation, opt.max_translation);
    std::uniform_real_distribution<double> ux(0.0, opt.width - 1.0);
    std::uniform_real_distribution<double> uy(0.0, opt.height - 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);

    const ContourPolyline ref = reference_contour(t);
    PointSet source;
    const std::size_t n_ref = ref.points.size();
    for (int k = 0; k < opt.contour_points; ++k) source.push_back(ref.points[k * n_ref / opt.contour_points]);
    source.insert(source.end(), t.model.centers.begin(), t.model.centers.end());

    const Vec2 center{0.5 * (opt.width - 1), 0.5 * (opt.height - 1)};
    std::vector<SynthInstance> suite;
    suite.reserve(count);
    for (int n = 0; n < count; ++n) {
        SynthInstance inst;
        if (opt.force_identity) {
            inst.pose = AffineMap::translation(t.origin);
            inst.truth_contour = transformed(ref, inst.pose);
        } else {
            for (int attempt = 0;; ++attempt) {
                if (attempt == 10000) throw InvalidArgument("synth_affine_suite: template does not fit the image");
                inst.pose.a = random_linear(rng, opt.det_lo, opt.det_hi);
                inst.pose.b = center + Vec2{shift(rng), shift(rng)};
                inst.truth_contour = transformed(ref, inst.pose);
                if (inside_margin(inst.truth_contour.points, opt.width, opt.height, opt.boundary_margin)) break;
            }
        }
        const PosedShape posed{t.model, inst.pose};
        inst.truth = mask_from_field(rasterize(posed, opt.width, opt.height));
        inst.image = render(inst.truth, opt.render);

        const Mat2 bias_a{1.0 + opt.pose_noise_a * jitter(rng), opt.pose_noise_a * jitter(rng),
                          opt.pose_noise_a * jitter(rng), 1.0 + opt.pose_noise_a * jitter(rng)};
        const Vec2 bias_b{opt.pose_noise_b * jitter(rng), opt.pose_noise_b * jitter(rng)};
        const AffineMap biased{inst.pose.a * bias_a, inst.pose.b + bias_b};

        inst.source = source;
        const std::size_t n_src = source.size();
        const std::size_t n_tgt = n_src + static_cast<std::size_t>(std::max(0, opt.distractors));
        PointSet raw_target;
        std::vector<std::vector<double>> src_desc;
        std::vector<std::vector<double>> raw_desc;
        for (std::size_t i = 0; i < n_src; ++i) {
            raw_target.push_back(apply_affine(biased, source[i]) +
                                 Vec2{opt.point_jitter * jitter(rng), opt.point_jitter * jitter(rng)});
            src_desc.push_back(gaussian_vector(rng, opt.descriptor_dim, 1.0));
            std::vector<double> d = src_desc.back();
            const std::vector<double> noise = gaussian_vector(rng, opt.descriptor_dim, opt.descriptor_noise);
            for (int k = 0; k < opt.descriptor_dim; ++k) d[k] += noise[k];
            raw_desc.push_back(std::move(d));
        }
        for (std::size_t j = n_src; j < n_tgt; ++j) {
            raw_target.push_back({ux(rng), uy(rng)});
            raw_desc.push_back(gaussian_vector(rng, opt.descriptor_dim, 1.0));
        }
        std::vector<std::size_t> order(n_tgt);
        for (std::size_t j = 0; j < n_tgt; ++j) order[j] = j;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::vector<double>> tgt_desc;
        for (std::size_t j : order) {
            inst.target.push_back(raw_target[j]);
            tgt_desc.push_back(raw_desc[j]);
        }
        inst.cost = build_cost_matrix(src_desc, tgt_desc);
        inst.corr = best_cost_correspondences(inst.cost);
        suite.push_back(std::move(inst));
    }
    return suite;
}

ScalarField2D add_noise(const ScalarField2D& base, double sigma, std::mt19937_64& rng, bool clip) {
    if (sigma < 0.0) throw InvalidArgument("add_noise: sigma must be >= 0");
    ScalarField2D out = base;
    if (sigma == 0.0) return out;
    std::normal_distribution<double> n(0.0, sigma);
    for (double& v : out.values()) {
        v += n(rng);
        if (clip) v = std::clamp(v, 0.0, 255.0);
    }
    return out;
}

std::vector<NoisyImage> synth_noise_suite(const ScalarField2D& base, const std::vector<double>& sigmas, int per_level,
                                          std::uint64_t seed) {
    if (sigmas.empty()) throw InvalidArgument("synth_noise_suite: sigmas must be non-empty");
    if (per_level < 1) throw InvalidArgument("synth_noise_suite: per_level must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<NoisyImage> out;
    out.reserve(sigmas.size() * static_cast<std::size_t>(per_level));
    for (double s : sigmas) {
        for (int k = 0; k < per_level; ++k) out.push_back({s, k, add_noise(base, s, rng)});
    }
    return out;
}

std::vector<double> default_noise_levels() {
    std::vector<double> v;
    for (int s = 1; s <= 20; ++s) v.push_back(s);
    return v;
}

}  // namespace mcac::synth
