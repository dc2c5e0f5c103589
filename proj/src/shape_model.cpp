#include <mcac/shape_model.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace mcac {

namespace {

// Kernel values psi_i(z) for every lattice point, center-major: k[i * P + pixel].
struct KernelCache {
    std::size_t n = 0;
    std::size_t pixels = 0;
    std::vector<double> k;
};

KernelCache build_kernels(const PointSet& centers, double sigma, int width, int height) {
    KernelCache c;
    c.n = centers.size();
    c.pixels = static_cast<std::size_t>(width) * height;
    c.k.resize(c.n * c.pixels);
    const double inv_s2 = 1.0 / (sigma * sigma);
    for (std::size_t i = 0; i < c.n; ++i) {
        double* row = c.k.data() + i * c.pixels;
        for (int y = 0; y < height; ++y) {
            const double dy = y - centers[i].y;
            for (int x = 0; x < width; ++x) {
                const double dx = x - centers[i].x;
                row[static_cast<std::size_t>(y) * width + x] = std::exp(-(dx * dx + dy * dy) * inv_s2);
            }
        }
    }
    return c;
}

std::vector<double> decision_values(const KernelCache& c, const std::vector<double>& weights, double bias) {
    std::vector<double> phi(c.pixels, bias);
    for (std::size_t i = 0; i < c.n; ++i) {
        const double a = weights[i];
        const double* row = c.k.data() + i * c.pixels;
        for (std::size_t p = 0; p < c.pixels; ++p) phi[p] += a * row[p];
    }
    return phi;
}

double error_from_phi(const std::vector<double>& phi, const SilhouetteMask& mask, const HeavisideParams& h) {
    const auto target = mask.values();
    double e = 0.0;
    for (std::size_t p = 0; p < phi.size(); ++p) {
        const double d = target[p] - heaviside(phi[p], h);
        e += d * d;
    }
    return e;
}

FitGradient gradient_from_phi(const KernelCache& c, const std::vector<double>& phi, const SilhouetteMask& mask,
                              const HeavisideParams& h) {
    const auto target = mask.values();
    std::vector<double> r(c.pixels);
    FitGradient g;
    g.d_weights.assign(c.n, 0.0);
    for (std::size_t p = 0; p < c.pixels; ++p) {
        r[p] = 2.0 * (heaviside(phi[p], h) - target[p]) * heaviside_derivative(phi[p], h);
        g.d_bias += r[p];
    }
    for (std::size_t i = 0; i < c.n; ++i) {
        const double* row = c.k.data() + i * c.pixels;
        double acc = 0.0;
        for (std::size_t p = 0; p < c.pixels; ++p) acc += r[p] * row[p];
        g.d_weights[i] = acc;
    }
    return g;
}

}  // namespace

void RbfShapeModel::validate() const {
    if (centers.empty()) throw InvalidArgument("RbfShapeModel: at least one center is required");
    if (weights.size() != centers.size()) throw InvalidArgument("RbfShapeModel: weights/centers length mismatch");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("RbfShapeModel: sigma must be finite and > 0");
    if (!std::isfinite(bias)) throw InvalidArgument("RbfShapeModel: bias must be finite");
}

void HeavisideParams::validate() const {
    if (!(epsilon_h > 0.0) || !std::isfinite(epsilon_h)) {
        throw InvalidArgument("HeavisideParams: epsilon_h must be finite and > 0");
    }
}

double heaviside(double x, const HeavisideParams& h) {
    return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(x / h.epsilon_h));
}

double heaviside_derivative(double x, const HeavisideParams& h) {
    const double e = h.epsilon_h;
    return e / (std::numbers::pi * (e * e + x * x));
}

void validate_mask(const SilhouetteMask& mask) {
    bool inside = false;
    bool outside = false;
    for (double v : mask.values()) {
        if (v == 1.0) {
            inside = true;
        } else if (v == 0.0) {
            outside = true;
        } else {
            throw InvalidArgument("SilhouetteMask: values must be 0 or 1");
        }
    }
    if (!inside || !outside) throw InvalidArgument("SilhouetteMask: needs both interior and exterior pixels");
}

std::size_t foreground_count(const SilhouetteMask& mask) {
    return static_cast<std::size_t>(std::count(mask.values().begin(), mask.values().end(), 1.0));
}

double eval_decision(const RbfShapeModel& m, const Point2& z) {
    const double inv_s2 = 1.0 / (m.sigma * m.sigma);
    double phi = m.bias;
    for (std::size_t i = 0; i < m.centers.size(); ++i) {
        phi += m.weights[i] * std::exp(-squared_norm(z - m.centers[i]) * inv_s2);
    }
    return phi;
}

double eval_silhouette(const RbfShapeModel& m, const HeavisideParams& h, const Point2& z) {
    return heaviside(eval_decision(m, z), h);
}

double fit_error(const RbfShapeModel& m, const SilhouetteMask& mask, const HeavisideParams& h) {
    m.validate();
    h.validate();
    double e = 0.0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const double d = mask.at(x, y) - eval_silhouette(m, h, {double(x), double(y)});
            e += d * d;
        }
    }
    return e;
}

double fit_score(const RbfShapeModel& m, const SilhouetteMask& mask, const HeavisideParams& h) {
    return 1.0 - fit_error(m, mask, h) / static_cast<double>(foreground_count(mask));
}

FitGradient fit_error_gradient(const RbfShapeModel& m, const SilhouetteMask& mask, const HeavisideParams& h) {
    m.validate();
    h.validate();
    const KernelCache c = build_kernels(m.centers, m.sigma, mask.width(), mask.height());
    return gradient_from_phi(c, decision_values(c, m.weights, m.bias), mask, h);
}

TrainResult train_logged(const RbfShapeModel& m0, const SilhouetteMask& mask, const HeavisideParams& h,
                         const TrainConfig& cfg) {
    m0.validate();
    h.validate();
    validate_mask(mask);
    const KernelCache cache = build_kernels(m0.centers, m0.sigma, mask.width(), mask.height());

    TrainResult res{m0, {}, 0};
    RbfShapeModel& m = res.model;
    std::vector<double> phi = decision_values(cache, m.weights, m.bias);
    double err = error_from_phi(phi, mask, h);
    res.error_log.push_back(err);
    double step = cfg.initial_step;

    for (int it = 0; it < cfg.max_iterations; ++it) {
        ++res.iterations;
        const FitGradient g = gradient_from_phi(cache, phi, mask, h);
        double g2 = g.d_bias * g.d_bias;
        for (double d : g.d_weights) g2 += d * d;
        if (!std::isfinite(g2)) throw NonFiniteGradient("train: gradient contains non-finite entries");
        if (std::sqrt(g2) <= cfg.gradient_tolerance) break;

        bool accepted = false;
        std::vector<double> trial_w(m.weights.size());
        for (int k = 0; k <= cfg.max_halvings; ++k) {
            for (std::size_t i = 0; i < trial_w.size(); ++i) trial_w[i] = m.weights[i] - step * g.d_weights[i];
            const double trial_b = m.bias - step * g.d_bias;
            std::vector<double> trial_phi = decision_values(cache, trial_w, trial_b);
            const double trial_err = error_from_phi(trial_phi, mask, h);
            if (trial_err <= err - cfg.armijo * step * g2) {
                const double decrease = err - trial_err;
                m.weights = trial_w;
                m.bias = trial_b;
                phi = std::move(trial_phi);
                err = trial_err;
                res.error_log.push_back(err);
                accepted = true;
                step *= 2.0;
                if (decrease < cfg.relative_tolerance * (err + decrease)) return res;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return res;
}

RbfShapeModel train(const RbfShapeModel& m0, const SilhouetteMask& mask, const HeavisideParams& h,
                    const TrainConfig& cfg) {
    return train_logged(m0, mask, h, cfg).model;
}

RbfShapeModel initial_model(const PointSet& centers, double sigma) {
    if (centers.empty()) throw InvalidArgument("initial_model: no centers");
    RbfShapeModel m;
    m.centers = centers;
    m.weights.assign(centers.size(), 1.0 / static_cast<double>(centers.size()));
    m.bias = -0.25;
    m.sigma = sigma;
    return m;
}

std::vector<double> default_sigma_grid() {
    std::vector<double> grid;
    for (int k = 10; k <= 200; ++k) grid.push_back(k / 10.0);
    return grid;
}

std::vector<double> sigma_scores(const SilhouetteMask& mask, const PointSet& centers, const HeavisideParams& h,
                                 const std::vector<double>& candidates) {
    validate_mask(mask);
    h.validate();
    const double area = static_cast<double>(foreground_count(mask));
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (double s : candidates) {
        if (!(s > 0.0)) throw InvalidArgument("select_sigma: candidates must be > 0");
        const RbfShapeModel m = initial_model(centers, s);
        const KernelCache c = build_kernels(m.centers, s, mask.width(), mask.height());
        scores.push_back(1.0 - error_from_phi(decision_values(c, m.weights, m.bias), mask, h) / area);
    }
    return scores;
}

double select_sigma(const SilhouetteMask& mask, const PointSet& centers, const HeavisideParams& h,
                    const std::vector<double>& candidates) {
    if (candidates.empty()) throw InvalidArgument("select_sigma: empty candidate list");
    const std::vector<double> scores = sigma_scores(mask, centers, h, candidates);
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best] || (scores[k] == scores[best] && candidates[k] < candidates[best])) best = k;
    }
    return candidates[best];
}

RbfShapeModel translated(const RbfShapeModel& m, const Vec2& offset) {
    RbfShapeModel out = m;
    for (auto& c : out.centers) c += offset;
    return out;
}

void write_model(std::ostream& out, const RbfShapeModel& m) {
    m.validate();
    char buf[128];
    out << "MCAC-SHAPE 1\n" << m.size() << '\n';
    std::snprintf(buf, sizeof buf, "%.17g\n%.17g\n", m.sigma, m.bias);
    out << buf;
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", m.centers[i].x, m.centers[i].y, m.weights[i]);
        out << buf;
    }
}

RbfShapeModel read_model(std::istream& in) {
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "MCAC-SHAPE 1") throw FormatError("shape model: expected header 'MCAC-SHAPE 1'");
    long long n = 0;
    RbfShapeModel m;
    if (!(in >> n >> m.sigma >> m.bias) || n < 1) throw FormatError("shape model: bad N/sigma/beta block");
    m.centers.resize(static_cast<std::size_t>(n));
    m.weights.resize(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        if (!(in >> m.centers[i].x >> m.centers[i].y >> m.weights[i])) {
            throw FormatError("shape model: truncated center list");
        }
    }
    try {
        m.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("shape model: ") + e.what());
    }
    return m;
}

void save_model(const std::filesystem::path& path, const RbfShapeModel& m) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    write_model(out, m);
}

RbfShapeModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model '" + path.string() + "'");
    return read_model(in);
}

}  // namespace mcac
