#include <mcac/matching.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace mcac {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Per-row shifted kernel exp(-r^2/eps^2 - max) and its row sums.
struct RowKernels {
    std::vector<double> dhat;
    std::vector<Vec2> residual;  // q_i - t_j
};

RowKernels row_kernels(const MatchProblem& p, const AffineMap& pose) {
    const std::size_t n = p.source.size();
    const std::size_t m = p.target.size();
    const double inv_e2 = 1.0 / (p.epsilon * p.epsilon);
    RowKernels rk;
    rk.dhat.resize(n * m);
    rk.residual.resize(n * m);
    std::vector<double> s(m);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 q = apply_affine(pose, p.source[i]);
        double smax = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            const Vec2 u = q - p.target[j];
            rk.residual[i * m + j] = u;
            s[j] = -squared_norm(u) * inv_e2;
            smax = std::max(smax, s[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            s[j] = std::exp(s[j] - smax);
            sum += s[j];
        }
        if (!std::isfinite(smax) || !(sum > 0.0) || !std::isfinite(sum)) {
            throw DegenerateRow("match_energy: row " + std::to_string(i) + " has no usable target weight");
        }
        for (std::size_t j = 0; j < m; ++j) rk.dhat[i * m + j] = s[j] / sum;
    }
    return rk;
}

}  // namespace

void MatchProblem::validate() const {
    if (source.empty() || target.empty()) throw InvalidArgument("MatchProblem: empty point set");
    if (cost.rows != source.size() || cost.cols != target.size() || cost.values.size() != cost.rows * cost.cols) {
        throw DimensionMismatch("MatchProblem: cost matrix is " + std::to_string(cost.rows) + "x" +
                                std::to_string(cost.cols) + ", points are " + std::to_string(source.size()) +
                                "x" + std::to_string(target.size()));
    }
    for (double c : cost.values) {
        if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("MatchProblem: costs must be finite and >= 0");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("MatchProblem: epsilon must be > 0");
}

void Correspondences::validate(std::size_t n_source, std::size_t n_target) const {
    std::set<int> seen;
    for (const auto& [i, j] : pairs) {
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_source || static_cast<std::size_t>(j) >= n_target) {
            throw InvalidArgument("correspondence (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") out of range");
        }
        if (!seen.insert(i).second) {
            throw InvalidArgument("source index " + std::to_string(i) + " appears in more than one correspondence");
        }
    }
}

std::vector<double> match_weights(const MatchProblem& p, const AffineMap& pose) {
    p.validate();
    return row_kernels(p, pose).dhat;
}

double match_energy(const MatchProblem& p, const AffineMap& pose) {
    p.validate();
    const RowKernels rk = row_kernels(p, pose);
    double e = 0.0;
    for (std::size_t k = 0; k < rk.dhat.size(); ++k) e -= std::exp(-p.cost.values[k]) * rk.dhat[k];
    return e;
}

MatchGradient grad_match(const MatchProblem& p, const AffineMap& pose, MatchGradientVariant variant) {
    p.validate();
    const std::size_t n = p.source.size();
    const std::size_t m = p.target.size();
    const double k2 = 2.0 / (p.epsilon * p.epsilon);
    const RowKernels rk = row_kernels(p, pose);
    MatchGradient g{Mat2::zero(), {}};
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 dq{};
        if (variant == MatchGradientVariant::Full) {
            // dE/dq_i = (2/eps^2) sum_j chat_ij dhat_ij (u_ij - ubar_i)
            Vec2 ubar{};
            for (std::size_t j = 0; j < m; ++j) ubar += rk.dhat[i * m + j] * rk.residual[i * m + j];
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t k = i * m + j;
                dq += (std::exp(-p.cost.values[k]) * rk.dhat[k]) * (rk.residual[k] - ubar);
            }
            dq = dq * k2;
        } else {
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t k = i * m + j;
                dq -= (std::exp(-p.cost.values[k]) * k2 * rk.dhat[k]) * rk.residual[k];
            }
        }
        g.d_a += Mat2::outer(dq, p.source[i]);
        g.d_b += dq;
    }
    return g;
}

AffineMap initial_alignment(const PointSet& src, const PointSet& tgt, const Correspondences& corr) {
    corr.validate(src.size(), tgt.size());
    const auto n = static_cast<Eigen::Index>(corr.pairs.size());
    if (n < 3) throw RankDeficient("initial_alignment: need at least 3 correspondences, got " + std::to_string(n));

    Eigen::MatrixXd design(n, 3);
    Eigen::MatrixXd rhs(n, 2);
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (Eigen::Index r = 0; r < n; ++r) {
        const Point2& p = src[corr.pairs[r].first];
        mean += Eigen::Vector2d(p.x, p.y);
    }
    mean /= static_cast<double>(n);
    // Collinearity test on the centered source points.
    Eigen::MatrixXd centered(n, 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Point2& p = src[corr.pairs[r].first];
        const Point2& q = tgt[corr.pairs[r].second];
        centered.row(r) << p.x - mean.x(), p.y - mean.y();
        design.row(r) << p.x, p.y, 1.0;
        rhs.row(r) << q.x, q.y;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto sv = svd.singularValues();
    if (!(sv(1) > 1e-9 * std::max(sv(0), 1e-300))) {
        throw RankDeficient("initial_alignment: source points are collinear");
    }
    const Eigen::MatrixXd sol = design.colPivHouseholderQr().solve(rhs);
    AffineMap m;
    m.a = {sol(0, 0), sol(1, 0), sol(0, 1), sol(1, 1)};
    m.b = {sol(2, 0), sol(2, 1)};
    return m;
}

AffineMap refine_alignment(const MatchProblem& p, const AffineMap& pose0, const RefineConfig& cfg) {
    p.validate();
    if (!is_valid(pose0, cfg.det_min)) throw SingularMap("refine_alignment: initial pose violates det_min");
    double rho2 = 0.0;
    for (const Point2& s : p.source) rho2 += squared_norm(s);
    rho2 = rho2 / static_cast<double>(p.source.size()) + 1.0;

    AffineMap pose = pose0;
    double e = match_energy(p, pose);
    double step = cfg.initial_step;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const MatchGradient g = grad_match(p, pose);
        const Mat2 dir_a = g.d_a * (-1.0 / rho2);
        const Vec2 dir_b = g.d_b * -1.0;
        const double slope = frobenius(g.d_a, g.d_a) / rho2 + squared_norm(g.d_b);
        if (std::sqrt(slope) <= cfg.gradient_tolerance) break;

        bool accepted = false;
        bool singular_only = true;
        AffineMap trial;
        for (int k = 0; k <= cfg.max_halvings; ++k) {
            trial = {pose.a + dir_a * step, pose.b + dir_b * step};
            if (!is_valid(trial, cfg.det_min)) {
                step *= 0.5;
                continue;
            }
            singular_only = false;
            const double te = match_energy(p, trial);
            if (te <= e - cfg.armijo * step * slope) {
                e = te;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (singular_only) throw SingularMap("refine_alignment: every trial step violates det_min");
            break;
        }
        const auto fa = (trial.a - pose.a).flat();
        double change = std::abs(trial.b.x - pose.b.x) + std::abs(trial.b.y - pose.b.y);
        for (double d : fa) change += std::abs(d);
        pose = trial;
        step *= 2.0;
        if (change / 6.0 < cfg.param_change_tol) break;
    }
    return pose;
}

CostMatrix build_cost_matrix(const std::vector<std::vector<double>>& src_desc,
                             const std::vector<std::vector<double>>& tgt_desc) {
    if (src_desc.empty() || tgt_desc.empty()) throw InvalidArgument("build_cost_matrix: empty descriptor list");
    const std::size_t dim = src_desc.front().size();
    for (const auto* list : {&src_desc, &tgt_desc}) {
        for (const auto& d : *list) {
            if (d.size() != dim) throw DimensionMismatch("build_cost_matrix: descriptors differ in length");
        }
    }
    CostMatrix c{src_desc.size(), tgt_desc.size(), std::vector<double>(src_desc.size() * tgt_desc.size())};
    for (std::size_t i = 0; i < c.rows; ++i) {
        for (std::size_t j = 0; j < c.cols; ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = src_desc[i][k] - tgt_desc[j][k];
                d2 += d * d;
            }
            c(i, j) = d2;
        }
    }
    const double med = median_of(c.values);
    if (med > 0.0) {
        for (double& v : c.values) v /= med;
    }
    return c;
}

double default_epsilon(const PointSet& target) {
    if (target.size() < 2) throw InvalidArgument("default_epsilon: need at least two target points");
    std::vector<double> nn;
    nn.reserve(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < target.size(); ++j) {
            if (i != j) best = std::min(best, norm(target[i] - target[j]));
        }
        nn.push_back(best);
    }
    return 2.0 * median_of(std::move(nn));
}

Correspondences best_cost_correspondences(const CostMatrix& cost) {
    Correspondences c;
    for (std::size_t i = 0; i < cost.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < cost.cols; ++j) {
            if (cost(i, j) < cost(i, best)) best = j;
        }
        c.pairs.emplace_back(static_cast<int>(i), static_cast<int>(best));
    }
    return c;
}

}  // namespace mcac
