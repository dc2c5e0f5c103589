#include <mcac/io.hpp>
#include <mcac/optimizer.hpp>

#include <fstream>
#include <string>

namespace mcac {

namespace {

PosedShape posed(const McacContext& ctx, const AffineMap& pose) {
    return {ctx.model, pose};
}

template <std::size_t K>
std::array<double, K> project_block(const std::array<double, K>& gj, const std::array<double, K>& ge) {
    const std::vector<double> p = project_gradient(gj, ge);
    std::array<double, K> out{};
    std::copy(p.begin(), p.end(), out.begin());
    return out;
}

double mean_abs_change(const AffineMap& a, const AffineMap& b) {
    const auto fa = (a.a - b.a).flat();
    double s = std::abs(a.b.x - b.b.x) + std::abs(a.b.y - b.b.y);
    for (double v : fa) s += std::abs(v);
    return s / 6.0;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (tau > 0.0) throw InvalidArgument("OptimizerConfig: tau must be <= 0");
    if (!(step_A > 0.0) || !(step_b > 0.0)) throw InvalidArgument("OptimizerConfig: step sizes must be > 0");
    if (max_iters < 0) throw InvalidArgument("OptimizerConfig: max_iters must be >= 0");
    if (!(param_change_tol > 0.0)) throw InvalidArgument("OptimizerConfig: param_change_tol must be > 0");
    if (!(tau_band > 0.0)) throw InvalidArgument("OptimizerConfig: tau_band must be > 0");
}

OptimizerConfig config_from_initial_energy(double e_init, double rho, OptimizerConfig base) {
    base.tau = rho * e_init;
    base.tau_band = 0.01 * std::abs(base.tau);
    if (base.tau_band == 0.0) base.tau_band = 1e-12;
    return base;
}

std::vector<double> project_gradient(std::span<const double> grad_j, std::span<const double> grad_e) {
    if (grad_j.size() != grad_e.size()) throw DimensionMismatch("project_gradient: length mismatch");
    std::vector<double> out(grad_j.begin(), grad_j.end());
    double ee = 0.0;
    for (double v : grad_e) ee += v * v;
    const double en = std::sqrt(ee);
    if (en < 1e-12) return out;
    double proj = 0.0;
    for (std::size_t k = 0; k < grad_j.size(); ++k) proj += grad_j[k] * (grad_e[k] / en);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= proj * (grad_e[k] / en);
    return out;
}

PoseGradient match_gradient_inverse_chart(const MatchProblem& p, const AffineMap& pose) {
    const MatchGradient g = grad_match(p, pose, MatchGradientVariant::Full);
    const Mat2 at = pose.a.transpose();
    return {(at * g.d_a * at) * -1.0, g.d_b};
}

McacState initial_state(const AffineMap& pose, const McacContext& ctx) {
    McacState s;
    s.pose = pose;
    s.E = match_energy(ctx.matching, pose);
    s.J = evaluate_contour(posed(ctx, pose), ctx.edges).energy;
    return s;
}

StepDirection step_direction(const McacState& state, const McacContext& ctx, const OptimizerConfig& cfg) {
    const PosedShape shape = posed(ctx, state.pose);
    const ContourEvaluation ev = evaluate_contour(shape, ctx.edges);
    const PoseGradient gj = grad_J_pose(shape, ev, ctx.edges);
    StepDirection d;
    if (state.E < cfg.tau - cfg.tau_band) {
        d.d_ainv = gj.d_ainv * -1.0;
        d.d_b = gj.d_b * -1.0;
        return d;
    }
    const PoseGradient ge = match_gradient_inverse_chart(ctx.matching, state.pose);
    const auto pa = project_block(gj.d_ainv.flat(), ge.d_ainv.flat());
    const auto pb = project_block(std::array<double, 2>{gj.d_b.x, gj.d_b.y}, {ge.d_b.x, ge.d_b.y});
    d.d_ainv = Mat2::from_flat(pa) * -1.0;
    d.d_b = Vec2{pb[0], pb[1]} * -1.0;
    d.projected = true;
    return d;
}

McacState mcac_step(const McacState& state, const McacContext& ctx, const OptimizerConfig& cfg) {
    const StepDirection dir = step_direction(state, ctx, cfg);
    McacState next = state;
    next.iteration = state.iteration + 1;
    next.projected = dir.projected;

    const double na = frobenius_norm(dir.d_ainv);
    const double nb = norm(dir.d_b);
    if (na == 0.0 && nb == 0.0) {
        next.step_accepted = false;
        return next;
    }
    const Mat2 unit_a = na > 0.0 ? dir.d_ainv * (cfg.step_A / na) : Mat2::zero();
    const Vec2 unit_b = nb > 0.0 ? dir.d_b * (cfg.step_b / nb) : Vec2{};
    const Mat2 a_inv = state.pose.a.inverse();

    double t = std::min(1.0, state.step_scale);
    for (int k = 0; k <= cfg.max_halvings; ++k, t *= 0.5) {
        const Mat2 trial_inv = a_inv + unit_a * t;
        if (!(std::abs(trial_inv.det()) > 0.0)) continue;
        const AffineMap trial{trial_inv.inverse(), state.pose.b + unit_b * t};
        if (!is_valid(trial, cfg.det_min)) continue;
        double e_new;
        double j_new;
        try {
            e_new = match_energy(ctx.matching, trial);
            j_new = evaluate_contour(posed(ctx, trial), ctx.edges).energy;
        } catch (const EmptyContour&) {
            continue;
        } catch (const DegenerateRow&) {
            continue;
        }
        if (j_new <= state.J && e_new <= cfg.tau + cfg.tau_band) {
            next.pose = trial;
            next.E = e_new;
            next.J = j_new;
            next.step_scale = std::min(1.0, 2.0 * t);
            next.step_accepted = true;
            return next;
        }
    }
    throw StalledStep("mcac_step: no acceptable step after " + std::to_string(cfg.max_halvings) + " halvings");
}

std::vector<McacState> run_mcac(const McacState& initial, const McacContext& ctx, const OptimizerConfig& cfg) {
    cfg.validate();
    if (initial.E > cfg.tau) {
        throw InfeasibleStart("run_mcac: initial matching energy " + std::to_string(initial.E) +
                              " exceeds tau " + std::to_string(cfg.tau) + "; raise |tau|");
    }
    std::vector<McacState> traj{initial};
    for (int it = 0; it < cfg.max_iters; ++it) {
        McacState next;
        try {
            next = mcac_step(traj.back(), ctx, cfg);
        } catch (const StalledStep&) {
            McacState stalled = traj.back();
            stalled.iteration += 1;
            stalled.step_accepted = false;
            traj.push_back(stalled);
            break;
        }
        const double change = mean_abs_change(next.pose, traj.back().pose);
        traj.push_back(next);
        if (change < cfg.param_change_tol) break;
    }
    return traj;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<McacState>& trajectory) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "iter,E,J,a11,a12,a21,a22,b1,b2,step_accepted\n";
    for (const McacState& s : trajectory) {
        const auto a = s.pose.a.flat();
        out << s.iteration << ',' << io::fmt(s.E, 9) << ',' << io::fmt(s.J, 9);
        for (double v : a) out << ',' << io::fmt(v, 9);
        out << ',' << io::fmt(s.pose.b.x, 9) << ',' << io::fmt(s.pose.b.y, 9) << ',' << (s.step_accepted ? 1 : 0)
            << '\n';
    }
}

}  // namespace mcac
