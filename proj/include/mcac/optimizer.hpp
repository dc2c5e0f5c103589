/**
 * @file optimizer.hpp
 * @brief Matching-constrained contour refinement by projected gradient descent.
 *
 * Minimizes the contour energy J over the pose subject to E <= tau. The pose
 * is updated in the inverse chart (A^-1, b). While E stays below tau - band
 * the step follows -grad J; inside the band each block follows the component
 * of -grad J orthogonal to grad E (Frobenius inner product for the matrix
 * block), so the matching energy is preserved to first order.
 */
#pragma once

#include <mcac/active_contour.hpp>
#include <mcac/matching.hpp>
#include <mcac/shape_model.hpp>

#include <filesystem>
#include <span>
#include <vector>

namespace mcac {

struct OptimizerConfig {
    double tau = 0.0;
    /// Largest Frobenius change of A^-1 per iteration.
    double step_A = 0.02;
    /// Largest translation change (pixels) per iteration.
    double step_b = 1.0;
    int max_iters = 200;
    double param_change_tol = 1e-3;
    double tau_band = 0.0;
    int max_halvings = 30;
    double det_min = kDefaultDetMin;

    void validate() const;
};

/// tau = rho * E_init, band = 0.01 |tau|.
OptimizerConfig config_from_initial_energy(double e_init, double rho = 0.9, OptimizerConfig base = {});

struct McacState {
    AffineMap pose;
    double E = 0.0;
    double J = 0.0;
    int iteration = 0;
    /// Backtracking scale in (0, 1] carried to the next step.
    double step_scale = 1.0;
    bool step_accepted = true;
    bool projected = false;
};

struct McacContext {
    const MatchProblem& matching;
    const RbfShapeModel& model;
    const EdgeIndicatorField& edges;
};

/// g_j - <g_j, e> e with e = g_e / |g_e|; g_j unchanged when |g_e| < 1e-12.
std::vector<double> project_gradient(std::span<const double> grad_j, std::span<const double> grad_e);

/// Matching gradient converted to the inverse chart: grad_{A^-1} E = -A^T grad_A E A^T.
PoseGradient match_gradient_inverse_chart(const MatchProblem& p, const AffineMap& pose);

struct StepDirection {
    Mat2 d_ainv = Mat2::zero();
    Vec2 d_b{};
    bool projected = false;
};

/// Descent direction for the current state (before step-length normalization).
StepDirection step_direction(const McacState& state, const McacContext& ctx, const OptimizerConfig& cfg);

McacState initial_state(const AffineMap& pose, const McacContext& ctx);

/// One switching step with backtracking on J, det(A) and E <= tau + band.
/// Throws StalledStep when 2^-max_halvings of the step still fails.
McacState mcac_step(const McacState& state, const McacContext& ctx, const OptimizerConfig& cfg);

/// Iterates mcac_step until the mean absolute change of the six pose entries
/// (A, b) drops below param_change_tol, a step stalls, or max_iters is reached.
/// The first trajectory entry is the initial state. Throws InfeasibleStart when initial.E > tau.
std::vector<McacState> run_mcac(const McacState& initial, const McacContext& ctx, const OptimizerConfig& cfg);

/// CSV "iter,E,J,a11,a12,a21,a22,b1,b2,step_accepted".
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<McacState>& trajectory);

}  // namespace mcac
