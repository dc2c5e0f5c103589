/**
 * @file matching.hpp
 * @brief Soft point matching energy, its pose gradients and affine alignment.
 *
 * For template points p_i mapped to q_i = A p_i + b and target points t_j,
 *
 *   E(A, b) = - sum_ij exp(-c_ij) dhat_ij,
 *   dhat_ij = exp(-r_ij^2 / eps^2) / sum_k exp(-r_ik^2 / eps^2),  r_ij = |q_i - t_j|.
 *
 * Each template row is normalized over the targets, so E lies in
 * [-N max exp(-c), 0]. Rows are evaluated with a max shift and never
 * underflow for finite poses.
 */
#pragma once

#include <mcac/core.hpp>

#include <utility>
#include <vector>

namespace mcac {

/// Row-major N x M cost matrix.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct MatchProblem {
    PointSet source;
    PointSet target;
    CostMatrix cost;
    double epsilon = 1.0;

    void validate() const;
};

struct Correspondences {
    std::vector<std::pair<int, int>> pairs;

    /// Throws InvalidArgument on out-of-range or repeated source indices.
    void validate(std::size_t n_source, std::size_t n_target) const;
};

struct MatchGradient {
    Mat2 d_a;
    Vec2 d_b;
};

enum class MatchGradientVariant {
    /// Exact gradient of E, including the pose dependence of the row normalization.
    Full,
    /// -sum_ij exp(-c_ij) g_ij (A p_i + b - t_j) [p_i^T | 1] with g_ij = (2/eps^2) dhat_ij held
    /// constant. This is the negative of the gradient obtained when the normalization
    /// is frozen, i.e. an ascent direction of the matching score.
    Printed,
};

double match_energy(const MatchProblem& p, const AffineMap& pose);

/// Normalized assignment weights dhat_ij (row-major N x M).
std::vector<double> match_weights(const MatchProblem& p, const AffineMap& pose);

MatchGradient grad_match(const MatchProblem& p, const AffineMap& pose,
                         MatchGradientVariant variant = MatchGradientVariant::Full);

/// Least-squares A, b minimizing sum |A p_i + b - t_j|^2 over the matched pairs.
AffineMap initial_alignment(const PointSet& src, const PointSet& tgt, const Correspondences& corr);

struct RefineConfig {
    int max_iterations = 500;
    /// Stop when the mean absolute change of (a11, a12, a21, a22, b1, b2) drops below this.
    double param_change_tol = 1e-6;
    double gradient_tolerance = 1e-10;
    double initial_step = 1.0;
    double armijo = 1e-4;
    int max_halvings = 40;
    double det_min = kDefaultDetMin;
};

/// Gradient descent on E with backtracking. The A block is preconditioned by
/// the mean squared source radius so both blocks move points by similar amounts.
AffineMap refine_alignment(const MatchProblem& p, const AffineMap& pose0, const RefineConfig& cfg = {});

/// Squared Euclidean descriptor distances scaled so the median entry is 1.
CostMatrix build_cost_matrix(const std::vector<std::vector<double>>& src_desc,
                             const std::vector<std::vector<double>>& tgt_desc);

/// Twice the median nearest-neighbour spacing of the target set.
double default_epsilon(const PointSet& target);

/// For every source row the target with the lowest cost.
Correspondences best_cost_correspondences(const CostMatrix& cost);

}  // namespace mcac
