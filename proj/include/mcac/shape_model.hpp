/**
 * @file shape_model.hpp
 * @brief Gaussian RBF shape decision function trained against a binary silhouette.
 *
 * The decision function is phi(z) = sum_i alpha_i exp(-|z - p_i|^2 / sigma^2) + beta;
 * its zero level set is the shape contour and phi > 0 marks the interior.
 * Training and fitting evaluate the model at mask lattice points, i.e. in the
 * mask's pixel frame.
 */
#pragma once

#include <mcac/core.hpp>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mcac {

struct RbfShapeModel {
    PointSet centers;
    std::vector<double> weights;
    double bias = 0.0;
    double sigma = 1.0;

    std::size_t size() const { return centers.size(); }
    /// Throws InvalidArgument if the invariants do not hold.
    void validate() const;
    bool operator==(const RbfShapeModel&) const = default;
};

/// Smoothed Heaviside H(x) = 1/2 (1 + (2/pi) atan(x / epsilon_h)).
struct HeavisideParams {
    double epsilon_h = 1.0;

    /// Throws InvalidArgument unless epsilon_h is finite and > 0.
    void validate() const;
};

double heaviside(double x, const HeavisideParams& h);
double heaviside_derivative(double x, const HeavisideParams& h);

/// Binary {0,1} field with at least one pixel of each value.
using SilhouetteMask = ScalarField2D;
void validate_mask(const SilhouetteMask& mask);
std::size_t foreground_count(const SilhouetteMask& mask);

double eval_decision(const RbfShapeModel& m, const Point2& z);
double eval_silhouette(const RbfShapeModel& m, const HeavisideParams& h, const Point2& z);

/// Sum over lattice points of (H_o - H_e)^2.
double fit_error(const RbfShapeModel& m, const SilhouetteMask& mask, const HeavisideParams& h);

/// 1 - fit_error / foreground pixel count.
double fit_score(const RbfShapeModel& m, const SilhouetteMask& mask, const HeavisideParams& h);

struct FitGradient {
    std::vector<double> d_weights;
    double d_bias = 0.0;
};

/// Analytic gradient of fit_error with respect to (alpha, beta).
FitGradient fit_error_gradient(const RbfShapeModel& m, const SilhouetteMask& mask, const HeavisideParams& h);

struct TrainConfig {
    double initial_step = 1e-3;
    int max_iterations = 3000;
    /// Stop once an accepted step lowers the error by less than this fraction.
    double relative_tolerance = 1e-9;
    /// Gradient norm treated as stationary.
    double gradient_tolerance = 1e-10;
    double armijo = 1e-4;
    int max_halvings = 50;
};

struct TrainResult {
    RbfShapeModel model;
    /// fit_error of every accepted iterate, starting with the initial model.
    std::vector<double> error_log;
    int iterations = 0;
};

TrainResult train_logged(const RbfShapeModel& m0, const SilhouetteMask& mask, const HeavisideParams& h,
                         const TrainConfig& cfg);
RbfShapeModel train(const RbfShapeModel& m0, const SilhouetteMask& mask, const HeavisideParams& h,
                    const TrainConfig& cfg);

/// Fixed starting point used by training and bandwidth selection: alpha_i = 1/N, beta = -0.25.
RbfShapeModel initial_model(const PointSet& centers, double sigma);

/// {1, 1.1, ..., 20}: 191 candidates.
std::vector<double> default_sigma_grid();

/// Fit score of the fixed initial model for every candidate bandwidth.
std::vector<double> sigma_scores(const SilhouetteMask& mask, const PointSet& centers, const HeavisideParams& h,
                                 const std::vector<double>& candidates);

/// Candidate with the highest fixed-initialization fit score; ties go to the smaller sigma.
double select_sigma(const SilhouetteMask& mask, const PointSet& centers, const HeavisideParams& h,
                    const std::vector<double>& candidates);

/// Same model with every center shifted by `offset`.
RbfShapeModel translated(const RbfShapeModel& m, const Vec2& offset);

/// Text format: "MCAC-SHAPE 1", N, sigma, beta, then N lines "x y alpha".
void write_model(std::ostream& out, const RbfShapeModel& m);
RbfShapeModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const RbfShapeModel& m);
RbfShapeModel load_model(const std::filesystem::path& path);

}  // namespace mcac
