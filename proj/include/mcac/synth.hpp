/**
 * @file synth.hpp
 * @brief Synthetic templates, affine test suites and noise suites.
 *
 * Rendering convention: foreground 200, background 60 (8-bit), blurred with a
 * 1 px Gaussian. Every generator draws from a single std::mt19937_64 seeded
 * by the caller, so a seed reproduces a dataset exactly.
 */
#pragma once

#include <mcac/affine_shape.hpp>
#include <mcac/matching.hpp>
#include <mcac/shape_model.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mcac::synth {

/// Closed outline in the template frame (roughly centred on the origin).
struct Template {
    std::string name;
    std::vector<Point2> outline;
};

Template leaf_template();
Template ellipse_template();
Template bean_template();
Template template_by_name(const std::string& name);

bool point_in_polygon(const std::vector<Point2>& polygon, const Point2& z);

/// Lattice points inside the outline mapped by `pose`.
SilhouetteMask polygon_mask(const std::vector<Point2>& outline, const AffineMap& pose, int width, int height);

/// Hexagonal grid of mask pixels at least `margin` pixels from the background.
PointSet interior_grid(const SilhouetteMask& mask, double spacing, double margin);

struct RenderOptions {
    double foreground = 200.0;
    double background = 60.0;
    double edge_blur = 1.0;
};
ScalarField2D render(const SilhouetteMask& mask, const RenderOptions& opt = {});

struct TemplateOptions {
    int width = 128;
    int height = 128;
    double center_spacing = 16.0;
    double center_margin = 1.0;
    /// Candidate bandwidths for select_sigma; empty means the 191-value default grid.
    std::vector<double> sigma_candidates;
    HeavisideParams heaviside{};
    TrainConfig train{.max_iterations = 6000};
};

/// Template rasterized, centers placed, bandwidth selected and model trained.
/// The returned model and outline live in the model frame, whose origin is the
/// centroid of the centers; `origin` is that point in template pixels.
struct TrainedTemplate {
    Template shape;
    RbfShapeModel model;
    SilhouetteMask mask;
    Vec2 origin;
    double fit_score = 0.0;
    std::vector<double> error_log;
};

TrainedTemplate train_template(const Template& t, const TemplateOptions& opt = {});

/// Zero set of the trained model at identity pose, snapped onto the exact
/// zero set, in the model frame. The longest polyline when there are several.
ContourPolyline reference_contour(const TrainedTemplate& t);

/// Random linear map with det in [det_lo, det_hi] and singular values in [sv_lo, sv_hi].
Mat2 random_linear(std::mt19937_64& rng, double det_lo, double det_hi, double sv_lo = 0.7, double sv_hi = 1.45);

struct SuiteOptions {
    int width = 128;
    int height = 128;
    double det_lo = 0.5;
    double det_hi = 2.0;
    double max_translation = 6.0;
    double boundary_margin = 4.0;
    /// Localization error of target feature points (pixels, per axis).
    double point_jitter = 1.5;
    /// Systematic matching bias: targets follow A (I + D) p + b + d with
    /// D_kl ~ N(0, pose_noise_a^2) and d_k ~ N(0, pose_noise_b^2).
    double pose_noise_a = 0.06;
    double pose_noise_b = 3.0;
    /// Template feature points sampled along the model contour (the RBF centers are added too).
    int contour_points = 16;
    int distractors = 8;
    int descriptor_dim = 16;
    double descriptor_noise = 0.25;
    bool force_identity = false;
    RenderOptions render{};
};

/// The rendered silhouette is the trained model's own silhouette under the
/// pose, so the true pose reproduces the ground truth exactly.
struct SynthInstance {
    AffineMap pose;
    ScalarField2D image;
    SilhouetteMask truth;
    ContourPolyline truth_contour;
    PointSet source;
    PointSet target;
    CostMatrix cost;
    Correspondences corr;
};

std::vector<SynthInstance> synth_affine_suite(const TrainedTemplate& t, int count, const SuiteOptions& opt,
                                              std::uint64_t seed);

struct NoisyImage {
    double sigma = 0.0;
    int index = 0;
    ScalarField2D image;
};

/// Additive zero-mean Gaussian noise clipped to [0, 255].
ScalarField2D add_noise(const ScalarField2D& base, double sigma, std::mt19937_64& rng, bool clip = true);

std::vector<NoisyImage> synth_noise_suite(const ScalarField2D& base, const std::vector<double>& sigmas, int per_level,
                                          std::uint64_t seed);

/// {1, 2, ..., 20}.
std::vector<double> default_noise_levels();

}  // namespace mcac::synth
