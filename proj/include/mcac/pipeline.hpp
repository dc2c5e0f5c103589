/**
 * @file pipeline.hpp
 * @brief Alignment followed by constrained contour refinement, plus batch drivers.
 */
#pragma once

#include <mcac/active_contour.hpp>
#include <mcac/matching.hpp>
#include <mcac/optimizer.hpp>
#include <mcac/shape_model.hpp>
#include <mcac/synth.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace mcac {

struct PipelineOptions {
    HeavisideParams heaviside{};
    /// tau == 0 derives tau = tau_ratio * E_init and the default band.
    OptimizerConfig optimizer{};
    double tau_ratio = 0.9;
    double sigma_g = 1.5;
    /// 0 selects default_epsilon(target).
    double epsilon = 0.0;
    bool refine_pose = true;
    RefineConfig refine{};
};

struct SegmentationInput {
    RbfShapeModel model;
    PointSet source;
    PointSet target;
    /// Empty means zero cost for every pair.
    CostMatrix cost;
    Correspondences corr;
    ScalarField2D image;
    std::optional<SilhouetteMask> truth;
    std::optional<std::vector<ContourPolyline>> truth_contour;
};

struct SegmentationResult {
    AffineMap initial_pose;
    AffineMap final_pose;
    std::vector<ContourPolyline> initial_contour;
    std::vector<ContourPolyline> final_contour;
    SilhouetteMask initial_mask;
    SilhouetteMask final_mask;
    std::optional<double> initial_jaccard;
    std::optional<double> final_jaccard;
    std::optional<double> nhd_initial;
    std::optional<double> nhd_final;
    OptimizerConfig optimizer;
    std::vector<McacState> trajectory;
};

SegmentationResult segment_instance(const SegmentationInput& in, const PipelineOptions& opt = {});

/// File-based configuration. Empty optional paths are skipped.
struct PipelineConfig {
    std::filesystem::path image;
    std::filesystem::path model;
    std::filesystem::path source_points;
    std::filesystem::path target_points;
    std::filesystem::path correspondences;
    std::filesystem::path cost;
    std::filesystem::path truth_mask;
    PipelineOptions options{};
    std::uint64_t seed = 0;
};

/// Throws ConfigError naming the first missing file.
SegmentationResult segment(const PipelineConfig& cfg);

/// Nonzero pixels are foreground.
SilhouetteMask mask_from_image(const ScalarField2D& image);

SegmentationInput input_from_synthetic(const RbfShapeModel& model, const synth::SynthInstance& inst);

struct BatchRow {
    int instance = 0;
    double initial_jaccard = 0.0;
    double final_jaccard = 0.0;
    double nhd_initial = 0.0;
    double nhd_final = 0.0;
};

/// Instances run in order; a failing instance propagates its error.
std::vector<BatchRow> run_batch(const RbfShapeModel& model, const std::vector<synth::SynthInstance>& suite,
                                const PipelineOptions& opt = {});
/// "instance,initial_jaccard,final_jaccard,nhd_initial,nhd_final".
void write_batch_csv(const std::filesystem::path& path, const std::vector<BatchRow>& rows);

struct InvarianceOptions {
    int width = 128;
    int height = 128;
    double det_lo = 0.5;
    double det_hi = 2.0;
    double boundary_margin = 3.0;
};

struct InvarianceRow {
    int trial = 0;
    double nhd_invariant = 0.0;
    double nhd_noninvariant = 0.0;
};

/// Random linear maps about the raster centre (no extra translation). For each,
/// both representations are rasterized and their zero sets compared with the
/// explicitly transformed ground truth (given in the model frame). A
/// representation without any zero crossing scores 1.
std::vector<InvarianceRow> invariance_report(const RbfShapeModel& model, const ContourPolyline& truth_model_frame,
                                             int trials, std::uint64_t seed, const InvarianceOptions& opt = {});
/// "trial,nhd_invariant,nhd_noninvariant".
void write_invariance_csv(const std::filesystem::path& path, const std::vector<InvarianceRow>& rows);

}  // namespace mcac
