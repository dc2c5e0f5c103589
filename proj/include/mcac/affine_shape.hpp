/**
 * @file affine_shape.hpp
 * @brief Affine-posed shape decision functions and their implicit contours.
 *
 * A PosedShape places a trained model in an image through z = A p + b.
 * The affine-invariant evaluation measures each kernel in the model frame,
 *
 *   phi_S(z) = sum_i alpha_i exp(-|A^-1 (z - b) - p_i|^2 / sigma^2) + beta,
 *
 * so the zero set of phi_S is exactly the image of the model contour under
 * the pose. The non-invariant evaluation only moves the kernel centers and
 * keeps the isotropic metric, which distorts the contour for non-orthogonal A.
 *
 * Parameter derivatives treat (A^-1, b) as the independent variables:
 *
 *   d phi_S / d A^-1 = -(2/sigma^2) sum_i w_i v_i (z - b)^T
 *   d phi_S / d b    = +(2/sigma^2) sum_i w_i A^-T v_i
 *
 * with v_i = A^-1 (z - b) - p_i and w_i = alpha_i exp(-|v_i|^2 / sigma^2).
 * Both were checked against central finite differences of phi_S.
 */
#pragma once

#include <mcac/core.hpp>
#include <mcac/shape_model.hpp>

#include <filesystem>
#include <vector>

namespace mcac {

struct PosedShape {
    RbfShapeModel model;
    AffineMap pose;
};

enum class Representation {
    Invariant,     ///< kernels measured through A^-1
    NonInvariant,  ///< kernel centers moved, metric unchanged
};

struct ContourPolyline {
    std::vector<Point2> points;
    bool closed = false;
};

double eval_phi_s(const PosedShape& s, const Point2& z);
double eval_phi_noninvariant(const PosedShape& s, const Point2& z);
double eval_posed(const PosedShape& s, const Point2& z, Representation rep);

/// Spatial gradient of phi_S.
Vec2 grad_z_phi_s(const PosedShape& s, const Point2& z);

Mat2 d_phi_s_d_ainv(const PosedShape& s, const Point2& z);
Vec2 d_phi_s_d_b(const PosedShape& s, const Point2& z);

/// Evaluates the posed model at every lattice point of a width x height grid.
ScalarField2D rasterize(const PosedShape& s, int width, int height,
                        Representation rep = Representation::Invariant);

/// Marching squares at level 0 with linear interpolation along cell edges.
/// Lattice values >= 0 count as positive; saddle cells are resolved by the
/// sign of the cell-center average. Throws EmptyContour when no cell edge
/// changes sign.
std::vector<ContourPolyline> extract_contour(const ScalarField2D& f);

/// Newton projection of every vertex onto the exact zero set of phi_S.
ContourPolyline snap_to_zero_set(const PosedShape& s, const ContourPolyline& c, int max_iterations = 50);

/// max over reference vertices z_c of |phi(A z_c + b)| for the chosen representation.
/// The reference contour lives in the model frame (extracted at identity pose).
double invariance_residual(const PosedShape& s, const ContourPolyline& reference_contour,
                           Representation rep = Representation::Invariant);

ContourPolyline transformed(const ContourPolyline& c, const AffineMap& m);

std::size_t vertex_count(const std::vector<ContourPolyline>& contours);
std::vector<Point2> all_vertices(const std::vector<ContourPolyline>& contours);

/// CSV with header "x,y,polyline_id,closed".
void write_contours_csv(const std::filesystem::path& path, const std::vector<ContourPolyline>& contours);

}  // namespace mcac
