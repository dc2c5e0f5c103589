/**
 * @file active_contour.hpp
 * @brief Geodesic active contour energy on the implicit contour of a posed shape.
 *
 * J(C) = integral over C of g ds, discretized with vertex-centred trapezoidal
 * weights. The contour is always regenerated from the posed shape; only the
 * six pose parameters move.
 *
 * Sign conventions: N = grad(phi) / |grad(phi)| and kappa = div N. With these,
 * the first variation of J under a normal displacement psi N is
 * integral of (<grad g, N> + g kappa) psi ds. The classical expression
 * <grad g, N> N - g kappa N assumes the opposite curvature sign; it is
 * provided as gac_functional_gradient for reference, while the pose gradient
 * uses gac_normal_speed.
 */
#pragma once

#include <mcac/affine_shape.hpp>
#include <mcac/core.hpp>

#include <vector>

namespace mcac {

struct EdgeIndicatorField {
    ScalarField2D g;
    GradientField grad_g;
};

/// Separable Gaussian blur with symmetric (edge-repeating) reflection. sigma = 0 copies the input.
ScalarField2D gaussian_blur(const ScalarField2D& image, double sigma);

/// g = 1 / (1 + |grad(G_sigma * I)|^2).
EdgeIndicatorField edge_indicator(const ScalarField2D& image, double sigma_g = 1.5);

struct ContourGeometry {
    std::vector<Point2> position;
    std::vector<Vec2> tangent;
    std::vector<Vec2> normal;
    std::vector<double> curvature;
    std::vector<double> ds;
    bool closed = false;

    std::size_t size() const { return position.size(); }
};

/// Trapezoidal arc-length weight per vertex: half the sum of the adjacent segment lengths.
std::vector<double> arc_weights(const ContourPolyline& c);

/// Curvature div(grad f / |grad f|) at a lattice point by central differences; 0 where |grad f| vanishes.
double lattice_curvature(const ScalarField2D& f, int x, int y);

/// Throws VanishingGradient when |grad phi| < 1e-8 at a vertex.
ContourGeometry contour_geometry(const ContourPolyline& c, const ScalarField2D& phi_field);

double gac_energy(const ContourPolyline& c, const EdgeIndicatorField& e);
double gac_energy(const std::vector<ContourPolyline>& contours, const EdgeIndicatorField& e);

/// Per-vertex <grad g, N> N - g kappa N.
std::vector<Vec2> gac_functional_gradient(const ContourGeometry& geom, const EdgeIndicatorField& e);

/// Per-vertex normal component of the first variation of J: <grad g, N> + g kappa.
std::vector<double> gac_normal_speed(const ContourGeometry& geom, const EdgeIndicatorField& e);

/// Gradient of J over the inverse pose chart (A^-1, b).
struct PoseGradient {
    Mat2 d_ainv = Mat2::zero();
    Vec2 d_b{};

    PoseGradient& operator+=(const PoseGradient& o) {
        d_ainv += o.d_ainv;
        d_b += o.d_b;
        return *this;
    }
};

/// Continuum form: -sum_v (speed_v ds_v / <N_v, grad phi_S(v)>) * (d phi_S/d A^-1, d phi_S/d b)
/// with speed = <grad g, N> + g kappa. Accurate while g varies slowly on the pixel scale.
PoseGradient grad_J_pose_continuum(const PosedShape& s, const ContourPolyline& c, const ContourGeometry& geom,
                                   const EdgeIndicatorField& e);

/// Same sum with each vertex term taken from the discrete energy: the vertex slides along its
/// marching-squares cell edge, so its weight is dJ/dv along that edge over the edge slope of
/// phi_S, and d phi_S is interpolated between the edge's lattice points like the vertex itself.
/// This is the exact derivative of gac_energy(extract_contour(rasterize(s))), including sharp
/// edge valleys where the continuum speed is badly resolved.
PoseGradient grad_J_pose(const PosedShape& s, const ContourPolyline& c, const EdgeIndicatorField& e);

/// Raster, contours and energy of a posed shape against an edge field.
struct ContourEvaluation {
    ScalarField2D phi;
    std::vector<ContourPolyline> contours;
    double energy = 0.0;
};

ContourEvaluation evaluate_contour(const PosedShape& s, const EdgeIndicatorField& e);

/// grad_J_pose summed over every polyline of an evaluation.
PoseGradient grad_J_pose(const PosedShape& s, const ContourEvaluation& eval, const EdgeIndicatorField& e);

}  // namespace mcac
