#pragma once

#include <mcac/affine_shape.hpp>
#include <mcac/shape_model.hpp>

#include <vector>

namespace mcac {

/// |A ∩ B| / |A ∪ B| over pixels equal to 1; 1 when both masks are empty.
double jaccard(const SilhouetteMask& a, const SilhouetteMask& b);

/// Hausdorff distance between the vertex sets divided by the largest pairwise
/// distance within their union. Throws EmptyContour if either set is empty.
double normalized_hausdorff(const std::vector<Point2>& a, const std::vector<Point2>& b);
double normalized_hausdorff(const ContourPolyline& a, const ContourPolyline& b);
double normalized_hausdorff(const std::vector<ContourPolyline>& a, const std::vector<ContourPolyline>& b);

/// 1 where f >= 0, else 0.
SilhouetteMask mask_from_field(const ScalarField2D& f);

/// Foreground (value > threshold) as a {0,1} mask.
SilhouetteMask binarize(const ScalarField2D& f, double threshold);

}  // namespace mcac
