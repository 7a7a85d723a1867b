#pragma once

#include <span>
#include <string>
#include <vector>

#include "headpose/geometry.hpp"

namespace headpose {

// A labeled image point ("nose_tip", pixel coordinates).
struct FeaturePoint2 {
  std::string label;
  Vec2 position = Vec2::Zero();
};

// A labeled model point in arbitrary rigid units.
struct FeaturePoint3 {
  std::string label;
  Vec3 position = Vec3::Zero();
};

using FeaturePointSet2D = std::vector<FeaturePoint2>;
using FeaturePointSet3D = std::vector<FeaturePoint3>;

// Unit deviation vectors about the centroid, in the input order. The
// directions carry all the shape information; scale and translation are gone.
struct NormalizedSet2D {
  std::vector<Vec2> directions;
  Vec2 centroid = Vec2::Zero();
};

struct NormalizedSet3D {
  std::vector<Vec3> directions;
  Vec3 centroid = Vec3::Zero();
};

Vec2 centroid(const FeaturePointSet2D& points);
Vec3 centroid(const FeaturePointSet3D& points);

// Subtracts the centroid and scales each deviation to unit length. Throws a
// degenerate-input Error when any point coincides with the centroid (its
// direction would be undefined). Requires at least two points.
NormalizedSet2D normalize(const FeaturePointSet2D& points);
NormalizedSet3D normalize(const FeaturePointSet3D& points);

// |[r1; r2] * v| / |v|: how much of v survives the projection onto the plane
// spanned by the first two rotation rows. 1 when v lies in that span, 0 when
// v is orthogonal to it, strictly between otherwise.
double projection_ratio(const RotationMatrix& r, const Vec3& deviation);

// True when the four points lie within numerical tolerance of a common
// plane (scale-invariant test on the parallelepiped volume).
bool nearly_coplanar(std::span<const Vec3, 4> points);

}  // namespace headpose
