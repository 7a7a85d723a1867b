#include "headpose/normalization.hpp"

#include <algorithm>
#include <cmath>

namespace headpose {

namespace {

// Deviations shorter than this times the point spread count as zero length.
constexpr double kRelativeTol = 1e-12;

template <typename Set, typename Normalized>
Normalized normalize_impl(const Set& points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::InvalidInput,
                "normalization needs at least two points");
  }
  Normalized out;
  out.centroid = centroid(points);
  double spread = 0.0;
  for (const auto& p : points) {
    spread = std::max(spread, (p.position - out.centroid).norm());
  }
  for (const auto& p : points) {
    const auto deviation = p.position - out.centroid;
    const double len = deviation.norm();
    if (!(len > kRelativeTol * spread) || !(len > 0)) {
      throw Error(ErrorKind::DegenerateInput,
                  "point '" + p.label + "' coincides with the centroid");
    }
    out.directions.push_back(deviation / len);
  }
  return out;
}

}  // namespace

Vec2 centroid(const FeaturePointSet2D& points) {
  if (points.empty()) {
    throw Error(ErrorKind::InvalidInput, "centroid of an empty point set");
  }
  Vec2 sum = Vec2::Zero();
  for (const auto& p : points) sum += p.position;
  return sum / static_cast<double>(points.size());
}

Vec3 centroid(const FeaturePointSet3D& points) {
  if (points.empty()) {
    throw Error(ErrorKind::InvalidInput, "centroid of an empty point set");
  }
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p.position;
  return sum / static_cast<double>(points.size());
}

NormalizedSet2D normalize(const FeaturePointSet2D& points) {
  return normalize_impl<FeaturePointSet2D, NormalizedSet2D>(points);
}

NormalizedSet3D normalize(const FeaturePointSet3D& points) {
  return normalize_impl<FeaturePointSet3D, NormalizedSet3D>(points);
}

double projection_ratio(const RotationMatrix& r, const Vec3& deviation) {
  const double len = deviation.norm();
  if (!(len > 0)) {
    throw Error(ErrorKind::InvalidInput, "projection ratio of a zero vector");
  }
  return (r.projection_rows() * deviation).norm() / len;
}

bool nearly_coplanar(std::span<const Vec3, 4> points) {
  const Vec3 a = points[1] - points[0];
  const Vec3 b = points[2] - points[0];
  const Vec3 c = points[3] - points[0];
  const double volume = std::abs(a.cross(b).dot(c));
  double extent = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      extent = std::max(extent, (points[i] - points[j]).norm());
    }
  }
  return !(volume > 1e-9 * extent * extent * extent);
}

}  // namespace headpose
