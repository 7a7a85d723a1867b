#pragma once

#include <array>

#include "headpose/geometry.hpp"

namespace headpose {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

// Point in sphere-centered coordinates. `azimuth` is measured in the x-y
// plane from +x toward +y; `polar` is measured from the +z axis, so
//   x = center.x + radius * sin(polar) * cos(azimuth)
//   y = center.y + radius * sin(polar) * sin(azimuth)
//   z = center.z + radius * cos(polar).
// On the poles the azimuth is fixed at 0.
struct SphericalPoint {
  double radius = 0.0;
  double azimuth = 0.0;  // radians
  double polar = 0.0;    // radians
};

// Angular displacement on the sphere surface; the radius never changes.
struct MorphOffsets {
  double azimuth = 0.0;
  double polar = 0.0;
};

enum class ConstraintMode {
  Symmetric,  // 4 free scalars, mirror symmetry across the vertical plane
  Free,       // 8 free scalars, every offset independent
};

constexpr int free_param_count(ConstraintMode mode) {
  return mode == ConstraintMode::Symmetric ? 4 : 8;
}

// Per-point offsets in canonical point order: chin, nose tip, left canthus,
// right canthus.
struct MorphParams {
  std::array<MorphOffsets, 4> offsets{};
  ConstraintMode mode = ConstraintMode::Symmetric;
};

using FreeParams = Eigen::VectorXd;

// Maps the packed optimizer vector to per-point offsets.
//
// Symmetric, params = (a, b, c, d):
//   chin          (azimuth 0,  polar a)
//   nose tip      (azimuth 0,  polar b)
//   left canthus  (azimuth d,  polar c)
//   right canthus (azimuth -d, polar c)
// The chin and nose stay on their meridian, the canthi share an elevation
// change and swing by opposite azimuths, preserving facial symmetry.
//
// Free, params = (az1, pol1, az2, pol2, az3, pol3, az4, pol4) in the same
// point order.
MorphParams expand_params(const FreeParams& params, ConstraintMode mode);

// Sphere through four points. Throws a degenerate-input Error when they are
// nearly coplanar (the system has no bounded solution there).
Sphere fit_sphere(const std::array<Vec3, 4>& points);

// Spherical coordinates about sphere.center; the stored radius is the actual
// center distance of `point`, whether or not it lies on the sphere surface.
// Throws a degenerate-input Error when point coincides with the center.
SphericalPoint to_spherical(const Vec3& point, const Sphere& sphere);

Vec3 to_rectangular(const SphericalPoint& point, const Sphere& sphere);

// to_rectangular at (azimuth + delta.azimuth, polar + delta.polar), radius
// unchanged.
Vec3 apply_morph(const SphericalPoint& base, const MorphOffsets& delta,
                 const Sphere& sphere);

// Derivative of apply_morph with respect to delta, evaluated at delta.
// Columns: d/d(azimuth), d/d(polar).
Eigen::Matrix<double, 3, 2> morph_jacobian(const SphericalPoint& base,
                                           const MorphOffsets& delta);

}  // namespace headpose
