#include "headpose/sphere.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

#include "headpose/normalization.hpp"

namespace headpose {

MorphParams expand_params(const FreeParams& params, ConstraintMode mode) {
  if (params.size() != free_param_count(mode)) {
    throw Error(ErrorKind::InvalidInput,
                "parameter vector has wrong length for the constraint mode");
  }
  MorphParams out;
  out.mode = mode;
  if (mode == ConstraintMode::Symmetric) {
    out.offsets[0] = {0.0, params(0)};
    out.offsets[1] = {0.0, params(1)};
    out.offsets[2] = {params(3), params(2)};
    out.offsets[3] = {-params(3), params(2)};
  } else {
    for (int i = 0; i < 4; ++i) {
      out.offsets[i] = {params(2 * i), params(2 * i + 1)};
    }
  }
  return out;
}

Sphere fit_sphere(const std::array<Vec3, 4>& points) {
  if (nearly_coplanar(points)) {
    throw Error(ErrorKind::DegenerateInput,
                "the four points are coplanar; no unique sphere through them");
  }
  // Subtracting the first point's equation from the others leaves a linear
  // system for the center: (p_i - p_1) . c = (|p_i|^2 - |p_1|^2) / 2.
  Mat3 a;
  Vec3 b;
  for (int i = 0; i < 3; ++i) {
    a.row(i) = (points[i + 1] - points[0]).transpose();
    b(i) = 0.5 * (points[i + 1].squaredNorm() - points[0].squaredNorm());
  }
  const Vec3 center = a.partialPivLu().solve(b);
  if (!center.allFinite()) {
    throw Error(ErrorKind::NumericalFailure, "sphere fit did not solve");
  }
  return Sphere{center, (points[0] - center).norm()};
}

SphericalPoint to_spherical(const Vec3& point, const Sphere& sphere) {
  const Vec3 d = point - sphere.center;
  const double r = d.norm();
  if (!(r > 0)) {
    throw Error(ErrorKind::DegenerateInput,
                "point coincides with the sphere center");
  }
  SphericalPoint out;
  out.radius = r;
  out.polar = std::acos(std::clamp(d.z() / r, -1.0, 1.0));
  out.azimuth = (d.x() == 0.0 && d.y() == 0.0) ? 0.0 : std::atan2(d.y(), d.x());
  return out;
}

Vec3 to_rectangular(const SphericalPoint& point, const Sphere& sphere) {
  const double sp = std::sin(point.polar);
  const double cp = std::cos(point.polar);
  return sphere.center + point.radius * Vec3(sp * std::cos(point.azimuth),
                                             sp * std::sin(point.azimuth), cp);
}

Vec3 apply_morph(const SphericalPoint& base, const MorphOffsets& delta,
                 const Sphere& sphere) {
  SphericalPoint moved = base;
  moved.azimuth += delta.azimuth;
  moved.polar += delta.polar;
  return to_rectangular(moved, sphere);
}

Eigen::Matrix<double, 3, 2> morph_jacobian(const SphericalPoint& base,
                                           const MorphOffsets& delta) {
  const double az = base.azimuth + delta.azimuth;
  const double pol = base.polar + delta.polar;
  const double r = base.radius;
  const double sa = std::sin(az);
  const double ca = std::cos(az);
  const double sp = std::sin(pol);
  const double cp = std::cos(pol);
  Eigen::Matrix<double, 3, 2> j;
  j << -r * sp * sa, r * cp * ca,  //
      r * sp * ca, r * cp * sa,    //
      0.0, -r * sp;
  return j;
}

}  // namespace headpose
