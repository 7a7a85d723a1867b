#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>  // cross products

#include "headpose/error.hpp"

namespace headpose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Pitch, yaw, roll about the camera-frame X, Y, Z axes. Stored in radians;
// conversions to and from degrees are provided because file formats and user
// interfaces speak degrees.
class EulerAngles {
 public:
  EulerAngles() = default;

  static EulerAngles from_radians(double pitch, double yaw, double roll);
  static EulerAngles from_degrees(double pitch, double yaw, double roll);

  double pitch_rad() const { return pitch_; }
  double yaw_rad() const { return yaw_; }
  double roll_rad() const { return roll_; }

  double pitch_deg() const { return rad_to_deg(pitch_); }
  double yaw_deg() const { return rad_to_deg(yaw_); }
  double roll_deg() const { return rad_to_deg(roll_); }

 private:
  double pitch_ = 0.0;  // radians
  double yaw_ = 0.0;
  double roll_ = 0.0;
};

// Elementary rotations about the X, Y and Z axes.
Mat3 rotation_x(double angle_rad);
Mat3 rotation_y(double angle_rad);
Mat3 rotation_z(double angle_rad);

// A 3x3 rotation: orthonormal rows, third row equal to the cross product of
// the first two (determinant +1). Construction always validates, so holding a
// RotationMatrix is proof the invariants hold.
class RotationMatrix {
 public:
  static RotationMatrix identity();

  // Validates orthonormality and handedness to 1e-10 and throws an
  // invalid-input Error otherwise.
  static RotationMatrix from_matrix(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Vec3 row(int i) const { return m_.row(i).transpose(); }

  // The first two rows, the block that maps a point to the image plane under
  // weak perspective.
  Mat23 projection_rows() const { return m_.topRows<2>(); }

  Vec3 apply(const Vec3& p) const { return m_ * p; }
  RotationMatrix transposed() const;

 private:
  explicit RotationMatrix(const Mat3& m) : m_(m) {}

  Mat3 m_;

  friend RotationMatrix compose_rotation(const EulerAngles& angles);
  friend RotationMatrix complete_rotation(const Vec3& r1, const Vec3& r2);
};

// Closed-form rotation for the pitch/yaw/roll convention used throughout:
// the product rotation_z(roll) * rotation_y(yaw) * rotation_x(pitch),
// written out entry by entry.
RotationMatrix compose_rotation(const EulerAngles& angles);

// Inverse of compose_rotation. Throws a degenerate-decomposition Error within
// one microdegree of yaw = +/-90 degrees, where pitch and roll cease to be
// separable.
EulerAngles euler_from_rotation(const RotationMatrix& r);

// Image-plane map (u, v) = scale * [r1; r2] * p + scale * translation.
// `scale` folds the focal ratio and the projective depth into one factor.
struct WeakPerspectiveCamera {
  double scale = 1.0;
  Vec2 translation = Vec2::Zero();  // applied before scaling
};

// Pinhole map: x = R * p + translation, then u = (alpha * x + gamma * y) / z
// + principal.x, v = beta * y / z + principal.y.
struct PinholeCamera {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
  Vec2 principal = Vec2::Zero();
  Vec3 translation = Vec3::Zero();
};

Vec2 project_weak(const WeakPerspectiveCamera& camera, const RotationMatrix& r,
                  const Vec3& point);
Vec2 project_full(const PinholeCamera& camera, const RotationMatrix& r,
                  const Vec3& point);

// Nearest matrix with orthonormal rows in the Frobenius sense: replaces the
// singular values of m by ones. Throws a degenerate-decomposition Error when
// m is numerically rank deficient.
Mat23 nearest_row_orthonormal(const Mat23& m);

// Builds a full rotation from two rows that are assumed close to orthonormal:
// snaps them with nearest_row_orthonormal, then completes the third row by
// cross product.
RotationMatrix complete_rotation(const Vec3& r1, const Vec3& r2);

}  // namespace headpose
