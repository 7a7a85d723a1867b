#include "headpose/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace headpose {

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::InvalidInput,
                std::string("non-finite ") + name + " angle");
  }
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
      return "invalid-input";
    case ErrorKind::DegenerateInput:
      return "degenerate-input";
    case ErrorKind::DegenerateGeometry:
      return "degenerate-geometry";
    case ErrorKind::DegenerateDecomposition:
      return "degenerate-decomposition";
    case ErrorKind::BehindCamera:
      return "behind-camera";
    case ErrorKind::NumericalFailure:
      return "numerical-failure";
    case ErrorKind::ParseError:
      return "parse-error";
  }
  return "unknown";
}

EulerAngles EulerAngles::from_radians(double pitch, double yaw, double roll) {
  require_finite(pitch, "pitch");
  require_finite(yaw, "yaw");
  require_finite(roll, "roll");
  EulerAngles a;
  a.pitch_ = pitch;
  a.yaw_ = yaw;
  a.roll_ = roll;
  return a;
}

EulerAngles EulerAngles::from_degrees(double pitch, double yaw, double roll) {
  return from_radians(deg_to_rad(pitch), deg_to_rad(yaw), deg_to_rad(roll));
}

Mat3 rotation_x(double angle_rad) {
  require_finite(angle_rad, "rotation");
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Mat3 m;
  m << 1, 0, 0,  //
      0, c, -s,  //
      0, s, c;
  return m;
}

Mat3 rotation_y(double angle_rad) {
  require_finite(angle_rad, "rotation");
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Mat3 m;
  m << c, 0, s,  //
      0, 1, 0,   //
      -s, 0, c;
  return m;
}

Mat3 rotation_z(double angle_rad) {
  require_finite(angle_rad, "rotation");
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Mat3 m;
  m << c, -s, 0,  //
      s, c, 0,    //
      0, 0, 1;
  return m;
}

RotationMatrix RotationMatrix::identity() {
  return RotationMatrix(Mat3::Identity());
}

RotationMatrix RotationMatrix::from_matrix(const Mat3& m) {
  constexpr double kTol = 1e-10;
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "rotation matrix has non-finite entries");
  }
  const Mat3 gram = m * m.transpose();
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > kTol) {
    throw Error(ErrorKind::InvalidInput, "rotation matrix rows not orthonormal");
  }
  const Vec3 cross = m.row(0).transpose().cross(m.row(1).transpose());
  if ((m.row(2).transpose() - cross).cwiseAbs().maxCoeff() > kTol) {
    throw Error(ErrorKind::InvalidInput,
                "rotation matrix is not right-handed (det != +1)");
  }
  return RotationMatrix(m);
}

RotationMatrix RotationMatrix::transposed() const {
  return RotationMatrix(m_.transpose());
}

RotationMatrix compose_rotation(const EulerAngles& angles) {
  const double cx = std::cos(angles.pitch_rad());
  const double sx = std::sin(angles.pitch_rad());
  const double cy = std::cos(angles.yaw_rad());
  const double sy = std::sin(angles.yaw_rad());
  const double cz = std::cos(angles.roll_rad());
  const double sz = std::sin(angles.roll_rad());
  Mat3 m;
  m << cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,  //
      sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,   //
      -sy, cy * sx, cy * cx;
  return RotationMatrix(m);
}

EulerAngles euler_from_rotation(const RotationMatrix& r) {
  const Mat3& m = r.matrix();
  const double r31 = std::clamp(m(2, 0), -1.0, 1.0);
  const double cy = std::sqrt(m(2, 1) * m(2, 1) + m(2, 2) * m(2, 2));
  const double yaw = std::atan2(-r31, cy);
  if (90.0 - std::abs(rad_to_deg(yaw)) <= 1e-6) {
    throw Error(ErrorKind::DegenerateDecomposition,
                "yaw within one microdegree of +/-90; pitch and roll are not "
                "separable");
  }
  const double pitch = std::atan2(m(2, 1), m(2, 2));
  const double roll = std::atan2(m(1, 0), m(0, 0));
  return EulerAngles::from_radians(pitch, yaw, roll);
}

Vec2 project_weak(const WeakPerspectiveCamera& camera, const RotationMatrix& r,
                  const Vec3& point) {
  if (!(camera.scale > 0) || !std::isfinite(camera.scale)) {
    throw Error(ErrorKind::InvalidInput, "weak-perspective scale must be > 0");
  }
  return camera.scale * (r.projection_rows() * point + camera.translation);
}

Vec2 project_full(const PinholeCamera& camera, const RotationMatrix& r,
                  const Vec3& point) {
  const Vec3 x = r.apply(point) + camera.translation;
  if (!(x.z() > 0)) {
    throw Error(ErrorKind::BehindCamera,
                "point does not project: depth is not positive");
  }
  const double u = (camera.alpha * x.x() + camera.gamma * x.y()) / x.z();
  const double v = camera.beta * x.y() / x.z();
  return Vec2(u + camera.principal.x(), v + camera.principal.y());
}

Mat23 nearest_row_orthonormal(const Mat23& m) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
  }
  Eigen::JacobiSVD<Mat23> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues()(1);
  if (!(smin > 1e-12 * svd.singularValues()(0)) || !(smin > 0)) {
    throw Error(ErrorKind::DegenerateDecomposition,
                "rows are numerically dependent; no unique orthonormal fit");
  }
  // With unit singular values the product U * V^T is the polar factor.
  return svd.matrixU() * svd.matrixV().leftCols<2>().transpose();
}

RotationMatrix complete_rotation(const Vec3& r1, const Vec3& r2) {
  Mat23 rows;
  rows.row(0) = r1.transpose();
  rows.row(1) = r2.transpose();
  const Mat23 ortho = nearest_row_orthonormal(rows);
  Mat3 m;
  m.topRows<2>() = ortho;
  m.row(2) = ortho.row(0).transpose().cross(ortho.row(1).transpose()).transpose();
  return RotationMatrix(m);
}

}  // namespace headpose
