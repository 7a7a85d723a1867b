#pragma once

#include <random>

#include "headpose/estimator.hpp"
#include "headpose/synthetic.hpp"

namespace headpose::test {

// Pose sampler covering the working angle ranges (pitch +/-60, yaw +/-75,
// roll -64..70 degrees).
inline EulerAngles random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pitch(-60.0, 60.0);
  std::uniform_real_distribution<double> yaw(-75.0, 75.0);
  std::uniform_real_distribution<double> roll(-64.0, 70.0);
  return EulerAngles::from_degrees(pitch(rng), yaw(rng), roll(rng));
}

inline RotationMatrix random_rotation(std::mt19937_64& rng) {
  return compose_rotation(random_pose(rng));
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Noise-free weak-perspective landmarks of `model` at `angles`.
inline FeaturePointSet2D project_model(const EulerAngles& angles,
                                       const FeaturePointSet3D& model,
                                       double scale = 1.0,
                                       const Vec2& translation = Vec2::Zero()) {
  SceneSpec spec;
  spec.angles = angles;
  spec.camera = WeakPerspectiveCamera{scale, translation};
  spec.model = model;
  return generate_scene(spec).first;
}

}  // namespace headpose::test
