#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "headpose/estimator.hpp"

namespace headpose {

// One synthetic image: a true pose, a camera, a model, optional on-sphere
// perturbation of that model, and optional pixel noise.
struct SceneSpec {
  EulerAngles angles;
  std::variant<WeakPerspectiveCamera, PinholeCamera> camera =
      WeakPerspectiveCamera{};
  FeaturePointSet3D model;
  double noise_px = 0.0;     // Gaussian sigma per pixel coordinate
  std::uint64_t seed = 0;    // drives the noise only
  // Symmetric-pattern offsets (4 scalars) applied to the model on its own
  // sphere before rotating and projecting.
  std::optional<FreeParams> true_morph;
};

struct GroundTruth {
  EulerAngles angles;
  FeaturePointSet3D morphed_model;  // the 3D points that were projected
};

// Projects the (optionally morphed) model under the true pose and camera and
// adds seeded pixel noise. Deterministic for a fixed spec.
std::pair<FeaturePointSet2D, GroundTruth> generate_scene(const SceneSpec& spec);

// Pinhole camera that reproduces `weak` exactly at the rotated model's
// centroid depth, placed so that (camera distance) / (depth variation of the
// rotated model) equals distance_ratio. As the ratio grows the two
// projections of the model coincide.
PinholeCamera matched_pinhole(const WeakPerspectiveCamera& weak,
                              const RotationMatrix& rotation,
                              const FeaturePointSet3D& model,
                              double distance_ratio);

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
};

// Exhaustive objective evaluation over an axis-aligned grid of the packed
// parameters (one axis per free parameter, at most 1e7 points); returns the
// minimizing grid point and its objective value. First minimum wins ties, so
// the result is deterministic.
std::pair<FreeParams, double> brute_force_morph(const ObjectiveContext& ctx,
                                                const std::vector<GridAxis>& grid);

// A labeled instance for batch evaluation.
struct BatchInstance {
  std::string id;
  FeaturePointSet2D landmarks;
  EulerAngles truth;
};

struct AngleStats {
  double mae = 0.0;     // mean absolute error, degrees
  double stddev = 0.0;  // population std of the absolute errors
};

// MAE and population STD of a list of absolute errors; zeros when empty.
AngleStats make_angle_stats(const std::vector<double>& abs_errors);

struct InstanceRecord {
  std::string id;
  bool ok = false;
  Vec3 abs_error_deg = Vec3::Zero();  // pitch, yaw, roll (valid when ok)
  double wall_ms = 0.0;
  std::string message;  // failure description when !ok
};

struct BatchReport {
  AngleStats pitch, yaw, roll;
  std::vector<InstanceRecord> instances;  // in input order
  int failures = 0;
  double median_wall_ms = 0.0;
  double mean_wall_ms = 0.0;
};

// Runs estimate_pose on every instance (optionally across `jobs` threads;
// results are identical for any degree) and aggregates per-angle MAE and STD
// over the successes.
BatchReport evaluate_batch(const std::vector<BatchInstance>& instances,
                           const FeaturePointSet3D& model,
                           const EstimationConfig& config, int jobs = 1);

// Statistically independent per-instance seed from a base seed and an
// instance index; splitmix64-style mixing.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace headpose
