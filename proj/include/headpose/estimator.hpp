#pragma once

#include <optional>

#include "headpose/morph.hpp"

namespace headpose {

struct EstimationConfig {
  double eta = kDefaultEta;
  LMConfig lm;
  ConstraintMode mode = ConstraintMode::Symmetric;
  bool morph = true;
};

struct EstimationResult {
  EulerAngles angles;  // decomposition of `rotation`, reported in degrees
  RotationMatrix rotation = RotationMatrix::identity();
  int iterations = 0;       // accepted optimizer steps (0 when morph is off)
  double objective = 0.0;   // best objective value reached
  bool converged = true;    // optimizer stopped via its decrease rule
  std::optional<MorphParams> morph;  // offsets at the optimum, when enabled
};

// The bundled reference face: chin, nose_tip, left_canthus, right_canthus in
// millimeter-scale units, bilaterally symmetric and non-coplanar. A stand-in
// usable whenever no subject-specific model file is supplied.
FeaturePointSet3D default_model();

// Intermediate stage products of estimate_pose, exposed so tools and tests
// can drive the optimizer directly on a real instance.
struct PipelineSetup {
  FeaturePointSet2D ordered_landmarks;  // reordered to match the model rows
  NormalizedSet2D image;
  NormalizedSet3D model;
  RotationMatrix initial = RotationMatrix::identity();
  ObjectiveContext context;  // objective around `initial`
};

PipelineSetup prepare_pipeline(const FeaturePointSet2D& landmarks,
                               const FeaturePointSet3D& model,
                               const EstimationConfig& config = {});

// Full pipeline: match labels, normalize both sets, fit the direction sphere,
// estimate the initial rotation, optimize the surface offsets, re-fit the
// rotation on the morphed directions, and decompose it into angles. With
// config.morph off the optimizer and the re-fit are skipped. Errors carry the
// failing stage name.
EstimationResult estimate_pose(const FeaturePointSet2D& landmarks,
                               const FeaturePointSet3D& model,
                               const EstimationConfig& config = {});

EstimationResult estimate_pose_no_morph(const FeaturePointSet2D& landmarks,
                                        const FeaturePointSet3D& model);

}  // namespace headpose
