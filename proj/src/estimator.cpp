#include "headpose/estimator.hpp"

#include <algorithm>
#include <utility>

namespace headpose {

namespace {

// Runs one pipeline stage, stamping its name onto any Error thrown inside.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SolverFailure&) {
    throw;  // already specific enough, and the trace must survive
  } catch (const Error& e) {
    throw Error::at_stage(name, e);
  }
}

// Reorders landmarks into model row order, insisting on an exact one-to-one
// label match.
FeaturePointSet2D match_labels(const FeaturePointSet2D& landmarks,
                               const FeaturePointSet3D& model) {
  if (model.size() != 4) {
    throw Error(ErrorKind::InvalidInput,
                "model must contain exactly four points");
  }
  if (landmarks.size() != 4) {
    throw Error(ErrorKind::InvalidInput,
                "landmarks must contain exactly four points");
  }
  for (size_t i = 0; i < model.size(); ++i) {
    for (size_t j = i + 1; j < model.size(); ++j) {
      if (model[i].label == model[j].label) {
        throw Error(ErrorKind::InvalidInput,
                    "duplicate model label '" + model[i].label + "'");
      }
    }
  }
  for (size_t i = 0; i < landmarks.size(); ++i) {
    for (size_t j = i + 1; j < landmarks.size(); ++j) {
      if (landmarks[i].label == landmarks[j].label) {
        throw Error(ErrorKind::InvalidInput,
                    "duplicate landmark label '" + landmarks[i].label + "'");
      }
    }
  }
  FeaturePointSet2D ordered;
  for (const auto& m : model) {
    const auto it =
        std::find_if(landmarks.begin(), landmarks.end(),
                     [&](const FeaturePoint2& p) { return p.label == m.label; });
    if (it == landmarks.end()) {
      throw Error(ErrorKind::InvalidInput,
                  "missing landmark label '" + m.label + "'");
    }
    ordered.push_back(*it);
  }
  for (const auto& p : landmarks) {
    const auto it = std::find_if(
        model.begin(), model.end(),
        [&](const FeaturePoint3& m) { return m.label == p.label; });
    if (it == model.end()) {
      throw Error(ErrorKind::InvalidInput,
                  "unknown landmark label '" + p.label + "'");
    }
  }
  std::array<Vec3, 4> positions;
  for (int i = 0; i < 4; ++i) positions[i] = model[i].position;
  if (nearly_coplanar(positions)) {
    throw Error(ErrorKind::DegenerateInput, "model points are coplanar");
  }
  return ordered;
}

}  // namespace

FeaturePointSet3D default_model() {
  return {
      {"chin", {0.0, -62.0, -10.0}},
      {"nose_tip", {0.0, -20.0, 21.0}},
      {"left_canthus", {-34.0, 18.0, 0.0}},
      {"right_canthus", {34.0, 18.0, 0.0}},
  };
}

PipelineSetup prepare_pipeline(const FeaturePointSet2D& landmarks,
                               const FeaturePointSet3D& model,
                               const EstimationConfig& config) {
  PipelineSetup setup;
  setup.ordered_landmarks =
      stage("validate", [&] { return match_labels(landmarks, model); });
  stage("normalize", [&] {
    setup.image = normalize(setup.ordered_landmarks);
    setup.model = normalize(model);
    return 0;
  });
  setup.initial = stage("initial_rotation",
                        [&] { return initial_rotation(setup.image, setup.model); });
  setup.context = stage("sphere_fit", [&] {
    return make_context(setup.image, setup.model, setup.initial, config.eta,
                        config.mode);
  });
  return setup;
}

EstimationResult estimate_pose(const FeaturePointSet2D& landmarks,
                               const FeaturePointSet3D& model,
                               const EstimationConfig& config) {
  EstimationResult result;
  if (!config.morph) {
    // The optimizer is skipped entirely; the sphere is still used when it
    // exists so the reported objective is bit-identical to the morph path's
    // starting value, but a sphere-degenerate direction set only disables
    // that bookkeeping, not the estimate itself.
    const FeaturePointSet2D ordered =
        stage("validate", [&] { return match_labels(landmarks, model); });
    NormalizedSet2D image;
    NormalizedSet3D norm_model;
    stage("normalize", [&] {
      image = normalize(ordered);
      norm_model = normalize(model);
      return 0;
    });
    result.rotation = stage(
        "initial_rotation", [&] { return initial_rotation(image, norm_model); });
    try {
      const ObjectiveContext ctx = make_context(image, norm_model,
                                                result.rotation, config.eta,
                                                config.mode);
      result.objective = objective(FreeParams::Zero(free_param_count(config.mode)), ctx);
    } catch (const Error&) {
      double reprojection = 0.0;
      const Mat23 p = result.rotation.projection_rows();
      for (int i = 0; i < 4; ++i) {
        reprojection +=
            (image.directions[i] - p * norm_model.directions[i]).squaredNorm();
      }
      result.objective = reprojection;
    }
    result.iterations = 0;
    result.converged = true;
    result.angles =
        stage("euler", [&] { return euler_from_rotation(result.rotation); });
    return result;
  }

  const PipelineSetup setup = prepare_pipeline(landmarks, model, config);
  const LMResult solved =
      stage("morph", [&] { return minimize_morph(setup.context, config.lm); });
  const std::array<Vec3, 4> morphed = morphed_points(solved.params, setup.context);
  result.rotation = stage(
      "final_rotation", [&] { return final_rotation(setup.image, morphed); });
  result.iterations = solved.iterations;
  result.objective = solved.objective;
  result.converged = solved.converged;
  result.morph = expand_params(solved.params, config.mode);
  result.angles =
      stage("euler", [&] { return euler_from_rotation(result.rotation); });
  return result;
}

EstimationResult estimate_pose_no_morph(const FeaturePointSet2D& landmarks,
                                        const FeaturePointSet3D& model) {
  EstimationConfig config;
  config.morph = false;
  return estimate_pose(landmarks, model, config);
}

}  // namespace headpose
