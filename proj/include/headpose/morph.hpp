#pragma once

#include <array>
#include <vector>

#include "headpose/normalization.hpp"
#include "headpose/sphere.hpp"

namespace headpose {

// Weight of the departure penalty in the objective; the working default.
inline constexpr double kDefaultEta = 1.77;

// Everything the objective needs, fixed for the duration of one solve. The
// rotation estimated from the unmorphed correspondences stays frozen here
// while the surface offsets move; only the final rotation fit sees the morphed
// points.
struct ObjectiveContext {
  std::array<Vec2, 4> targets{};         // normalized image directions
  std::array<SphericalPoint, 4> base{};  // model directions on their sphere
  Sphere sphere;
  std::array<Vec3, 4> rest_points{};  // morph of zero offsets, cached
  Mat23 projection = Mat23::Zero();   // first two rows of the frozen rotation
  double eta = kDefaultEta;
  ConstraintMode mode = ConstraintMode::Symmetric;
};

ObjectiveContext make_context(const NormalizedSet2D& image,
                              const NormalizedSet3D& model,
                              const RotationMatrix& rotation, double eta,
                              ConstraintMode mode);

// Morphed positions of the four model directions for a packed parameter
// vector.
std::array<Vec3, 4> morphed_points(const FreeParams& params,
                                   const ObjectiveContext& ctx);

// Reprojection error of the morphed points under the frozen rotation plus
// eta times the squared departure of each point from its rest position:
//   sum_i |target_i - P * M_i(params)|^2 + eta * sum_i |M_i(params) - M_i(0)|^2
double objective(const FreeParams& params, const ObjectiveContext& ctx);

// Stacked residual vector whose squared norm is the objective: 8 reprojection
// components (u, v per point), then 12 departure components (x, y, z per
// point, weighted by sqrt(eta)).
Eigen::VectorXd residuals(const FreeParams& params,
                          const ObjectiveContext& ctx);

// Analytic derivative of residuals with respect to the packed parameters.
Eigen::MatrixXd jacobian(const FreeParams& params, const ObjectiveContext& ctx);

struct LMConfig {
  double initial_damping = 1e-3;
  double damping_increase = 10.0;  // on a rejected step
  double damping_decrease = 10.0;  // on an accepted step
  double min_damping = 1e-12;
  double max_damping = 1e8;
  int max_iterations = 100;   // accepted steps
  double stop_decrease = 1e-6;  // accepted decrease at or below this ends it
};

struct LMStep {
  int iteration = 0;
  double objective = 0.0;
  double damping = 0.0;
  bool accepted = false;
};

struct LMResult {
  FreeParams params;
  double objective = 0.0;
  int iterations = 0;    // accepted steps
  bool converged = false;  // stopped via the decrease rule, not the caps
  std::vector<LMStep> trace;
};

// Numerical failure inside the solver, carrying the iteration history for
// diagnosis.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& message, std::vector<LMStep> trace)
      : Error(ErrorKind::NumericalFailure, message), trace(std::move(trace)) {}

  std::vector<LMStep> trace;
};

// Damped least squares from a zero start: solves
//   (J^T J + damping * diag(J^T J)) step = -J^T residuals
// each round, accepts the step when the objective does not increase, and
// stops once an accepted step decreases the objective by at most
// stop_decrease. Returns the best parameters seen.
LMResult minimize_morph(const ObjectiveContext& ctx, const LMConfig& config);

// Least-squares rotation rows from four direction correspondences:
// P = targets * directions^T * (directions * directions^T)^-1, snapped to the
// nearest orthonormal pair and completed to a full rotation. Throws a
// degenerate-geometry Error when the 3D directions are too close to rank
// deficient for the normal equations to mean anything.
RotationMatrix fit_rotation(const std::array<Vec2, 4>& targets,
                            const std::array<Vec3, 4>& directions);

// fit_rotation of the unmorphed correspondences; the frozen projection.
RotationMatrix initial_rotation(const NormalizedSet2D& image,
                                const NormalizedSet3D& model);

// fit_rotation of the image directions against the morphed model points.
RotationMatrix final_rotation(const NormalizedSet2D& image,
                              const std::array<Vec3, 4>& morphed);

}  // namespace headpose
