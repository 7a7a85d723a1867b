#include "headpose/morph.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <utility>

namespace headpose {

namespace {

std::array<Vec3, 4> to_array(const std::vector<Vec3>& v, const char* what) {
  if (v.size() != 4) {
    throw Error(ErrorKind::InvalidInput,
                std::string(what) + " must contain exactly four directions");
  }
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

ObjectiveContext make_context(const NormalizedSet2D& image,
                              const NormalizedSet3D& model,
                              const RotationMatrix& rotation, double eta,
                              ConstraintMode mode) {
  if (image.directions.size() != 4 || model.directions.size() != 4) {
    throw Error(ErrorKind::InvalidInput,
                "objective needs exactly four correspondences");
  }
  if (!(eta >= 0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::InvalidInput, "penalty weight must be >= 0");
  }
  ObjectiveContext ctx;
  std::array<Vec3, 4> model_points;
  for (int i = 0; i < 4; ++i) {
    ctx.targets[i] = image.directions[i];
    model_points[i] = model.directions[i];
  }
  ctx.sphere = fit_sphere(model_points);
  for (int i = 0; i < 4; ++i) {
    ctx.base[i] = to_spherical(model_points[i], ctx.sphere);
    // Cache the zero-offset morph rather than the raw direction so the
    // departure penalty is exactly zero at the start.
    ctx.rest_points[i] = apply_morph(ctx.base[i], {0.0, 0.0}, ctx.sphere);
  }
  ctx.projection = rotation.projection_rows();
  ctx.eta = eta;
  ctx.mode = mode;
  return ctx;
}

std::array<Vec3, 4> morphed_points(const FreeParams& params,
                                   const ObjectiveContext& ctx) {
  const MorphParams morph = expand_params(params, ctx.mode);
  std::array<Vec3, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = apply_morph(ctx.base[i], morph.offsets[i], ctx.sphere);
  }
  return out;
}

double objective(const FreeParams& params, const ObjectiveContext& ctx) {
  const std::array<Vec3, 4> moved = morphed_points(params, ctx);
  double reprojection = 0.0;
  double departure = 0.0;
  for (int i = 0; i < 4; ++i) {
    reprojection += (ctx.targets[i] - ctx.projection * moved[i]).squaredNorm();
    departure += (moved[i] - ctx.rest_points[i]).squaredNorm();
  }
  return reprojection + ctx.eta * departure;
}

Eigen::VectorXd residuals(const FreeParams& params,
                          const ObjectiveContext& ctx) {
  const std::array<Vec3, 4> moved = morphed_points(params, ctx);
  const double weight = std::sqrt(ctx.eta);
  Eigen::VectorXd r(20);
  for (int i = 0; i < 4; ++i) {
    r.segment<2>(2 * i) = ctx.targets[i] - ctx.projection * moved[i];
    r.segment<3>(8 + 3 * i) = weight * (moved[i] - ctx.rest_points[i]);
  }
  return r;
}

Eigen::MatrixXd jacobian(const FreeParams& params,
                         const ObjectiveContext& ctx) {
  const int n = free_param_count(ctx.mode);
  if (params.size() != n) {
    throw Error(ErrorKind::InvalidInput,
                "parameter vector has wrong length for the constraint mode");
  }
  const MorphParams morph = expand_params(params, ctx.mode);
  const double weight = std::sqrt(ctx.eta);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(20, n);

  // d(moved_i)/d(packed parameter) assembled from the per-point surface
  // derivative; reprojection rows pick up -P, departure rows sqrt(eta).
  const auto add_block = [&](int point, int column, const Vec3& dm) {
    j.block<2, 1>(2 * point, column) -= ctx.projection * dm;
    j.block<3, 1>(8 + 3 * point, column) += weight * dm;
  };

  for (int i = 0; i < 4; ++i) {
    const Eigen::Matrix<double, 3, 2> surface =
        morph_jacobian(ctx.base[i], morph.offsets[i]);
    const Vec3 d_azimuth = surface.col(0);
    const Vec3 d_polar = surface.col(1);
    if (ctx.mode == ConstraintMode::Free) {
      add_block(i, 2 * i, d_azimuth);
      add_block(i, 2 * i + 1, d_polar);
    } else {
      switch (i) {
        case 0:
          add_block(i, 0, d_polar);
          break;
        case 1:
          add_block(i, 1, d_polar);
          break;
        case 2:
          add_block(i, 2, d_polar);
          add_block(i, 3, d_azimuth);
          break;
        case 3:
          add_block(i, 2, d_polar);
          add_block(i, 3, -d_azimuth);
          break;
      }
    }
  }
  return j;
}

LMResult minimize_morph(const ObjectiveContext& ctx, const LMConfig& config) {
  const int n = free_param_count(ctx.mode);
  LMResult result;
  result.params = FreeParams::Zero(n);
  result.objective = objective(result.params, ctx);
  result.trace.push_back({0, result.objective, config.initial_damping, true});

  FreeParams params = result.params;
  double current = result.objective;
  double damping = config.initial_damping;

  const auto fail = [&](const char* message) -> SolverFailure {
    return SolverFailure(message, std::move(result.trace));
  };

  if (!std::isfinite(current)) throw fail("objective is non-finite at start");

  while (result.iterations < config.max_iterations) {
    const Eigen::MatrixXd j = jacobian(params, ctx);
    const Eigen::VectorXd r = residuals(params, ctx);
    if (!j.allFinite() || !r.allFinite()) {
      throw fail("residuals or Jacobian became non-finite");
    }
    const Eigen::MatrixXd hessian = j.transpose() * j;
    const Eigen::VectorXd gradient = j.transpose() * r;

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = hessian;
      damped.diagonal() += damping * hessian.diagonal();
      const FreeParams step = damped.ldlt().solve(-gradient);
      const FreeParams trial = params + step;
      const double trial_objective =
          step.allFinite() ? objective(trial, ctx)
                           : std::numeric_limits<double>::infinity();

      if (std::isfinite(trial_objective) && trial_objective <= current) {
        const double decrease = current - trial_objective;
        params = trial;
        current = trial_objective;
        ++result.iterations;
        result.trace.push_back({result.iterations, current, damping, true});
        damping = std::max(damping / config.damping_decrease,
                           config.min_damping);
        accepted = true;
        if (current < result.objective) {
          result.params = params;
          result.objective = current;
        }
        if (decrease <= config.stop_decrease) {
          result.converged = true;
          return result;
        }
      } else {
        result.trace.push_back(
            {result.iterations, trial_objective, damping, false});
        if (damping >= config.max_damping) {
          // No descent direction even at maximal damping; the current point
          // is as good as this schedule gets.
          return result;
        }
        damping = std::min(damping * config.damping_increase,
                           config.max_damping);
      }
    }
  }
  return result;
}

RotationMatrix fit_rotation(const std::array<Vec2, 4>& targets,
                            const std::array<Vec3, 4>& directions) {
  Eigen::Matrix<double, 3, 4> m;
  Eigen::Matrix<double, 2, 4> t;
  for (int i = 0; i < 4; ++i) {
    m.col(i) = directions[i];
    t.col(i) = targets[i];
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec3 sigma = svd.singularValues();
  // cond(M M^T) = (sigma_max / sigma_min)^2.
  if (!(sigma(2) > 0) ||
      (sigma(0) / sigma(2)) * (sigma(0) / sigma(2)) > 1e12) {
    throw Error(ErrorKind::DegenerateGeometry,
                "directions span less than three dimensions; rotation fit is "
                "unconstrained");
  }
  // T * M^T * (M M^T)^-1 collapses to T * V * S^-1 * U^T via the SVD.
  const Mat23 rows = t * svd.matrixV() * sigma.cwiseInverse().asDiagonal() *
                     svd.matrixU().transpose();
  return complete_rotation(rows.row(0).transpose(), rows.row(1).transpose());
}

RotationMatrix initial_rotation(const NormalizedSet2D& image,
                                const NormalizedSet3D& model) {
  std::array<Vec2, 4> targets;
  const std::array<Vec3, 4> directions =
      to_array(model.directions, "normalized model");
  if (image.directions.size() != 4) {
    throw Error(ErrorKind::InvalidInput,
                "normalized image must contain exactly four directions");
  }
  for (int i = 0; i < 4; ++i) targets[i] = image.directions[i];
  return fit_rotation(targets, directions);
}

RotationMatrix final_rotation(const NormalizedSet2D& image,
                              const std::array<Vec3, 4>& morphed) {
  std::array<Vec2, 4> targets;
  if (image.directions.size() != 4) {
    throw Error(ErrorKind::InvalidInput,
                "normalized image must contain exactly four directions");
  }
  for (int i = 0; i < 4; ++i) targets[i] = image.directions[i];
  return fit_rotation(targets, morphed);
}

}  // namespace headpose
