#include "headpose/synthetic.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <type_traits>

namespace headpose {

namespace {

FeaturePointSet3D morph_model(const FeaturePointSet3D& model,
                              const FreeParams& params) {
  if (model.size() != 4) {
    throw Error(ErrorKind::InvalidInput,
                "a true morph needs a four-point model");
  }
  const MorphParams morph = expand_params(params, ConstraintMode::Symmetric);
  std::array<Vec3, 4> positions;
  for (int i = 0; i < 4; ++i) positions[i] = model[i].position;
  const Sphere sphere = fit_sphere(positions);
  FeaturePointSet3D out = model;
  for (int i = 0; i < 4; ++i) {
    out[i].position = apply_morph(to_spherical(positions[i], sphere),
                                  morph.offsets[i], sphere);
  }
  return out;
}

double stats_sum(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

}  // namespace

AngleStats make_angle_stats(const std::vector<double>& abs_errors) {
  AngleStats stats;
  if (abs_errors.empty()) return stats;
  const double n = static_cast<double>(abs_errors.size());
  stats.mae = stats_sum(abs_errors) / n;
  double accum = 0.0;
  for (double v : abs_errors) accum += (v - stats.mae) * (v - stats.mae);
  stats.stddev = std::sqrt(accum / n);
  return stats;
}

std::pair<FeaturePointSet2D, GroundTruth> generate_scene(const SceneSpec& spec) {
  if (!(spec.noise_px >= 0) || !std::isfinite(spec.noise_px)) {
    throw Error(ErrorKind::InvalidInput, "noise sigma must be >= 0");
  }
  if (spec.model.empty()) {
    throw Error(ErrorKind::InvalidInput, "scene model is empty");
  }
  GroundTruth truth;
  truth.angles = spec.angles;
  truth.morphed_model =
      spec.true_morph ? morph_model(spec.model, *spec.true_morph) : spec.model;

  const RotationMatrix rotation = compose_rotation(spec.angles);
  FeaturePointSet2D landmarks;
  for (const auto& point : truth.morphed_model) {
    const Vec2 uv = std::visit(
        [&](const auto& c) -> Vec2 {
          if constexpr (std::is_same_v<std::decay_t<decltype(c)>,
                                       WeakPerspectiveCamera>) {
            return project_weak(c, rotation, point.position);
          } else {
            return project_full(c, rotation, point.position);
          }
        },
        spec.camera);
    landmarks.push_back({point.label, uv});
  }

  if (spec.noise_px > 0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_px);
    for (auto& p : landmarks) {
      p.position.x() += noise(rng);
      p.position.y() += noise(rng);
    }
  }
  return {std::move(landmarks), std::move(truth)};
}

PinholeCamera matched_pinhole(const WeakPerspectiveCamera& weak,
                              const RotationMatrix& rotation,
                              const FeaturePointSet3D& model,
                              double distance_ratio) {
  if (!(distance_ratio > 0) || !std::isfinite(distance_ratio)) {
    throw Error(ErrorKind::InvalidInput, "distance ratio must be > 0");
  }
  if (model.empty()) {
    throw Error(ErrorKind::InvalidInput, "model is empty");
  }
  const Vec3 r3 = rotation.row(2);
  const Vec3 center = centroid(model);
  const double mean_depth = r3.dot(center);
  double span = 0.0;
  for (const auto& p : model) {
    span = std::max(span, std::abs(r3.dot(p.position) - mean_depth));
  }
  if (!(span > 0)) {
    throw Error(ErrorKind::DegenerateInput,
                "model has no depth variation under this rotation");
  }
  const double distance = distance_ratio * span;  // centroid depth
  PinholeCamera camera;
  camera.alpha = weak.scale * distance;
  camera.beta = weak.scale * distance;
  camera.gamma = 0.0;
  camera.principal = Vec2::Zero();
  camera.translation =
      Vec3(weak.translation.x(), weak.translation.y(), distance - mean_depth);
  return camera;
}

std::pair<FreeParams, double> brute_force_morph(
    const ObjectiveContext& ctx, const std::vector<GridAxis>& grid) {
  const int n = free_param_count(ctx.mode);
  if (static_cast<int>(grid.size()) != n) {
    throw Error(ErrorKind::InvalidInput,
                "grid must have one axis per free parameter");
  }
  std::vector<int> counts(grid.size());
  double total = 1.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const GridAxis& axis = grid[i];
    if (!(axis.step > 0) || !(axis.hi >= axis.lo) ||
        !std::isfinite(axis.lo) || !std::isfinite(axis.hi)) {
      throw Error(ErrorKind::InvalidInput, "malformed grid axis");
    }
    counts[i] = static_cast<int>(std::floor((axis.hi - axis.lo) / axis.step +
                                            1e-9)) + 1;
    total *= counts[i];
  }
  if (total > 1e7) {
    throw Error(ErrorKind::InvalidInput, "grid exceeds the evaluation budget");
  }

  std::vector<int> index(grid.size(), 0);
  FreeParams point(n), best_point(n);
  double best = std::numeric_limits<double>::infinity();
  bool done = false;
  while (!done) {
    for (int i = 0; i < n; ++i) {
      point(i) = grid[i].lo + index[i] * grid[i].step;
    }
    const double value = objective(point, ctx);
    if (value < best) {
      best = value;
      best_point = point;
    }
    // Odometer increment over the grid indices.
    int axis = 0;
    while (axis < n && ++index[axis] == counts[axis]) {
      index[axis] = 0;
      ++axis;
    }
    done = axis == n;
  }
  return {best_point, best};
}

BatchReport evaluate_batch(const std::vector<BatchInstance>& instances,
                           const FeaturePointSet3D& model,
                           const EstimationConfig& config, int jobs) {
  if (instances.empty()) {
    throw Error(ErrorKind::InvalidInput, "no instances to evaluate");
  }
  if (jobs < 1) {
    throw Error(ErrorKind::InvalidInput, "jobs must be >= 1");
  }
  BatchReport report;
  report.instances.resize(instances.size());

  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < instances.size();
         i = next.fetch_add(1)) {
      const BatchInstance& instance = instances[i];
      InstanceRecord& record = report.instances[i];
      record.id = instance.id;
      const auto start = std::chrono::steady_clock::now();
      try {
        const EstimationResult result =
            estimate_pose(instance.landmarks, model, config);
        record.ok = true;
        record.abs_error_deg =
            Vec3(std::abs(result.angles.pitch_deg() - instance.truth.pitch_deg()),
                 std::abs(result.angles.yaw_deg() - instance.truth.yaw_deg()),
                 std::abs(result.angles.roll_deg() - instance.truth.roll_deg()));
      } catch (const Error& e) {
        record.ok = false;
        record.message = e.what();
      }
      record.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::vector<double> pitch, yaw, roll, times;
  for (const auto& record : report.instances) {
    times.push_back(record.wall_ms);
    if (!record.ok) {
      ++report.failures;
      continue;
    }
    pitch.push_back(record.abs_error_deg(0));
    yaw.push_back(record.abs_error_deg(1));
    roll.push_back(record.abs_error_deg(2));
  }
  report.pitch = make_angle_stats(pitch);
  report.yaw = make_angle_stats(yaw);
  report.roll = make_angle_stats(roll);
  report.mean_wall_ms = stats_sum(times) / static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  report.median_wall_ms = times[times.size() / 2];
  return report;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace headpose
