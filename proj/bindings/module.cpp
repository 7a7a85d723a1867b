#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "headpose/estimator.hpp"
#include "headpose/synthetic.hpp"

namespace py = pybind11;
using namespace headpose;

namespace {

FeaturePointSet2D to_landmarks(const py::dict& landmarks) {
  FeaturePointSet2D out;
  for (const auto& item : landmarks) {
    out.push_back({py::cast<std::string>(item.first),
                   py::cast<Vec2>(item.second)});
  }
  return out;
}

// Model points keep their Python insertion order; that order is the canonical
// one (chin, nose tip, left canthus, right canthus) for the symmetric
// constraint pattern.
FeaturePointSet3D to_model(const py::object& model) {
  if (model.is_none()) return default_model();
  FeaturePointSet3D out;
  for (const auto& item : py::cast<py::dict>(model)) {
    out.push_back({py::cast<std::string>(item.first),
                   py::cast<Vec3>(item.second)});
  }
  return out;
}

ConstraintMode to_mode(const std::string& constraints) {
  if (constraints == "symmetric") return ConstraintMode::Symmetric;
  if (constraints == "free") return ConstraintMode::Free;
  throw Error(ErrorKind::InvalidInput,
              "constraints must be 'symmetric' or 'free'");
}

py::dict model_to_dict(const FeaturePointSet3D& model) {
  py::dict out;
  for (const auto& p : model) out[py::str(p.label)] = p.position;
  return out;
}

}  // namespace

PYBIND11_MODULE(_headpose, m) {
  m.doc() = "Head pose estimation from four labeled facial landmarks";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "HeadposeError");

  m.def(
      "compose_rotation",
      [](double pitch, double yaw, double roll) {
        return compose_rotation(EulerAngles::from_degrees(pitch, yaw, roll))
            .matrix();
      },
      py::arg("pitch"), py::arg("yaw"), py::arg("roll"),
      "Rotation matrix for pitch/yaw/roll in degrees.");

  m.def(
      "euler_from_rotation",
      [](const Mat3& rotation) {
        const EulerAngles angles =
            euler_from_rotation(RotationMatrix::from_matrix(rotation));
        return py::make_tuple(angles.pitch_deg(), angles.yaw_deg(),
                              angles.roll_deg());
      },
      py::arg("rotation"),
      "(pitch, yaw, roll) in degrees for an orthonormal rotation matrix.");

  m.def(
      "fit_sphere",
      [](const Eigen::Matrix<double, 4, 3>& points) {
        std::array<Vec3, 4> rows;
        for (int i = 0; i < 4; ++i) rows[i] = points.row(i).transpose();
        const Sphere sphere = fit_sphere(rows);
        return py::make_tuple(sphere.center, sphere.radius);
      },
      py::arg("points"),
      "(center, radius) of the sphere through four non-coplanar points, "
      "given as a 4x3 array.");

  m.def("default_model", [] { return model_to_dict(default_model()); },
        "The bundled reference face as {label: (x, y, z)}.");

  m.def(
      "estimate_pose",
      [](const py::dict& landmarks, const py::object& model, double eta,
         bool morph, const std::string& constraints, int max_iterations,
         double tol) {
        EstimationConfig config;
        config.eta = eta;
        config.morph = morph;
        config.mode = to_mode(constraints);
        config.lm.max_iterations = max_iterations;
        config.lm.stop_decrease = tol;
        const EstimationResult result =
            estimate_pose(to_landmarks(landmarks), to_model(model), config);
        py::dict out;
        out["pitch"] = result.angles.pitch_deg();
        out["yaw"] = result.angles.yaw_deg();
        out["roll"] = result.angles.roll_deg();
        out["rotation"] = result.rotation.matrix();
        out["iterations"] = result.iterations;
        out["objective"] = result.objective;
        out["converged"] = result.converged;
        if (result.morph) {
          Eigen::Matrix<double, 4, 2> offsets;
          for (int i = 0; i < 4; ++i) {
            offsets(i, 0) = result.morph->offsets[i].azimuth;
            offsets(i, 1) = result.morph->offsets[i].polar;
          }
          out["morph_offsets"] = offsets;
        } else {
          out["morph_offsets"] = py::none();
        }
        return out;
      },
      py::arg("landmarks"), py::arg("model") = py::none(), py::kw_only(),
      py::arg("eta") = kDefaultEta, py::arg("morph") = true,
      py::arg("constraints") = "symmetric",
      py::arg("max_iterations") = LMConfig{}.max_iterations,
      py::arg("tol") = LMConfig{}.stop_decrease,
      "Estimate pitch/yaw/roll (degrees) from {label: (u, v)} landmarks. "
      "Returns a dict with angles, the rotation matrix, solver counters and "
      "the fitted surface offsets (rows: azimuth, polar per point; None when "
      "morphing is disabled).");

  m.def(
      "generate_scene",
      [](double pitch, double yaw, double roll, double scale, double tx,
         double ty, double noise_px, std::uint64_t seed,
         const py::object& model,
         const std::optional<Eigen::Vector4d>& true_morph) {
        SceneSpec spec;
        spec.angles = EulerAngles::from_degrees(pitch, yaw, roll);
        spec.camera = WeakPerspectiveCamera{scale, Vec2(tx, ty)};
        spec.model = to_model(model);
        spec.noise_px = noise_px;
        spec.seed = seed;
        if (true_morph) spec.true_morph = *true_morph;
        const auto [landmarks, truth] = generate_scene(spec);
        py::dict out;
        for (const auto& p : landmarks) out[py::str(p.label)] = p.position;
        return out;
      },
      py::arg("pitch"), py::arg("yaw"), py::arg("roll"), py::kw_only(),
      py::arg("scale") = 1.0, py::arg("tx") = 0.0, py::arg("ty") = 0.0,
      py::arg("noise_px") = 0.0, py::arg("seed") = 0,
      py::arg("model") = py::none(), py::arg("true_morph") = py::none(),
      "Weak-perspective landmarks {label: (u, v)} of a synthetic scene at the "
      "given pose (degrees), optionally noisy and optionally generated from a "
      "symmetric surface morph of the model.");
}
