#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "headpose/csv.hpp"
#include "headpose/estimator.hpp"
#include "headpose/synthetic.hpp"

namespace {

using namespace headpose;

struct EstimateOptions {
  std::string model_path;
  std::string landmarks_path;
  std::string out_path;
  double eta = kDefaultEta;
  double tol = LMConfig{}.stop_decrease;
  int max_iter = LMConfig{}.max_iterations;
  std::string constraints = "symmetric";
  bool no_morph = false;
  int jobs = 1;
};

struct SynthOptions {
  std::string model_path;
  std::string poses_path;
  std::string out_path;
  std::string truth_path;
  std::string projection = "weak";
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;
  double focal = 800.0;
  double depth = 2000.0;
  double noise_px = 0.0;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  std::string truth_path;
  std::string pred_path;
  std::string out_path;
};

FeaturePointSet3D load_model(const std::string& path) {
  return path.empty() ? default_model() : read_model_file(path);
}

int run_estimate(const EstimateOptions& opt) {
  const FeaturePointSet3D model = load_model(opt.model_path);
  const std::vector<LandmarkGroup> groups =
      read_landmarks_file(opt.landmarks_path);

  EstimationConfig config;
  config.eta = opt.eta;
  config.lm.stop_decrease = opt.tol;
  config.lm.max_iterations = opt.max_iter;
  config.mode = opt.constraints == "free" ? ConstraintMode::Free
                                          : ConstraintMode::Symmetric;
  config.morph = !opt.no_morph;

  std::vector<std::optional<PredictionRecord>> records(groups.size());
  std::vector<std::pair<std::string, std::string>> failures_by_index(
      groups.size());

  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < groups.size();
         i = next.fetch_add(1)) {
      try {
        const EstimationResult result =
            estimate_pose(groups[i].landmarks, model, config);
        records[i] = PredictionRecord{
            groups[i].image_id,       result.angles.pitch_deg(),
            result.angles.yaw_deg(),  result.angles.roll_deg(),
            result.iterations,        result.objective,
            result.converged};
      } catch (const Error& e) {
        failures_by_index[i] = {groups[i].image_id, e.what()};
      }
    }
  };
  if (opt.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < opt.jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::vector<PredictionRecord> ok;
  std::vector<std::pair<std::string, std::string>> failures;
  for (size_t i = 0; i < groups.size(); ++i) {
    if (records[i]) {
      ok.push_back(*records[i]);
    } else {
      failures.push_back(failures_by_index[i]);
    }
  }
  std::sort(ok.begin(), ok.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) {
              return a.image_id < b.image_id;
            });
  std::sort(failures.begin(), failures.end());

  const std::string comment =
      "headpose estimate eta=" + format_compact(opt.eta) +
      " tol=" + format_compact(opt.tol) +
      " max-iter=" + std::to_string(opt.max_iter) +
      " constraints=" + opt.constraints +
      " morph=" + (opt.no_morph ? "off" : "on");
  write_predictions_file(opt.out_path, comment, ok);

  for (const auto& [id, message] : failures) {
    std::cerr << id << ": " << message << "\n";
  }
  return failures.empty() ? 0 : 2;
}

int run_synth(const SynthOptions& opt) {
  const FeaturePointSet3D model = load_model(opt.model_path);
  const std::vector<PoseRecord> poses = read_poses_file(opt.poses_path);

  std::vector<LandmarkGroup> groups;
  std::vector<PoseRecord> truth;
  std::vector<std::pair<std::string, std::string>> failures;
  for (size_t i = 0; i < poses.size(); ++i) {
    const PoseRecord& pose = poses[i];
    SceneSpec spec;
    spec.angles = EulerAngles::from_degrees(pose.pitch, pose.yaw, pose.roll);
    if (opt.projection == "full") {
      PinholeCamera camera;
      camera.alpha = opt.focal;
      camera.beta = opt.focal;
      camera.translation = Vec3(opt.tx, opt.ty, opt.depth);
      spec.camera = camera;
    } else {
      spec.camera = WeakPerspectiveCamera{opt.scale, Vec2(opt.tx, opt.ty)};
    }
    spec.model = model;
    spec.noise_px = opt.noise_px;
    spec.seed = derive_seed(opt.seed, i);
    try {
      auto [landmarks, record] = generate_scene(spec);
      groups.push_back({pose.image_id, std::move(landmarks)});
      truth.push_back(pose);
    } catch (const Error& e) {
      failures.push_back({pose.image_id, e.what()});
    }
  }

  const auto by_id = [](const auto& a, const auto& b) {
    return a.image_id < b.image_id;
  };
  std::sort(groups.begin(), groups.end(), by_id);
  std::sort(truth.begin(), truth.end(), by_id);
  std::sort(failures.begin(), failures.end());

  std::string comment = "headpose synth projection=" + opt.projection;
  if (opt.projection == "full") {
    comment += " focal=" + format_compact(opt.focal) +
               " depth=" + format_compact(opt.depth);
  } else {
    comment += " scale=" + format_compact(opt.scale);
  }
  comment += " tx=" + format_compact(opt.tx) + " ty=" + format_compact(opt.ty) +
             " noise-px=" + format_compact(opt.noise_px) +
             " seed=" + std::to_string(opt.seed);
  write_landmarks_file(opt.out_path, comment, groups);
  write_poses_file(opt.truth_path, comment, truth);

  for (const auto& [id, message] : failures) {
    std::cerr << id << ": " << message << "\n";
  }
  return failures.empty() ? 0 : 2;
}

int run_eval(const EvalOptions& opt) {
  const std::vector<PoseRecord> truth = read_poses_file(opt.truth_path);
  const std::vector<PredictionRecord> predictions =
      read_predictions_file(opt.pred_path);

  std::set<std::string> truth_ids, pred_ids;
  for (const auto& r : truth) {
    if (!truth_ids.insert(r.image_id).second) {
      throw Error(ErrorKind::InvalidInput,
                  "duplicate image_id '" + r.image_id + "' in truth file");
    }
  }
  for (const auto& r : predictions) {
    if (!pred_ids.insert(r.image_id).second) {
      throw Error(ErrorKind::InvalidInput,
                  "duplicate image_id '" + r.image_id + "' in predictions file");
    }
  }
  std::vector<std::string> missing_pred, missing_truth;
  std::set_difference(truth_ids.begin(), truth_ids.end(), pred_ids.begin(),
                      pred_ids.end(), std::back_inserter(missing_pred));
  std::set_difference(pred_ids.begin(), pred_ids.end(), truth_ids.begin(),
                      truth_ids.end(), std::back_inserter(missing_truth));
  if (!missing_pred.empty() || !missing_truth.empty()) {
    for (const auto& id : missing_pred) {
      std::cerr << "missing from predictions: " << id << "\n";
    }
    for (const auto& id : missing_truth) {
      std::cerr << "missing from truth: " << id << "\n";
    }
    return 1;
  }

  // Accumulate in sorted image_id order so the aggregates are reproducible.
  std::vector<const PoseRecord*> truth_sorted;
  for (const auto& r : truth) truth_sorted.push_back(&r);
  std::sort(truth_sorted.begin(), truth_sorted.end(),
            [](const PoseRecord* a, const PoseRecord* b) {
              return a->image_id < b->image_id;
            });
  std::vector<double> pitch, yaw, roll;
  for (const PoseRecord* t : truth_sorted) {
    const auto it = std::find_if(predictions.begin(), predictions.end(),
                                 [&](const PredictionRecord& p) {
                                   return p.image_id == t->image_id;
                                 });
    pitch.push_back(std::abs(it->pitch - t->pitch));
    yaw.push_back(std::abs(it->yaw - t->yaw));
    roll.push_back(std::abs(it->roll - t->roll));
  }

  const std::string report =
      format_eval_report(make_angle_stats(pitch), make_angle_stats(yaw),
                         make_angle_stats(roll), truth_sorted.size(), 0);
  std::cout << report;
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) {
      throw Error(ErrorKind::ParseError,
                  opt.out_path + ": cannot open for writing");
    }
    out << report;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Four-point head pose estimation"};
  app.require_subcommand(1);

  EstimateOptions est;
  CLI::App* estimate =
      app.add_subcommand("estimate", "Estimate poses from a landmarks file");
  estimate->add_option("--model", est.model_path,
                       "Model CSV (label,x,y,z); bundled model when omitted");
  estimate->add_option("--landmarks", est.landmarks_path,
                       "Landmarks CSV (image_id,label,u,v)")
      ->required();
  estimate->add_option("--out", est.out_path, "Predictions CSV to write")
      ->required();
  estimate->add_option("--eta", est.eta, "Departure penalty weight")
      ->check(CLI::NonNegativeNumber);
  estimate->add_option("--tol", est.tol, "Stop once a step improves by <= this")
      ->check(CLI::NonNegativeNumber);
  estimate->add_option("--max-iter", est.max_iter, "Optimizer iteration cap")
      ->check(CLI::NonNegativeNumber);
  estimate
      ->add_option("--constraints", est.constraints,
                   "Morph constraint pattern")
      ->check(CLI::IsMember({"symmetric", "free"}));
  estimate->add_flag("--no-morph", est.no_morph,
                     "Skip morphing; use the initial rotation only");
  estimate->add_option("--jobs", est.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);

  SynthOptions syn;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate synthetic landmark batches");
  synth->add_option("--model", syn.model_path,
                    "Model CSV; bundled model when omitted");
  synth->add_option("--poses", syn.poses_path,
                    "Pose list CSV (image_id,pitch,yaw,roll)")
      ->required();
  synth->add_option("--out", syn.out_path, "Landmarks CSV to write")
      ->required();
  synth->add_option("--truth", syn.truth_path, "Ground-truth CSV to write")
      ->required();
  synth->add_option("--projection", syn.projection, "Camera model")
      ->check(CLI::IsMember({"weak", "full"}));
  synth->add_option("--scale", syn.scale, "Weak-perspective scale")
      ->check(CLI::PositiveNumber);
  synth->add_option("--tx", syn.tx, "Camera-frame x translation");
  synth->add_option("--ty", syn.ty, "Camera-frame y translation");
  synth->add_option("--focal", syn.focal, "Focal length (full projection)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--depth", syn.depth, "Camera distance (full projection)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--noise-px", syn.noise_px, "Gaussian pixel noise sigma")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", syn.seed, "Base RNG seed");

  EvalOptions ev;
  CLI::App* eval =
      app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--truth", ev.truth_path, "Ground-truth CSV")->required();
  eval->add_option("--pred", ev.pred_path, "Predictions CSV")->required();
  eval->add_option("--out", ev.out_path, "Also write the report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) return run_estimate(est);
    if (synth->parsed()) return run_synth(syn);
    return run_eval(ev);
  } catch (const headpose::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
