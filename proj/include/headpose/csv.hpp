#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "headpose/normalization.hpp"
#include "headpose/synthetic.hpp"

namespace headpose {

// All files are UTF-8 CSV: an optional leading '#' provenance comment, a
// header row, then records. Numeric fields use the decimal point regardless
// of locale. Parse failures throw parse-error Errors as "path:line: message".

struct PoseRecord {
  std::string image_id;
  double pitch = 0.0;  // degrees
  double yaw = 0.0;
  double roll = 0.0;
};

struct PredictionRecord {
  std::string image_id;
  double pitch = 0.0;  // degrees
  double yaw = 0.0;
  double roll = 0.0;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
};

// All landmark rows of one image, in file order.
struct LandmarkGroup {
  std::string image_id;
  FeaturePointSet2D landmarks;
};

// model.csv: label,x,y,z
FeaturePointSet3D read_model_file(const std::filesystem::path& path);

// landmarks.csv: image_id,label,u,v — grouped by image_id in order of first
// appearance.
std::vector<LandmarkGroup> read_landmarks_file(const std::filesystem::path& path);

// poses.csv / truth.csv: image_id,pitch,yaw,roll (degrees)
std::vector<PoseRecord> read_poses_file(const std::filesystem::path& path);

// predictions.csv: image_id,pitch,yaw,roll,iterations,final_objective,converged
std::vector<PredictionRecord> read_predictions_file(
    const std::filesystem::path& path);

// Writers emit "# <comment>" first, then the header, then the rows. Angles
// are printed at 6 decimals, objectives in scientific notation, converged as
// 1/0.
void write_landmarks_file(const std::filesystem::path& path,
                          const std::string& comment,
                          const std::vector<LandmarkGroup>& groups);
void write_poses_file(const std::filesystem::path& path,
                      const std::string& comment,
                      const std::vector<PoseRecord>& records);
void write_predictions_file(const std::filesystem::path& path,
                            const std::string& comment,
                            const std::vector<PredictionRecord>& records);

// Fixed-point and scientific snprintf-backed formatting (always '.' decimal).
std::string format_fixed(double value, int decimals);
std::string format_scientific(double value, int decimals);
std::string format_compact(double value);  // shortest %g form, for headers

// The evaluation report: per-angle MAE and STD at 2 decimals plus a tally
// line. Identical bytes go to the console and to the optional report file.
std::string format_eval_report(const AngleStats& pitch, const AngleStats& yaw,
                               const AngleStats& roll, size_t images,
                               size_t failures);

}  // namespace headpose
