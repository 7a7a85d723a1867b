#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "headpose/csv.hpp"
#include "headpose/estimator.hpp"
#include "headpose/synthetic.hpp"
#include "test_support.hpp"

using namespace headpose;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("headpose_cli_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path file(const std::string& name, const std::string& contents) const {
    const fs::path p = path / name;
    std::ofstream out(p, std::ios::binary);
    out << contents;
    return p;
  }
  static inline int counter = 0;
};

// Runs the CLI under test (path from HEADPOSE_CLI) with stdout and stderr
// captured into files inside `dir`.
RunResult run_cli(const TempDir& dir, const std::string& args) {
  const char* exe = std::getenv("HEADPOSE_CLI");
  REQUIRE_MESSAGE(exe != nullptr,
                  "HEADPOSE_CLI must point at the built binary");
  const fs::path out = dir.path / "_stdout.txt";
  const fs::path err = dir.path / "_stderr.txt";
  const std::string command = std::string(exe) + " " + args + " > " +
                              out.string() + " 2> " + err.string();
  const int status = std::system(command.c_str());
  RunResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

const std::string kPosesCsv =
    "image_id,pitch,yaw,roll\n"
    "p00,0,0,0\n"
    "p01,10,-15,5\n"
    "p02,-20,25,-8\n"
    "p03,15,5,12\n"
    "p04,-5,-30,3\n";

}  // namespace

TEST_CASE("synth projects an identity pose onto the model coordinates") {
  TempDir dir;
  const fs::path poses = dir.file("poses.csv", "image_id,pitch,yaw,roll\nid0,0,0,0\n");
  const fs::path out = dir.path / "landmarks.csv";
  const fs::path truth = dir.path / "truth.csv";
  const RunResult r = run_cli(dir, "synth --poses " + poses.string() +
                                       " --out " + out.string() + " --truth " +
                                       truth.string());
  CHECK(r.code == 0);
  CHECK(r.err.empty());

  const auto groups = read_landmarks_file(out);
  REQUIRE(groups.size() == 1);
  const FeaturePointSet3D model = default_model();
  REQUIRE(groups[0].landmarks.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(groups[0].landmarks[i].label == model[i].label);
    CHECK(groups[0].landmarks[i].position.x() == model[i].position.x());
    CHECK(groups[0].landmarks[i].position.y() == model[i].position.y());
  }
  const auto truth_records = read_poses_file(truth);
  REQUIRE(truth_records.size() == 1);
  CHECK(truth_records[0].pitch == 0.0);
}

TEST_CASE("synth output is byte-reproducible for a fixed seed") {
  TempDir dir;
  const fs::path poses = dir.file("poses.csv", kPosesCsv);
  const std::string args = " --poses " + poses.string() + " --noise-px 2 --seed 99";
  const fs::path out1 = dir.path / "first.csv";
  const fs::path out2 = dir.path / "second.csv";
  CHECK(run_cli(dir, "synth" + args + " --out " + out1.string() + " --truth " +
                         (dir.path / "t1.csv").string())
            .code == 0);
  CHECK(run_cli(dir, "synth" + args + " --out " + out2.string() + " --truth " +
                         (dir.path / "t2.csv").string())
            .code == 0);
  const std::string bytes1 = slurp(out1);
  CHECK(bytes1 == slurp(out2));
  CHECK(!bytes1.empty());

  // A different base seed must actually move the noise.
  const fs::path out3 = dir.path / "third.csv";
  CHECK(run_cli(dir, "synth --poses " + poses.string() +
                         " --noise-px 2 --seed 100 --out " + out3.string() +
                         " --truth " + (dir.path / "t3.csv").string())
            .code == 0);
  const auto a = read_landmarks_file(out1);
  const auto b = read_landmarks_file(out3);
  bool any_moved = false;
  for (size_t g = 0; g < a.size(); ++g) {
    for (size_t i = 0; i < a[g].landmarks.size(); ++i) {
      any_moved |= a[g].landmarks[i].position != b[g].landmarks[i].position;
    }
  }
  CHECK(any_moved);
}

TEST_CASE("synth supports the full projection model") {
  TempDir dir;
  const fs::path poses = dir.file("poses.csv", kPosesCsv);
  const fs::path out = dir.path / "landmarks.csv";
  const RunResult r = run_cli(
      dir, "synth --poses " + poses.string() + " --projection full" +
               " --focal 800 --depth 2000 --out " + out.string() + " --truth " +
               (dir.path / "truth.csv").string());
  CHECK(r.code == 0);
  const std::string bytes = slurp(out);
  CHECK(bytes.find("projection=full focal=800 depth=2000") != std::string::npos);
  CHECK(read_landmarks_file(out).size() == 5);
}

TEST_CASE("estimate round trip: synth, estimate, eval") {
  TempDir dir;
  const fs::path poses = dir.file("poses.csv", kPosesCsv);
  const fs::path landmarks = dir.path / "landmarks.csv";
  const fs::path truth = dir.path / "truth.csv";
  REQUIRE(run_cli(dir, "synth --poses " + poses.string() + " --out " +
                           landmarks.string() + " --truth " + truth.string())
              .code == 0);

  const fs::path pred = dir.path / "predictions.csv";
  const RunResult est = run_cli(dir, "estimate --landmarks " +
                                         landmarks.string() + " --out " +
                                         pred.string());
  CHECK(est.code == 0);
  CHECK(est.err.empty());
  const auto records = read_predictions_file(pred);
  REQUIRE(records.size() == 5);
  CHECK(std::is_sorted(records.begin(), records.end(),
                       [](const PredictionRecord& x, const PredictionRecord& y) {
                         return x.image_id < y.image_id;
                       }));
  for (const auto& rec : records) CHECK(rec.converged);

  // Against the true poses the report only needs to be sane: the rank-two
  // rotation fit has an intrinsic bias of a few degrees, so exact zeros are
  // not expected.
  const RunResult ev = run_cli(dir, "eval --truth " + truth.string() +
                                        " --pred " + pred.string());
  CHECK(ev.code == 0);
  CHECK(ev.out.rfind("# headpose eval\nangle,mae,std\n", 0) == 0);
  CHECK(ev.out.find("# images=5 failures=0\n") != std::string::npos);

  // Against itself the error is exactly zero.
  std::vector<PoseRecord> self;
  for (const auto& rec : records) {
    self.push_back({rec.image_id, rec.pitch, rec.yaw, rec.roll});
  }
  const fs::path self_truth = dir.path / "self_truth.csv";
  write_poses_file(self_truth, "self", self);
  const RunResult self_ev = run_cli(dir, "eval --truth " + self_truth.string() +
                                             " --pred " + pred.string());
  CHECK(self_ev.code == 0);
  CHECK(self_ev.out.find("pitch,0.00,0.00\n") != std::string::npos);
  CHECK(self_ev.out.find("yaw,0.00,0.00\n") != std::string::npos);
  CHECK(self_ev.out.find("roll,0.00,0.00\n") != std::string::npos);
}

TEST_CASE("estimate output does not depend on the job count") {
  TempDir dir;
  const fs::path poses = dir.file("poses.csv", kPosesCsv);
  const fs::path landmarks = dir.path / "landmarks.csv";
  REQUIRE(run_cli(dir, "synth --poses " + poses.string() + " --out " +
                           landmarks.string() + " --truth " +
                           (dir.path / "truth.csv").string())
              .code == 0);
  const fs::path serial = dir.path / "serial.csv";
  const fs::path parallel = dir.path / "parallel.csv";
  CHECK(run_cli(dir, "estimate --landmarks " + landmarks.string() +
                         " --jobs 1 --out " + serial.string())
            .code == 0);
  CHECK(run_cli(dir, "estimate --landmarks " + landmarks.string() +
                         " --jobs 8 --out " + parallel.string())
            .code == 0);
  const std::string serial_bytes = slurp(serial);
  CHECK(serial_bytes == slurp(parallel));
  CHECK(serial_bytes.find("--jobs") == std::string::npos);
}

TEST_CASE("estimate with --no-morph reports zero iterations") {
  TempDir dir;
  const fs::path poses = dir.file("poses.csv", kPosesCsv);
  const fs::path landmarks = dir.path / "landmarks.csv";
  REQUIRE(run_cli(dir, "synth --poses " + poses.string() + " --out " +
                           landmarks.string() + " --truth " +
                           (dir.path / "truth.csv").string())
              .code == 0);
  const fs::path pred = dir.path / "predictions.csv";
  const RunResult r = run_cli(dir, "estimate --no-morph --landmarks " +
                                       landmarks.string() + " --out " +
                                       pred.string());
  CHECK(r.code == 0);
  CHECK(slurp(pred).find("morph=off") != std::string::npos);
  for (const auto& rec : read_predictions_file(pred)) {
    CHECK(rec.iterations == 0);
    CHECK(rec.converged);
  }
}

TEST_CASE("estimate accepts an explicit model file") {
  TempDir dir;
  const fs::path poses = dir.file("poses.csv", kPosesCsv);
  const fs::path landmarks = dir.path / "landmarks.csv";
  REQUIRE(run_cli(dir, "synth --poses " + poses.string() + " --out " +
                           landmarks.string() + " --truth " +
                           (dir.path / "truth.csv").string())
              .code == 0);

  // The bundled model written out as CSV must behave identically to the
  // built-in default.
  std::string model_csv = "label,x,y,z\n";
  for (const auto& p : default_model()) {
    model_csv += p.label + "," + format_compact(p.position.x()) + "," +
                 format_compact(p.position.y()) + "," +
                 format_compact(p.position.z()) + "\n";
  }
  const fs::path model = dir.file("model.csv", model_csv);
  const fs::path with_file = dir.path / "with_file.csv";
  const fs::path with_default = dir.path / "with_default.csv";
  CHECK(run_cli(dir, "estimate --landmarks " + landmarks.string() +
                         " --model " + model.string() + " --out " +
                         with_file.string())
            .code == 0);
  CHECK(run_cli(dir, "estimate --landmarks " + landmarks.string() + " --out " +
                         with_default.string())
            .code == 0);
  CHECK(slurp(with_file) == slurp(with_default));
}

TEST_CASE("estimate keeps going past per-image failures") {
  TempDir dir;
  std::vector<LandmarkGroup> groups(2);
  groups[0].image_id = "bad_img";
  groups[0].landmarks = {{"chin", Vec2(0, -62)},
                         {"nose_tip", Vec2(0, -20)},
                         {"left_canthus", Vec2(-34, 18)}};
  groups[1].image_id = "good_img";
  groups[1].landmarks =
      test::project_model(EulerAngles::from_degrees(5, 10, -3), default_model());
  const fs::path landmarks = dir.path / "landmarks.csv";
  write_landmarks_file(landmarks, "fixture", groups);

  const fs::path pred = dir.path / "predictions.csv";
  const RunResult r = run_cli(dir, "estimate --landmarks " + landmarks.string() +
                                       " --out " + pred.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("bad_img: ") != std::string::npos);
  CHECK(r.err.find("four points") != std::string::npos);
  const auto records = read_predictions_file(pred);
  REQUIRE(records.size() == 1);
  CHECK(records[0].image_id == "good_img");
}

TEST_CASE("malformed input files exit with a parse diagnostic") {
  TempDir dir;
  const fs::path landmarks = dir.file("landmarks.csv",
                                      "image_id,label,u,v\n"
                                      "a,chin,1,2\n"
                                      "a,nose_tip,oops,4\n");
  const RunResult r = run_cli(dir, "estimate --landmarks " + landmarks.string() +
                                       " --out " +
                                       (dir.path / "pred.csv").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("error: ") != std::string::npos);
  CHECK(r.err.find(":3:") != std::string::npos);
  CHECK(r.err.find("bad u 'oops'") != std::string::npos);

  const fs::path empty = dir.file("empty.csv", "image_id,label,u,v\n");
  const RunResult r2 = run_cli(dir, "estimate --landmarks " + empty.string() +
                                        " --out " +
                                        (dir.path / "pred2.csv").string());
  CHECK(r2.code == 1);
  CHECK(r2.err.find("no records") != std::string::npos);
}

TEST_CASE("eval rejects mismatched and duplicate ids") {
  TempDir dir;
  write_poses_file(dir.path / "truth.csv", "fixture",
                   {{"a", 1, 2, 3}, {"b", 4, 5, 6}});
  write_predictions_file(dir.path / "pred.csv", "fixture",
                         {{"a", 1, 2, 3, 0, 0.0, true},
                          {"c", 4, 5, 6, 0, 0.0, true}});
  const RunResult r = run_cli(dir, "eval --truth " +
                                       (dir.path / "truth.csv").string() +
                                       " --pred " +
                                       (dir.path / "pred.csv").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("missing from predictions: b") != std::string::npos);
  CHECK(r.err.find("missing from truth: c") != std::string::npos);

  write_poses_file(dir.path / "dup.csv", "fixture",
                   {{"a", 1, 2, 3}, {"a", 4, 5, 6}});
  write_predictions_file(dir.path / "pred_a.csv", "fixture",
                         {{"a", 1, 2, 3, 0, 0.0, true}});
  const RunResult r2 = run_cli(dir, "eval --truth " +
                                        (dir.path / "dup.csv").string() +
                                        " --pred " +
                                        (dir.path / "pred_a.csv").string());
  CHECK(r2.code == 1);
  CHECK(r2.err.find("duplicate image_id 'a'") != std::string::npos);
}

TEST_CASE("eval aggregates hand-computed statistics") {
  TempDir dir;
  // Absolute pitch errors {2, 4} -> MAE 3, STD 1; yaw errors {1, 3} -> MAE 2,
  // STD 1; roll exact.
  write_poses_file(dir.path / "truth.csv", "fixture",
                   {{"a", 10, 0, 7}, {"b", 10, 0, -7}});
  write_predictions_file(dir.path / "pred.csv", "fixture",
                         {{"a", 8, 1, 7, 3, 1e-8, true},
                          {"b", 14, -3, -7, 4, 2e-8, true}});
  const fs::path report_file = dir.path / "report.txt";
  const RunResult r = run_cli(dir, "eval --truth " +
                                       (dir.path / "truth.csv").string() +
                                       " --pred " +
                                       (dir.path / "pred.csv").string() +
                                       " --out " + report_file.string());
  CHECK(r.code == 0);
  const std::string expected =
      "# headpose eval\n"
      "angle,mae,std\n"
      "pitch,3.00,1.00\n"
      "yaw,2.00,1.00\n"
      "roll,0.00,0.00\n"
      "# images=2 failures=0\n";
  CHECK(r.out == expected);
  CHECK(slurp(report_file) == expected);
}

TEST_CASE("bad command lines fail without touching outputs") {
  TempDir dir;
  CHECK(run_cli(dir, "estimate").code != 0);  // --landmarks/--out required
  CHECK(run_cli(dir, "bogus").code != 0);
  CHECK(run_cli(dir, "").code != 0);  // a subcommand is required
  const fs::path in = dir.path / "x.csv";
  const fs::path out = dir.path / "y.csv";
  CHECK(run_cli(dir, "estimate --landmarks " + in.string() + " --out " +
                         out.string() + " --constraints diagonal")
            .code != 0);
  CHECK(!fs::exists(out));
}
