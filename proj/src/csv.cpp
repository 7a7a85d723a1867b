#include "headpose/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace headpose {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, size_t line,
                             const std::string& message) {
  throw Error(ErrorKind::ParseError,
              path.string() + ":" + std::to_string(line) + ": " + message);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::filesystem::path& path, size_t line,
                    const std::string& field, const char* what) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty() ||
      !std::isfinite(value)) {
    parse_fail(path, line, std::string("bad ") + what + " '" + field + "'");
  }
  return value;
}

long parse_long(const std::filesystem::path& path, size_t line,
                const std::string& field, const char* what) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    parse_fail(path, line, std::string("bad ") + what + " '" + field + "'");
  }
  return value;
}

// Streams non-comment, non-empty lines to `row` after validating the header.
template <typename RowFn>
void read_rows(const std::filesystem::path& path,
               const std::vector<std::string>& header, RowFn&& row) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::ParseError,
                path.string() + ": cannot open for reading");
  }
  std::string line;
  size_t line_no = 0;
  bool saw_header = false;
  size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::vector<std::string> fields = split_fields(stripped);
    if (!saw_header) {
      if (fields != header) {
        std::string expected;
        for (size_t i = 0; i < header.size(); ++i) {
          expected += (i ? "," : "") + header[i];
        }
        parse_fail(path, line_no, "expected header '" + expected + "'");
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
    }
    row(line_no, fields);
    ++records;
  }
  if (!saw_header) parse_fail(path, line_no, "missing header row");
  if (records == 0) parse_fail(path, line_no, "no records");
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // keep '\n' endings everywhere
  if (!out) {
    throw Error(ErrorKind::ParseError,
                path.string() + ": cannot open for writing");
  }
  return out;
}

}  // namespace

FeaturePointSet3D read_model_file(const std::filesystem::path& path) {
  FeaturePointSet3D model;
  read_rows(path, {"label", "x", "y", "z"},
            [&](size_t line, const std::vector<std::string>& f) {
              if (f[0].empty()) parse_fail(path, line, "empty label");
              model.push_back({f[0], Vec3(parse_double(path, line, f[1], "x"),
                                          parse_double(path, line, f[2], "y"),
                                          parse_double(path, line, f[3], "z"))});
            });
  return model;
}

std::vector<LandmarkGroup> read_landmarks_file(
    const std::filesystem::path& path) {
  std::vector<LandmarkGroup> groups;
  read_rows(path, {"image_id", "label", "u", "v"},
            [&](size_t line, const std::vector<std::string>& f) {
              if (f[0].empty()) parse_fail(path, line, "empty image_id");
              if (f[1].empty()) parse_fail(path, line, "empty label");
              auto it = std::find_if(
                  groups.begin(), groups.end(),
                  [&](const LandmarkGroup& g) { return g.image_id == f[0]; });
              if (it == groups.end()) {
                groups.push_back({f[0], {}});
                it = std::prev(groups.end());
              }
              it->landmarks.push_back(
                  {f[1], Vec2(parse_double(path, line, f[2], "u"),
                              parse_double(path, line, f[3], "v"))});
            });
  return groups;
}

std::vector<PoseRecord> read_poses_file(const std::filesystem::path& path) {
  std::vector<PoseRecord> records;
  read_rows(path, {"image_id", "pitch", "yaw", "roll"},
            [&](size_t line, const std::vector<std::string>& f) {
              if (f[0].empty()) parse_fail(path, line, "empty image_id");
              records.push_back({f[0], parse_double(path, line, f[1], "pitch"),
                                 parse_double(path, line, f[2], "yaw"),
                                 parse_double(path, line, f[3], "roll")});
            });
  return records;
}

std::vector<PredictionRecord> read_predictions_file(
    const std::filesystem::path& path) {
  std::vector<PredictionRecord> records;
  read_rows(
      path,
      {"image_id", "pitch", "yaw", "roll", "iterations", "final_objective",
       "converged"},
      [&](size_t line, const std::vector<std::string>& f) {
        if (f[0].empty()) parse_fail(path, line, "empty image_id");
        PredictionRecord r;
        r.image_id = f[0];
        r.pitch = parse_double(path, line, f[1], "pitch");
        r.yaw = parse_double(path, line, f[2], "yaw");
        r.roll = parse_double(path, line, f[3], "roll");
        r.iterations = static_cast<int>(
            parse_long(path, line, f[4], "iterations"));
        r.objective = parse_double(path, line, f[5], "final_objective");
        const long converged = parse_long(path, line, f[6], "converged");
        if (converged != 0 && converged != 1) {
          parse_fail(path, line, "bad converged '" + f[6] + "'");
        }
        r.converged = converged == 1;
        records.push_back(std::move(r));
      });
  return records;
}

void write_landmarks_file(const std::filesystem::path& path,
                          const std::string& comment,
                          const std::vector<LandmarkGroup>& groups) {
  std::ofstream out = open_for_write(path);
  out << "# " << comment << "\n";
  out << "image_id,label,u,v\n";
  for (const auto& group : groups) {
    for (const auto& p : group.landmarks) {
      out << group.image_id << ',' << p.label << ','
          << format_fixed(p.position.x(), 6) << ','
          << format_fixed(p.position.y(), 6) << "\n";
    }
  }
}

void write_poses_file(const std::filesystem::path& path,
                      const std::string& comment,
                      const std::vector<PoseRecord>& records) {
  std::ofstream out = open_for_write(path);
  out << "# " << comment << "\n";
  out << "image_id,pitch,yaw,roll\n";
  for (const auto& r : records) {
    out << r.image_id << ',' << format_fixed(r.pitch, 6) << ','
        << format_fixed(r.yaw, 6) << ',' << format_fixed(r.roll, 6) << "\n";
  }
}

void write_predictions_file(const std::filesystem::path& path,
                            const std::string& comment,
                            const std::vector<PredictionRecord>& records) {
  std::ofstream out = open_for_write(path);
  out << "# " << comment << "\n";
  out << "image_id,pitch,yaw,roll,iterations,final_objective,converged\n";
  for (const auto& r : records) {
    out << r.image_id << ',' << format_fixed(r.pitch, 6) << ','
        << format_fixed(r.yaw, 6) << ',' << format_fixed(r.roll, 6) << ','
        << r.iterations << ',' << format_scientific(r.objective, 6) << ','
        << (r.converged ? 1 : 0) << "\n";
  }
}

std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

std::string format_scientific(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*e", decimals, value);
  return buffer;
}

std::string format_compact(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

std::string format_eval_report(const AngleStats& pitch, const AngleStats& yaw,
                               const AngleStats& roll, size_t images,
                               size_t failures) {
  std::string out = "# headpose eval\n";
  out += "angle,mae,std\n";
  const auto row = [&](const char* name, const AngleStats& stats) {
    out += std::string(name) + "," + format_fixed(stats.mae, 2) + "," +
           format_fixed(stats.stddev, 2) + "\n";
  };
  row("pitch", pitch);
  row("yaw", yaw);
  row("roll", roll);
  out += "# images=" + std::to_string(images) +
         " failures=" + std::to_string(failures) + "\n";
  return out;
}

}  // namespace headpose
