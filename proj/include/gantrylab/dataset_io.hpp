#pragma once

// Master/subimage metadata records (schema version 1.5): emission,
// strict parsing with itemized validation, cropping and position classes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gantrylab/camera_geometry.hpp"
#include "gantrylab/errors.hpp"
#include "gantrylab/image.hpp"

namespace gantrylab {

inline constexpr const char* kSchemaVersion = "1.5";

struct CameraPoseRecord {
  double x = 0.0, y = 0.0, z = 0.0;
  double polar = 90.0;      // degrees from +Z; polar = 90 - tilt
  double azimuthal = 0.0;   // degrees; equals pan

  friend bool operator==(const CameraPoseRecord&, const CameraPoseRecord&) = default;
};

inline CameraPoseRecord to_record(const CameraPose& pose) {
  return {pose.position.x, pose.position.y, pose.position.z, 90.0 - pose.tilt, pose.pan};
}

struct SubimageRecord {
  std::string plant_id;
  std::string label;
  std::string scientific_name;
  int position_id = 0;
  std::string subimage_file_name;
  std::string date_planted;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

  NormalizedBox box() const { return {x_min, x_max, y_min, y_max}; }

  friend bool operator==(const SubimageRecord&, const SubimageRecord&) = default;
};

struct MasterImageRecord {
  std::string version = kSchemaVersion;
  std::string file_name;
  std::string bb_file_name;
  std::string date;
  std::string time;
  std::string room;
  std::string institute;
  std::string camera;
  std::string lens;
  CameraPoseRecord camera_pose{};
  std::vector<SubimageRecord> bounding_boxes;

  friend bool operator==(const MasterImageRecord&, const MasterImageRecord&) = default;
};

struct ValidationIssue {
  std::string path;
  std::string message;
};

class ValidationFailed : public std::runtime_error {
 public:
  explicit ValidationFailed(std::vector<ValidationIssue> issues)
      : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  static std::string summarize(const std::vector<ValidationIssue>& issues) {
    std::string s = "metadata validation failed";
    for (const auto& i : issues) s += "\n  " + i.path + ": " + i.message;
    return s;
  }
  std::vector<ValidationIssue> issues_;
};

/// Coordinate convention of the emitted x values. `UpperRight` mirrors x so
/// that x = 0 is the right image edge.
enum class BoxOrigin { TopLeft, UpperRight };

namespace names {

inline const std::regex& master_pattern() {
  static const std::regex re(R"(^(\d{14})-pose(\d+)\.(jpg|png)$)");
  return re;
}
inline const std::regex& bb_pattern() {
  static const std::regex re(R"(^(\d{14})-pose(\d+)-bb\.(jpg|png)$)");
  return re;
}
inline const std::regex& subimage_pattern() {
  static const std::regex re(R"(^(\d{14})(\d+)\.(jpg|png)$)");
  return re;
}

/// "<stamp>-pose<N>.<ext>" -> "<stamp>-pose<N>-bb.<ext>"
inline std::string bb_name_for(const std::string& file_name) {
  const auto dot = file_name.rfind('.');
  if (dot == std::string::npos) return file_name + "-bb";
  return file_name.substr(0, dot) + "-bb" + file_name.substr(dot);
}

inline std::string master_name(const std::string& stamp14, std::size_t pose_index,
                               const std::string& ext) {
  return stamp14 + "-pose" + std::to_string(pose_index) + "." + ext;
}

inline std::string subimage_name(const std::string& stamp14, int position_id,
                                 const std::string& ext) {
  return stamp14 + std::to_string(position_id) + "." + ext;
}

inline bool valid_stamp(const std::string& s) {
  if (s.size() != 14) return false;
  auto num = [&](int pos, int len) { return std::stoi(s.substr(pos, len)); };
  const int mo = num(4, 2), d = num(6, 2), h = num(8, 2), mi = num(10, 2), se = num(12, 2);
  return mo >= 1 && mo <= 12 && d >= 1 && d <= 31 && h <= 23 && mi <= 59 && se <= 59;
}

}  // namespace names

namespace detail {

inline bool matches(const std::string& s, const char* pattern) {
  return std::regex_match(s, std::regex(pattern));
}

}  // namespace detail

/// Semantic checks shared by emission and parsing.
inline std::vector<ValidationIssue> validate(const MasterImageRecord& r) {
  std::vector<ValidationIssue> issues;
  auto fail = [&](std::string path, std::string msg) {
    issues.push_back({std::move(path), std::move(msg)});
  };
  if (r.version != kSchemaVersion)
    fail("version", "unsupported version '" + r.version + "', expected 1.5");

  std::smatch m;
  std::string stamp;
  if (!std::regex_match(r.file_name, m, names::master_pattern()) ||
      !names::valid_stamp(m[1].str())) {
    fail("file_name", "'" + r.file_name + "' does not match yyyymmddhhmmss-pose<N>.jpg");
  } else {
    stamp = m[1].str();
    if (r.bb_file_name != names::bb_name_for(r.file_name))
      fail("bb_file_name", "expected '" + names::bb_name_for(r.file_name) + "'");
  }
  if (!std::regex_match(r.bb_file_name, names::bb_pattern()))
    fail("bb_file_name", "'" + r.bb_file_name + "' does not match yyyymmddhhmmss-pose<N>-bb.jpg");
  if (!detail::matches(r.date, R"(^\d{4}-\d{2}-\d{2}$)"))
    fail("date", "expected yyyy-mm-dd");
  if (!detail::matches(r.time, R"(^\d{2}:\d{2}:\d{2}$)"))
    fail("time", "expected hh:mm:ss");
  for (const auto* v : {&r.camera_pose.x, &r.camera_pose.y, &r.camera_pose.z,
                        &r.camera_pose.polar, &r.camera_pose.azimuthal})
    if (!std::isfinite(*v)) fail("camera_pose", "non-finite value");

  std::set<std::string> seen_names;
  for (std::size_t i = 0; i < r.bounding_boxes.size(); ++i) {
    const auto& b = r.bounding_boxes[i];
    const std::string base = "bounding_boxes[" + std::to_string(i) + "].";
    if (b.plant_id.empty()) fail(base + "plant_id", "must not be empty");
    if (b.position_id < 0) fail(base + "position_id", "must be non-negative");
    if (!std::regex_match(b.subimage_file_name, m, names::subimage_pattern()) ||
        !names::valid_stamp(m[1].str().substr(0, 14)))
      fail(base + "subimage_file_name",
           "'" + b.subimage_file_name + "' does not match yyyymmddhhmmss<position-id>.jpg");
    else if (m[2].str() != std::to_string(b.position_id))
      fail(base + "subimage_file_name", "position id suffix does not match position_id");
    if (!seen_names.insert(b.subimage_file_name).second)
      fail(base + "subimage_file_name", "duplicate subimage file name");
    if (!detail::matches(b.date_planted, R"(^\d{4}-\d{2}-\d{2}$)"))
      fail(base + "date_planted", "expected yyyy-mm-dd");
    if (!(b.x_min >= 0.0 && b.x_min < b.x_max))
      fail(base + "x_min", "requires 0 <= x_min < x_max");
    if (!(b.x_max <= 1.0)) fail(base + "x_max", "requires x_max <= 1");
    if (!(b.y_min >= 0.0 && b.y_min < b.y_max))
      fail(base + "y_min", "requires 0 <= y_min < y_max");
    if (!(b.y_max <= 1.0)) fail(base + "y_max", "requires y_max <= 1");
  }
  return issues;
}

/// Serializes a record. Throws ValidationFailed when it breaks the schema.
inline nlohmann::ordered_json emit_metadata(const MasterImageRecord& r,
                                            BoxOrigin origin = BoxOrigin::TopLeft) {
  if (auto issues = validate(r); !issues.empty()) throw ValidationFailed(std::move(issues));
  nlohmann::ordered_json boxes = nlohmann::ordered_json::array();
  for (const auto& b : r.bounding_boxes) {
    double x_min = b.x_min, x_max = b.x_max;
    if (origin == BoxOrigin::UpperRight) {
      x_min = 1.0 - b.x_max;
      x_max = 1.0 - b.x_min;
    }
    boxes.push_back({{"plant_id", b.plant_id},
                     {"label", b.label},
                     {"scientific_name", b.scientific_name},
                     {"position_id", b.position_id},
                     {"subimage_file_name", b.subimage_file_name},
                     {"date_planted", b.date_planted},
                     {"x_min", x_min},
                     {"x_max", x_max},
                     {"y_min", b.y_min},
                     {"y_max", b.y_max}});
  }
  return {{"version", r.version},
          {"file_name", r.file_name},
          {"bb_file_name", r.bb_file_name},
          {"date", r.date},
          {"time", r.time},
          {"room", r.room},
          {"institute", r.institute},
          {"camera", r.camera},
          {"lens", r.lens},
          {"camera_pose",
           {{"x", r.camera_pose.x},
            {"y", r.camera_pose.y},
            {"z", r.camera_pose.z},
            {"polar", r.camera_pose.polar},
            {"azimuthal", r.camera_pose.azimuthal}}},
          {"bounding_boxes", boxes}};
}

inline std::string emit_metadata_string(const MasterImageRecord& r,
                                        BoxOrigin origin = BoxOrigin::TopLeft) {
  return emit_metadata(r, origin).dump(2) + "\n";
}

struct ParseResult {
  std::optional<MasterImageRecord> record;  // set when the document is well-formed
  std::vector<ValidationIssue> errors;

  bool ok() const { return record.has_value() && errors.empty(); }
};

namespace detail {

template <typename Json>
class FieldReader {
 public:
  FieldReader(const Json& obj, std::string prefix, std::vector<ValidationIssue>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {}

  void check_keys(std::initializer_list<const char*> allowed) {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&](const char* k) { return it.key() == k; }) == allowed.end())
        errors_.push_back({prefix_ + it.key(), "unknown field"});
    }
  }

  void str(const char* key, std::string& out) {
    if (const Json* v = find(key)) {
      if (v->is_string()) out = v->template get<std::string>();
      else errors_.push_back({prefix_ + key, "expected a string"});
    }
  }
  void num(const char* key, double& out) {
    if (const Json* v = find(key)) {
      if (v->is_number()) out = v->template get<double>();
      else errors_.push_back({prefix_ + key, "expected a number"});
    }
  }
  void integer(const char* key, int& out) {
    if (const Json* v = find(key)) {
      if (v->is_number_integer()) out = v->template get<int>();
      else errors_.push_back({prefix_ + key, "expected an integer"});
    }
  }
  const Json* find(const char* key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      errors_.push_back({prefix_ + key, "missing field"});
      return nullptr;
    }
    return &*it;
  }

 private:
  const Json& obj_;
  std::string prefix_;
  std::vector<ValidationIssue>& errors_;
};

}  // namespace detail

/// Parses a metadata document and collects every schema violation.
inline ParseResult parse_and_validate(const std::string& text,
                                      BoxOrigin origin = BoxOrigin::TopLeft) {
  ParseResult result;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    result.errors.push_back({"", std::string("malformed JSON: ") + e.what()});
    return result;
  }
  if (!doc.is_object()) {
    result.errors.push_back({"", "top level must be an object"});
    return result;
  }

  auto& errs = result.errors;
  MasterImageRecord r;
  r.version.clear();
  detail::FieldReader top(doc, "", errs);
  top.check_keys({"version", "file_name", "bb_file_name", "date", "time", "room", "institute",
                  "camera", "lens", "camera_pose", "bounding_boxes"});
  top.str("version", r.version);
  top.str("file_name", r.file_name);
  top.str("bb_file_name", r.bb_file_name);
  top.str("date", r.date);
  top.str("time", r.time);
  top.str("room", r.room);
  top.str("institute", r.institute);
  top.str("camera", r.camera);
  top.str("lens", r.lens);

  if (const auto* pose = top.find("camera_pose")) {
    if (!pose->is_object()) {
      errs.push_back({"camera_pose", "expected an object"});
    } else {
      detail::FieldReader pr(*pose, "camera_pose.", errs);
      pr.check_keys({"x", "y", "z", "polar", "azimuthal"});
      pr.num("x", r.camera_pose.x);
      pr.num("y", r.camera_pose.y);
      pr.num("z", r.camera_pose.z);
      pr.num("polar", r.camera_pose.polar);
      pr.num("azimuthal", r.camera_pose.azimuthal);
    }
  }

  if (const auto* boxes = top.find("bounding_boxes")) {
    if (!boxes->is_array()) {
      errs.push_back({"bounding_boxes", "expected an array"});
    } else {
      for (std::size_t i = 0; i < boxes->size(); ++i) {
        const auto& item = (*boxes)[i];
        const std::string base = "bounding_boxes[" + std::to_string(i) + "].";
        if (!item.is_object()) {
          errs.push_back({base.substr(0, base.size() - 1), "expected an object"});
          continue;
        }
        SubimageRecord b;
        detail::FieldReader br(item, base, errs);
        br.check_keys({"plant_id", "label", "scientific_name", "position_id",
                       "subimage_file_name", "date_planted", "x_min", "x_max", "y_min",
                       "y_max"});
        br.str("plant_id", b.plant_id);
        br.str("label", b.label);
        br.str("scientific_name", b.scientific_name);
        br.integer("position_id", b.position_id);
        br.str("subimage_file_name", b.subimage_file_name);
        br.str("date_planted", b.date_planted);
        br.num("x_min", b.x_min);
        br.num("x_max", b.x_max);
        br.num("y_min", b.y_min);
        br.num("y_max", b.y_max);
        if (origin == BoxOrigin::UpperRight) {
          const double lo = 1.0 - b.x_max;
          b.x_max = 1.0 - b.x_min;
          b.x_min = lo;
        }
        r.bounding_boxes.push_back(std::move(b));
      }
    }
  }

  auto semantic = validate(r);
  errs.insert(errs.end(), semantic.begin(), semantic.end());
  result.record = std::move(r);
  return result;
}

/// Pixel rectangle [round(x_min W), round(x_max W)) x [round(y_min H), round(y_max H)).
struct PixelRect {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

inline PixelRect to_pixel_rect(const NormalizedBox& box, int width, int height) {
  return {static_cast<int>(std::lround(box.x_min * width)),
          static_cast<int>(std::lround(box.x_max * width)),
          static_cast<int>(std::lround(box.y_min * height)),
          static_cast<int>(std::lround(box.y_max * height))};
}

inline Image crop(const Image& master, const NormalizedBox& box) {
  if (!box.valid()) throw CropError("crop: invalid normalized box");
  const PixelRect r = to_pixel_rect(box, master.width(), master.height());
  if (r.width() <= 0 || r.height() <= 0) throw CropError("crop: box has zero area after rounding");
  Image out(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) out.at(x, y) = master.at(r.x0 + x, r.y0 + y);
  return out;
}

/// Copy of `master` with each box outlined, `thickness` pixels drawn
/// inward from the box edge.
inline Image draw_boxes(const Image& master, const std::vector<NormalizedBox>& boxes,
                        Rgb color = {255, 0, 0}, int thickness = 3) {
  Image out = master;
  for (const auto& b : boxes) {
    const PixelRect r = to_pixel_rect(b, master.width(), master.height());
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) {
        const bool edge = x < r.x0 + thickness || x >= r.x1 - thickness ||
                          y < r.y0 + thickness || y >= r.y1 - thickness;
        if (edge) out.at(x, y) = color;
      }
    }
  }
  return out;
}

/// Edge when the position lies within `margin` of the XY boundary of the
/// traversable volume.
inline PositionClass classify_position(int /*position_id*/, const Vec3& position,
                                       const Volume& volume, double margin) {
  const double d = std::min({position.x - volume.min.x, volume.max.x - position.x,
                             position.y - volume.min.y, volume.max.y - position.y});
  return d <= margin ? PositionClass::Edge : PositionClass::Interior;
}

}  // namespace gantrylab
