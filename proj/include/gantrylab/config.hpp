#pragma once

// Toolkit configuration and JSON (de)serialization of the file formats:
// config, scene, waypoints, poses, routes and run logs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gantrylab/camera_geometry.hpp"
#include "gantrylab/dataset_io.hpp"
#include "gantrylab/errors.hpp"
#include "gantrylab/kinematics.hpp"
#include "gantrylab/route_planner.hpp"
#include "gantrylab/scene_simulator.hpp"

namespace gantrylab {

using Json = nlohmann::ordered_json;

struct ToolkitConfig {
  MotionContext motion{};
  CameraIntrinsics intrinsics{};
  TimingConfig timing{};
  ZigzagParams zigzag{200.0, 200.0};
  PoseRing pose_ring{{250.0}, {350.0, 600.0}, 4};
  std::string scene_path;
  std::string output_dir = "run";
  BoxOrigin box_origin = BoxOrigin::TopLeft;
  int render_scale = 4;
  bool jpg_names = false;  // name files *.jpg like the original dataset
  double edge_margin = 100.0;
  std::string start_time = "2020-06-01T08:00:00";
  std::string room = "LAB1";
  std::string institute = "UW";
  std::string camera = "GoPro";
  std::string lens = "Hero 7 Black";
  std::uint64_t seed = 0;

  /// Traversable volume implied by the axis travel limits.
  Volume volume() const {
    return {{0.0, 0.0, 0.0},
            {motion.axes[0].travel_limit, motion.axes[1].travel_limit,
             motion.axes[2].travel_limit}};
  }

  std::string image_extension() const { return jpg_names ? "jpg" : "png"; }

  void validate() const {
    for (const auto& a : motion.axes) a.validate();
    motion.profile.validate();
    intrinsics.validate();
    timing.validate();
    if (render_scale < 1) throw DomainError("render_scale must be >= 1");
    if (!(zigzag.slab_width > 0.0) || !(zigzag.column_width > 0.0))
      throw DomainError("zigzag widths must be positive");
    if (edge_margin < 0.0) throw DomainError("edge_margin must be non-negative");
    timefmt::parse_iso(start_time);
  }
};

namespace io {

inline Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

inline Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw DomainError("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Json rgb_json(const Rgb& c) { return Json::array({c.r, c.g, c.b}); }

inline Rgb rgb_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw DomainError("expected [r, g, b]");
  auto ch = [](const nlohmann::json& v) {
    const int x = v.get<int>();
    if (x < 0 || x > 255) throw DomainError("color channel outside [0, 255]");
    return static_cast<std::uint8_t>(x);
  };
  return {ch(j[0]), ch(j[1]), ch(j[2])};
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes via a temporary sibling and rename, so readers never observe a
/// partially written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out.flush()) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// --- config -----------------------------------------------------------------

inline Json to_json(const ToolkitConfig& c) {
  Json axes = Json::array();
  for (const auto& a : c.motion.axes)
    axes.push_back({{"distance_per_rev", a.distance_per_rev},
                    {"step_angle_fraction", a.step_angle_fraction},
                    {"gear_ratio", a.gear_ratio},
                    {"travel_limit", a.travel_limit}});
  return {
      {"gantry",
       {{"axes", axes},
        {"stepping_mode", to_string(c.motion.mode)},
        {"parallel", c.motion.parallel},
        {"pan_tilt_overhead", c.motion.pan_tilt_overhead}}},
      {"motion",
       {{"peak_pulse_rate", c.motion.profile.peak_pulse_rate},
        {"acceleration", c.motion.profile.acceleration}}},
      {"intrinsics",
       {{"width", c.intrinsics.width},
        {"height", c.intrinsics.height},
        {"horizontal_fov", c.intrinsics.horizontal_fov}}},
      {"timing",
       {{"settle_pause", c.timing.settle_pause},
        {"capture_time", c.timing.capture_time},
        {"download_time_per_image", c.timing.download_time_per_image},
        {"crop_time_per_subimage", c.timing.crop_time_per_subimage}}},
      {"zigzag", {{"slab_width", c.zigzag.slab_width}, {"column_width", c.zigzag.column_width}}},
      {"poses",
       {{"radii", c.pose_ring.radii},
        {"heights", c.pose_ring.heights},
        {"count_per_ring", c.pose_ring.count_per_ring}}},
      {"scene_path", c.scene_path},
      {"output_dir", c.output_dir},
      {"legacy_origin", c.box_origin == BoxOrigin::UpperRight ? "upper_right" : "top_left"},
      {"render_scale", c.render_scale},
      {"jpg_names", c.jpg_names},
      {"edge_margin", c.edge_margin},
      {"start_time", c.start_time},
      {"room", c.room},
      {"institute", c.institute},
      {"camera", c.camera},
      {"lens", c.lens},
      {"seed", c.seed},
  };
}

/// Overlays the keys present in `j` onto `base`.
inline ToolkitConfig config_from_json(const nlohmann::json& j, ToolkitConfig base = {}) {
  auto set = [](const nlohmann::json& obj, const char* key, auto& field) {
    if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    if (j.contains("gantry")) {
      const auto& g = j.at("gantry");
      if (g.contains("axes")) {
        const auto& axes = g.at("axes");
        if (!axes.is_array() || axes.size() != 3) throw DomainError("gantry.axes needs 3 entries");
        for (std::size_t i = 0; i < 3; ++i) {
          set(axes[i], "distance_per_rev", base.motion.axes[i].distance_per_rev);
          set(axes[i], "step_angle_fraction", base.motion.axes[i].step_angle_fraction);
          set(axes[i], "gear_ratio", base.motion.axes[i].gear_ratio);
          set(axes[i], "travel_limit", base.motion.axes[i].travel_limit);
        }
      }
      if (g.contains("stepping_mode"))
        base.motion.mode = stepping_mode_from_string(g.at("stepping_mode").get<std::string>());
      set(g, "parallel", base.motion.parallel);
      set(g, "pan_tilt_overhead", base.motion.pan_tilt_overhead);
    }
    if (j.contains("motion")) {
      set(j.at("motion"), "peak_pulse_rate", base.motion.profile.peak_pulse_rate);
      set(j.at("motion"), "acceleration", base.motion.profile.acceleration);
    }
    if (j.contains("intrinsics")) {
      set(j.at("intrinsics"), "width", base.intrinsics.width);
      set(j.at("intrinsics"), "height", base.intrinsics.height);
      set(j.at("intrinsics"), "horizontal_fov", base.intrinsics.horizontal_fov);
    }
    if (j.contains("timing")) {
      const auto& t = j.at("timing");
      set(t, "settle_pause", base.timing.settle_pause);
      set(t, "capture_time", base.timing.capture_time);
      set(t, "download_time_per_image", base.timing.download_time_per_image);
      set(t, "crop_time_per_subimage", base.timing.crop_time_per_subimage);
    }
    if (j.contains("zigzag")) {
      set(j.at("zigzag"), "slab_width", base.zigzag.slab_width);
      set(j.at("zigzag"), "column_width", base.zigzag.column_width);
    }
    if (j.contains("poses")) {
      set(j.at("poses"), "radii", base.pose_ring.radii);
      set(j.at("poses"), "heights", base.pose_ring.heights);
      set(j.at("poses"), "count_per_ring", base.pose_ring.count_per_ring);
    }
    set(j, "scene_path", base.scene_path);
    set(j, "output_dir", base.output_dir);
    if (j.contains("legacy_origin")) {
      const auto v = j.at("legacy_origin").get<std::string>();
      if (v == "upper_right") base.box_origin = BoxOrigin::UpperRight;
      else if (v == "top_left") base.box_origin = BoxOrigin::TopLeft;
      else throw DomainError("legacy_origin must be 'upper_right' or 'top_left'");
    }
    set(j, "render_scale", base.render_scale);
    set(j, "jpg_names", base.jpg_names);
    set(j, "edge_margin", base.edge_margin);
    set(j, "start_time", base.start_time);
    set(j, "room", base.room);
    set(j, "institute", base.institute);
    set(j, "camera", base.camera);
    set(j, "lens", base.lens);
    set(j, "seed", base.seed);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  base.validate();
  return base;
}

// --- scene ------------------------------------------------------------------

inline Json to_json(const Scene& s) {
  Json plants = Json::array();
  for (const auto& p : s.plants)
    plants.push_back({{"plant_id", p.plant_id},
                      {"label", p.label},
                      {"scientific_name", p.scientific_name},
                      {"position_id", p.position_id},
                      {"position", vec_json(p.position)},
                      {"bounding_radius", p.bounding_radius},
                      {"render_color", rgb_json(p.render_color)},
                      {"date_planted", p.date_planted}});
  return {{"background_color", rgb_json(s.background_color)},
          {"floor_color", rgb_json(s.floor_color)},
          {"floor_z", s.floor_z},
          {"floor_extent", s.floor ? Json::array({s.floor->x_min, s.floor->x_max, s.floor->y_min,
                                                  s.floor->y_max})
                                   : Json(nullptr)},
          {"plants", plants}};
}

inline Scene scene_from_json(const nlohmann::json& j) {
  Scene s;
  try {
    if (j.contains("background_color")) s.background_color = rgb_from(j.at("background_color"));
    if (j.contains("floor_color")) s.floor_color = rgb_from(j.at("floor_color"));
    if (j.contains("floor_z")) s.floor_z = j.at("floor_z").get<double>();
    if (j.contains("floor_extent")) {
      const auto& e = j.at("floor_extent");
      if (e.is_null()) s.floor.reset();
      else if (!e.is_array() || e.size() != 4)
        throw DomainError("floor_extent must be [x_min, x_max, y_min, y_max]");
      else
        s.floor = FloorRect{e[0].get<double>(), e[1].get<double>(), e[2].get<double>(),
                            e[3].get<double>()};
    }
    for (const auto& p : j.value("plants", nlohmann::json::array())) {
      PlantTarget t;
      t.plant_id = p.at("plant_id").get<std::string>();
      t.label = p.value("label", "");
      t.scientific_name = p.value("scientific_name", "");
      t.position_id = p.at("position_id").get<int>();
      t.position = vec_from(p.at("position"));
      t.bounding_radius = p.at("bounding_radius").get<double>();
      if (p.contains("render_color")) t.render_color = rgb_from(p.at("render_color"));
      t.date_planted = p.value("date_planted", t.date_planted);
      s.plants.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("scene: ") + e.what());
  }
  return s;
}

// --- poses, waypoints, routes -----------------------------------------------

inline Json to_json(const CameraPose& p) {
  return {{"position", vec_json(p.position)},
          {"pan", p.pan},
          {"tilt", p.tilt},
          {"head_offset", vec_json(p.head_offset)}};
}

inline CameraPose pose_from_json(const nlohmann::json& j) {
  CameraPose p;
  p.position = vec_from(j.at("position"));
  p.pan = j.value("pan", 0.0);
  p.tilt = j.value("tilt", 0.0);
  if (j.contains("head_offset")) p.head_offset = vec_from(j.at("head_offset"));
  if (p.pan < -180.0 || p.pan > 180.0 || p.tilt < -90.0 || p.tilt > 90.0)
    throw DomainError("pose angles outside pan [-180, 180], tilt [-90, 90]");
  return p;
}

inline std::vector<CameraPose> poses_from_json(const nlohmann::json& j) {
  const auto& arr = j.is_object() ? j.at("poses") : j;
  std::vector<CameraPose> out;
  for (const auto& p : arr) out.push_back(pose_from_json(p));
  return out;
}

/// Waypoints file: {"points": [[x, y, z], ...]} or a bare array. The volume
/// defaults to the given one.
inline WaypointSet waypoints_from_json(const nlohmann::json& j, const Volume& volume) {
  WaypointSet set;
  set.volume = volume;
  const auto& arr = j.is_object() ? j.at("points") : j;
  for (const auto& p : arr) set.positions.push_back(vec_from(p));
  if (j.is_object() && j.contains("volume")) {
    set.volume.min = vec_from(j.at("volume").at("min"));
    set.volume.max = vec_from(j.at("volume").at("max"));
  }
  set.validate();
  return set;
}

inline Json to_json(const RunLog& log) {
  Json entries = Json::array();
  for (const auto& e : log.entries)
    entries.push_back({{"index", e.index},
                       {"master_id", e.master_id},
                       {"pose", to_json(e.pose)},
                       {"move_start", e.move_start},
                       {"move_end", e.move_end},
                       {"trigger_time", e.trigger_time},
                       {"capture_end", e.capture_end}});
  Json skipped = Json::array();
  for (const auto& s : log.skipped)
    skipped.push_back({{"position_index", s.position_index},
                       {"plant_index", s.plant_index},
                       {"reason", s.reason}});
  return {{"start_time", log.start_time},
          {"t_p", log.t_p},
          {"t_d", log.t_d},
          {"t_c", log.t_c},
          {"n_masters", log.n_masters},
          {"n_subimages", log.n_subimages},
          {"entries", entries},
          {"skipped", skipped}};
}

}  // namespace io
}  // namespace gantrylab
