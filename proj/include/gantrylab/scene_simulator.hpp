#pragma once

// Synthetic scenes of sphere "plants" in front of a keying background, a
// ray-cast camera that also returns a ground-truth label map, and the run
// simulator that advances the production clock.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gantrylab/camera_geometry.hpp"
#include "gantrylab/errors.hpp"
#include "gantrylab/image.hpp"
#include "gantrylab/kinematics.hpp"

namespace gantrylab {

struct PlantTarget {
  std::string plant_id;         // e.g. "echcru002"
  std::string label;            // common name, e.g. "BarnyardGrass"
  std::string scientific_name;
  int position_id = 0;
  Vec3 position{};              // center of the bounding sphere, on the floor
  double bounding_radius = 50.0;
  Rgb render_color{60, 160, 40};
  std::string date_planted = "2020-01-01";

  BoundingSphere sphere() const { return {position, bounding_radius}; }
};

struct FloorRect {
  double x_min = 0.0, x_max = 1150.0;
  double y_min = 0.0, y_max = 840.0;
};

struct Scene {
  std::vector<PlantTarget> plants;
  Rgb background_color{0, 70, 160};
  Rgb floor_color{90, 60, 35};
  double floor_z = 0.0;
  // Soil bed on the plane z = floor_z; without it the floor shows background.
  std::optional<FloorRect> floor = FloorRect{};

  void validate(const Volume& volume) const {
    std::set<std::string> ids;
    std::set<int> position_ids;
    for (const auto& p : plants) {
      if (!position_ids.insert(p.position_id).second)
        throw DomainError("duplicate position_id " + std::to_string(p.position_id));
      if (!(p.bounding_radius > 0.0))
        throw DomainError("plant " + p.plant_id + ": bounding_radius must be positive");
      if (!ids.insert(p.plant_id).second)
        throw DomainError("duplicate plant_id " + p.plant_id);
      if (!volume.contains_xy(p.position))
        throw DomainError("plant " + p.plant_id + " outside the gantry footprint");
    }
    for (std::size_t i = 0; i < plants.size(); ++i)
      for (std::size_t j = i + 1; j < plants.size(); ++j)
        if (plants[i].position == plants[j].position)
          throw DomainError("plants " + plants[i].plant_id + " and " + plants[j].plant_id +
                            " share a position");
  }
};

/// Label map values: 0 background, 1 floor, 2 + i for plant i.
using LabelMap = Grid<std::uint16_t>;
inline constexpr std::uint16_t kLabelBackground = 0;
inline constexpr std::uint16_t kLabelFloor = 1;
inline constexpr std::uint16_t plant_label(std::size_t index) {
  return static_cast<std::uint16_t>(index + 2);
}

struct Capture {
  Image image;
  LabelMap labels;
};

namespace detail {

// Nearest positive ray parameter hitting the sphere, or +inf.
inline double ray_sphere(const Vec3& origin, const Vec3& dir, const BoundingSphere& s) {
  const Vec3 oc = origin - s.center;
  const double a = dot(dir, dir);
  const double b = dot(oc, dir);
  const double c = dot(oc, oc) - s.radius * s.radius;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double root = std::sqrt(disc);
  const double t0 = (-b - root) / a;
  if (t0 > 0.0) return t0;
  const double t1 = (-b + root) / a;
  return t1 > 0.0 ? t1 : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Ray casts `scene` through pixel centers at 1/scale resolution.
/// Deterministic and independent of the number of worker threads.
inline Capture render(const Scene& scene, const CameraPose& pose, const CameraIntrinsics& full,
                      int scale = 4, unsigned threads = 0) {
  const CameraIntrinsics k = full.scaled(scale);
  Capture cap{Image(k.width, k.height, scene.background_color),
              LabelMap(k.width, k.height, kLabelBackground)};
  const Mat3 rot = camera_rotation(pose.pan, pose.tilt);
  const Vec3 origin = optical_center(pose);

  std::vector<BoundingSphere> spheres;
  spheres.reserve(scene.plants.size());
  for (const auto& p : scene.plants) spheres.push_back(p.sphere());

  auto shade_rows = [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < k.width; ++x) {
        const Vec3 dir = rot * pixel_ray({x + 0.5, y + 0.5}, k);
        double best = std::numeric_limits<double>::infinity();
        std::uint16_t label = kLabelBackground;
        Rgb color = scene.background_color;
        if (scene.floor && dir.z != 0.0) {
          const double t = (scene.floor_z - origin.z) / dir.z;
          if (t > 0.0) {
            const Vec3 hit = origin + t * dir;
            const FloorRect& bed = *scene.floor;
            if (hit.x >= bed.x_min && hit.x <= bed.x_max && hit.y >= bed.y_min &&
                hit.y <= bed.y_max) {
              best = t;
              label = kLabelFloor;
              color = scene.floor_color;
            }
          }
        }
        for (std::size_t i = 0; i < spheres.size(); ++i) {
          const double t = detail::ray_sphere(origin, dir, spheres[i]);
          if (t < best) {
            best = t;
            label = plant_label(i);
            color = scene.plants[i].render_color;
          }
        }
        cap.image.at(x, y) = color;
        cap.labels.at(x, y) = label;
      }
    }
  };

  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max(1, k.height)));
  if (n <= 1) {
    shade_rows(0, k.height);
  } else {
    std::vector<std::jthread> workers;
    const int chunk = (k.height + static_cast<int>(n) - 1) / static_cast<int>(n);
    for (int y0 = 0; y0 < k.height; y0 += chunk)
      workers.emplace_back(shade_rows, y0, std::min(k.height, y0 + chunk));
  }
  return cap;
}

inline std::size_t count_label(const LabelMap& labels, std::uint16_t value) {
  return static_cast<std::size_t>(std::count(labels.data().begin(), labels.data().end(), value));
}

/// Request/response interface of the imaging device. The simulator renders;
/// a hardware backend would trigger the real camera.
class CameraTrigger {
 public:
  virtual ~CameraTrigger() = default;
  virtual Capture trigger(const CameraPose& pose) = 0;
  virtual const CameraIntrinsics& intrinsics() const = 0;
};

class SimulatedCamera final : public CameraTrigger {
 public:
  SimulatedCamera(const Scene& scene, CameraIntrinsics full, int scale)
      : scene_(scene), full_(full), render_(full.scaled(scale)), scale_(scale) {}

  Capture trigger(const CameraPose& pose) override { return render(scene_, pose, full_, scale_); }
  const CameraIntrinsics& intrinsics() const override { return render_; }

 private:
  const Scene& scene_;
  CameraIntrinsics full_;
  CameraIntrinsics render_;
  int scale_;
};

struct TimingConfig {
  double settle_pause = 3.0;                           // s
  double capture_time = 2.7;                           // s
  double download_time_per_image = 2760.0 / 2149.0;    // s, bulk download
  double crop_time_per_subimage = 2040.0 / 3494.0;     // s

  void validate() const {
    if (settle_pause < 0 || capture_time < 0 || download_time_per_image < 0 ||
        crop_time_per_subimage < 0)
      throw DomainError("TimingConfig: durations must be non-negative");
  }
};

/// One labeled plant in a master image.
struct Detection {
  std::size_t plant_index = 0;
  NormalizedBox box{};
  std::size_t pixel_count = 0;
};

struct RunEntry {
  std::size_t index = 0;
  CameraPose pose{};
  double move_start = 0.0;
  double move_end = 0.0;
  double trigger_time = 0.0;  // end of the settle pause
  double capture_end = 0.0;
  std::string master_id;      // yyyymmddhhmmss-pose<index>
};

struct SkippedPlant {
  std::size_t position_index = 0;
  std::size_t plant_index = 0;
  std::string reason;
};

struct RunLog {
  std::vector<RunEntry> entries;
  std::vector<SkippedPlant> skipped;
  double t_p = 0.0;
  double t_d = 0.0;
  double t_c = 0.0;
  std::size_t n_masters = 0;
  std::size_t n_subimages = 0;
  std::string start_time;  // ISO-8601, UTC
};

struct MasterCapture {
  CameraPose pose{};
  std::chrono::sys_seconds timestamp{};
  Capture capture;
  std::vector<Detection> detections;
};

struct RunResult {
  RunLog log;
  std::vector<MasterCapture> masters;
};

/// Formats helpers for the simulated clock.
namespace timefmt {

inline std::string two(unsigned v) {
  return std::string(1, static_cast<char>('0' + v / 10)) + static_cast<char>('0' + v % 10);
}

inline std::string stamp14(std::chrono::sys_seconds t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return std::to_string(static_cast<int>(ymd.year())) + two(static_cast<unsigned>(ymd.month())) +
         two(static_cast<unsigned>(ymd.day())) + two(hms.hours().count()) +
         two(hms.minutes().count()) + two(static_cast<unsigned>(hms.seconds().count()));
}

inline std::string date(std::chrono::sys_seconds t) {
  const auto s = stamp14(t);
  return s.substr(0, 4) + "-" + s.substr(4, 2) + "-" + s.substr(6, 2);
}

inline std::string time(std::chrono::sys_seconds t) {
  const auto s = stamp14(t);
  return s.substr(8, 2) + ":" + s.substr(10, 2) + ":" + s.substr(12, 2);
}

inline std::string iso(std::chrono::sys_seconds t) { return date(t) + "T" + time(t) + "Z"; }

/// Parses "yyyy-mm-ddThh:mm:ss" (optional trailing Z).
inline std::chrono::sys_seconds parse_iso(const std::string& s) {
  using namespace std::chrono;
  int Y, M, D, h, m, sec;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &Y, &M, &D, &h, &m, &sec) != 6)
    throw DomainError("bad timestamp '" + s + "', expected yyyy-mm-ddThh:mm:ss");
  const year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)}, day{static_cast<unsigned>(D)}};
  if (!ymd.ok() || h > 23 || m > 59 || sec > 59 || h < 0 || m < 0 || sec < 0)
    throw DomainError("invalid timestamp '" + s + "'");
  return sys_days{ymd} + hours{h} + minutes{m} + seconds{sec};
}

}  // namespace timefmt

struct RunSettings {
  TimingConfig timing{};
  MotionContext motion{};
  std::chrono::sys_seconds start = timefmt::parse_iso("2020-06-01T08:00:00");
  // Head position before the first move; defaults to the first pose.
  std::optional<Vec3> home;
};

/// Drives the camera through `poses` in order, advancing the simulated
/// clock by move + settle pause + capture per position and labeling every
/// plant that shows up in each capture.
inline RunResult simulate_run(const Scene& scene, const std::vector<CameraPose>& poses,
                              CameraTrigger& camera, const RunSettings& settings) {
  settings.timing.validate();
  RunResult result;
  result.log.start_time = timefmt::iso(settings.start);
  if (poses.empty()) return result;

  CameraPose previous = poses.front();
  if (settings.home) previous.position = *settings.home;
  double clock = 0.0;
  const CameraIntrinsics& k = camera.intrinsics();

  for (std::size_t i = 0; i < poses.size(); ++i) {
    const CameraPose& pose = poses[i];
    RunEntry entry;
    entry.index = i;
    entry.pose = pose;
    entry.move_start = clock;
    double move = 0.0;
    try {
      move = move_time(previous, pose, settings.motion);
    } catch (const BoundsError& e) {
      throw BoundsError("position " + std::to_string(i) + ": " + e.what());
    }
    const double after_move = clock + move;
    const double trigger = after_move + settings.timing.settle_pause;
    const double done = trigger + settings.timing.capture_time;
    entry.move_end = after_move;
    entry.trigger_time = trigger;
    entry.capture_end = done;
    result.log.t_p += move + settings.timing.settle_pause + settings.timing.capture_time;
    clock = done;

    MasterCapture master;
    master.pose = pose;
    master.timestamp = settings.start + std::chrono::seconds(static_cast<long>(std::floor(trigger)));
    entry.master_id = timefmt::stamp14(master.timestamp) + "-pose" + std::to_string(i);
    master.capture = camera.trigger(pose);

    for (std::size_t p = 0; p < scene.plants.size(); ++p) {
      const std::size_t pixels = count_label(master.capture.labels, plant_label(p));
      if (pixels == 0) continue;
      try {
        const NormalizedBox box = project_sphere_box(pose, scene.plants[p].sphere(), k);
        master.detections.push_back({p, box, pixels});
      } catch (const GeometryError& e) {
        result.log.skipped.push_back({i, p, e.what()});
      }
    }
    result.log.n_subimages += master.detections.size();
    result.log.entries.push_back(std::move(entry));
    result.masters.push_back(std::move(master));
    previous = pose;
  }
  result.log.n_masters = result.masters.size();
  result.log.t_d = settings.timing.download_time_per_image * static_cast<double>(result.log.n_masters);
  result.log.t_c = settings.timing.crop_time_per_subimage * static_cast<double>(result.log.n_subimages);
  return result;
}

inline RunResult simulate_run(const Scene& scene, const std::vector<CameraPose>& poses,
                              const CameraIntrinsics& intrinsics, int scale,
                              const RunSettings& settings) {
  SimulatedCamera camera(scene, intrinsics, scale);
  return simulate_run(scene, poses, camera, settings);
}

}  // namespace gantrylab
