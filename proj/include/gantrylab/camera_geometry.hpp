#pragma once

// World -> camera -> image transform chain for a pan-tilt camera on the
// gantry head, plus bounding-sphere boxes and the inverse floor projection.
//
// Frames:
//   world  : gantry frame, +Z up, origin at the volume's min corner.
//   camera : origin at the optical center, +X forward, +Y left, +Z up.
//   image  : pixels, origin top-left, u to the right, v downward.
//
// Orientation is R = Rz(pan) * Ry(-tilt), i.e. pan first about world Z,
// then tilt about the panned Y axis; positive tilt raises the optical axis.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gantrylab/errors.hpp"
#include "gantrylab/pose.hpp"
#include "gantrylab/vec3.hpp"

namespace gantrylab {

struct CameraIntrinsics {
  int width = 4000;
  int height = 3000;
  double horizontal_fov = 98.7;  // degrees

  void validate() const {
    if (width <= 0 || height <= 0)
      throw DomainError("CameraIntrinsics: width and height must be positive");
    if (!(horizontal_fov > 0.0 && horizontal_fov < 180.0))
      throw DomainError("CameraIntrinsics: horizontal_fov must be in (0, 180)");
  }

  /// Focal length in pixels shared by both image axes.
  double focal_px() const {
    return (width / 2.0) / std::tan(deg_to_rad(horizontal_fov) / 2.0);
  }

  CameraIntrinsics scaled(int scale) const {
    if (scale < 1) throw DomainError("render scale must be >= 1");
    return {width / scale, height / scale, horizontal_fov};
  }
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

struct BoundingSphere {
  Vec3 center{};
  double radius = 1.0;
};

/// Box in fractions of the image size, top-left origin.
struct NormalizedBox {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  bool valid() const {
    return 0.0 <= x_min && x_min < x_max && x_max <= 1.0 && 0.0 <= y_min &&
           y_min < y_max && y_max <= 1.0;
  }
  bool degenerate() const { return !(x_min < x_max && y_min < y_max); }

  /// True when the normalized point lies inside the closed box.
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  friend bool operator==(const NormalizedBox&, const NormalizedBox&) = default;
};

/// Camera-to-world rotation; columns are the camera X, Y, Z axes in world.
inline Mat3 camera_rotation(double pan_deg, double tilt_deg) {
  const double p = deg_to_rad(pan_deg);
  const double t = deg_to_rad(tilt_deg);
  const double cp = std::cos(p), sp = std::sin(p);
  const double ct = std::cos(t), st = std::sin(t);
  Mat3 r;
  r.m = {{{ct * cp, -sp, -st * cp},
          {ct * sp, cp, -st * sp},
          {st, 0.0, ct}}};
  return r;
}

inline Vec3 optical_center(const CameraPose& pose) {
  return pose.position + camera_rotation(pose.pan, pose.tilt) * pose.head_offset;
}

inline Vec3 world_to_camera(const CameraPose& pose, const Vec3& p) {
  const Mat3 r = camera_rotation(pose.pan, pose.tilt);
  const Vec3 center = pose.position + r * pose.head_offset;
  return r.transposed() * (p - center);
}

inline Vec3 camera_to_world(const CameraPose& pose, const Vec3& c) {
  const Mat3 r = camera_rotation(pose.pan, pose.tilt);
  return r * c + pose.position + r * pose.head_offset;
}

/// Rectilinear projection of a camera-frame point.
inline PixelPoint camera_to_image(const Vec3& c, const CameraIntrinsics& k) {
  if (!(c.x > 0.0)) throw GeometryError("camera_to_image: point is behind the camera");
  const double f = k.focal_px();
  return {k.width / 2.0 + f * (-c.y / c.x), k.height / 2.0 - f * (c.z / c.x)};
}

inline PixelPoint project(const CameraPose& pose, const Vec3& p, const CameraIntrinsics& k) {
  return camera_to_image(world_to_camera(pose, p), k);
}

/// Camera-frame direction (unnormalized, x = 1) of the ray through a pixel.
inline Vec3 pixel_ray(const PixelPoint& px, const CameraIntrinsics& k) {
  const double f = k.focal_px();
  return {1.0, -(px.u - k.width / 2.0) / f, -(px.v - k.height / 2.0) / f};
}

namespace detail {

// Roots of (cx^2 - r^2) s^2 - 2 cx cw s + (cw^2 - r^2) = 0: the slopes
// w/x of the two planes through the camera axis tangent to the sphere.
inline std::pair<double, double> tangent_slopes(double cx, double cw, double r) {
  const double a = cx * cx - r * r;
  const double disc = std::sqrt(std::max(0.0, cx * cx + cw * cw - r * r));
  const double lo = (cx * cw - r * disc) / a;
  const double hi = (cx * cw + r * disc) / a;
  return {lo, hi};
}

}  // namespace detail

// Outward padding on every box edge. Covers rounding between the analytic
// tangent bounds and a per-pixel ray test near the silhouette.
inline constexpr double kBoxPadding = 1e-9;

/// Tight axis-aligned bounds of the sphere's image silhouette, in
/// normalized coordinates and clipped to [0, 1]. The result is degenerate
/// when the silhouette misses the image.
inline NormalizedBox project_sphere_box(const CameraPose& pose, const BoundingSphere& sphere,
                                        const CameraIntrinsics& k) {
  if (!(sphere.radius > 0.0)) throw DomainError("project_sphere_box: radius must be positive");
  const Vec3 c = world_to_camera(pose, sphere.center);
  if (norm(c) <= sphere.radius)
    throw GeometryError("project_sphere_box: camera is inside the bounding sphere");
  if (!(c.x > sphere.radius))
    throw GeometryError("project_sphere_box: sphere is not entirely in front of the camera");

  const double f = k.focal_px();
  // u = W/2 - f * (y/x), v = H/2 - f * (z/x)
  const auto [ylo, yhi] = detail::tangent_slopes(c.x, c.y, sphere.radius);
  const auto [zlo, zhi] = detail::tangent_slopes(c.x, c.z, sphere.radius);
  const double u_min = k.width / 2.0 - f * yhi;
  const double u_max = k.width / 2.0 - f * ylo;
  const double v_min = k.height / 2.0 - f * zhi;
  const double v_max = k.height / 2.0 - f * zlo;

  auto clip = [](double x) { return std::clamp(x, 0.0, 1.0); };
  return {clip(u_min / k.width - kBoxPadding), clip(u_max / k.width + kBoxPadding),
          clip(v_min / k.height - kBoxPadding), clip(v_max / k.height + kBoxPadding)};
}

/// Intersects the ray through `px` with the plane z = plane_z.
inline Vec3 image_to_world(const CameraPose& pose, const PixelPoint& px, double plane_z,
                           const CameraIntrinsics& k) {
  const Mat3 r = camera_rotation(pose.pan, pose.tilt);
  const Vec3 origin = pose.position + r * pose.head_offset;
  const Vec3 dir = r * pixel_ray(px, k);
  if (dir.z == 0.0) throw GeometryError("image_to_world: ray is parallel to the plane");
  const double t = (plane_z - origin.z) / dir.z;
  if (!(t > 0.0)) throw GeometryError("image_to_world: plane is behind the camera");
  Vec3 hit = origin + t * dir;
  hit.z = plane_z;
  return hit;
}

struct PanTilt {
  double pan = 0.0;   // degrees
  double tilt = 0.0;  // degrees
};

/// Pan and tilt that put `target` on the optical axis of a camera at
/// `camera_position` (zero head offset). A vertical line of sight uses pan 0.
inline PanTilt aim_at(const Vec3& camera_position, const Vec3& target) {
  const Vec3 d = target - camera_position;
  if (d == Vec3{}) throw DomainError("aim_at: target coincides with camera position");
  const double horiz = std::hypot(d.x, d.y);
  const double pan = horiz == 0.0 ? 0.0 : rad_to_deg(std::atan2(d.y, d.x));
  return {pan, rad_to_deg(std::atan2(d.z, horiz))};
}

enum class PositionClass { Edge, Interior };

inline std::string to_string(PositionClass c) {
  return c == PositionClass::Edge ? "Edge" : "Interior";
}

/// Unit vector pointing from the nearest XY boundary of `volume` into it.
inline Vec3 inward_normal(const Vec3& target, const Volume& volume) {
  const double d[4] = {target.x - volume.min.x, volume.max.x - target.x,
                       target.y - volume.min.y, volume.max.y - target.y};
  static constexpr Vec3 normals[4] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  const auto* nearest = std::min_element(std::begin(d), std::end(d));
  return normals[nearest - std::begin(d)];
}

struct PoseRing {
  std::vector<double> radii;    // horizontal distance from the target, mm
  std::vector<double> heights;  // absolute camera z, mm
  int count_per_ring = 8;
};

/// Camera poses around a target, each aimed at it.
///
/// Interior targets get full circles; edge targets get 180-degree arcs
/// facing into the volume. Poses outside `volume` are dropped.
inline std::vector<CameraPose> generate_poses(const Vec3& target, PositionClass cls,
                                              const PoseRing& ring, const Volume& volume) {
  if (!volume.contains_xy(target))
    throw DomainError("generate_poses: target outside the volume footprint");
  if (ring.count_per_ring < 1 || ring.radii.empty() || ring.heights.empty())
    throw DomainError("generate_poses: counts must be >= 1");

  const int n = ring.count_per_ring;
  double start = 0.0;
  double step = 360.0 / n;
  if (cls == PositionClass::Edge) {
    // half circle facing into the volume, samples centered in equal sectors
    const Vec3 in = inward_normal(target, volume);
    start = rad_to_deg(std::atan2(in.y, in.x)) - 90.0 + 90.0 / n;
    step = 180.0 / n;
  }

  std::vector<CameraPose> poses;
  for (double h : ring.heights) {
    for (double r : ring.radii) {
      const int samples = r == 0.0 ? 1 : n;
      for (int i = 0; i < samples; ++i) {
        const double az = deg_to_rad(start + step * i);
        CameraPose pose;
        pose.position = {target.x + r * std::cos(az), target.y + r * std::sin(az), h};
        if (!volume.contains(pose.position) || pose.position == target) continue;
        const PanTilt a = aim_at(pose.position, target);
        pose.pan = a.pan;
        pose.tilt = a.tilt;
        poses.push_back(pose);
      }
    }
  }
  if (poses.empty()) throw DomainError("generate_poses: no feasible poses inside the volume");
  return poses;
}

}  // namespace gantrylab
