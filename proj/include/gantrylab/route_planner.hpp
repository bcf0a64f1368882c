#pragma once

// Visiting order for camera positions: the nested zig-zag sweep through
// X slabs, Y columns and Z, plus greedy and exhaustive baselines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include "gantrylab/errors.hpp"
#include "gantrylab/kinematics.hpp"
#include "gantrylab/vec3.hpp"

namespace gantrylab {

struct WaypointSet {
  std::vector<Vec3> positions;
  Volume volume{};

  void validate() const {
    std::set<std::tuple<double, double, double>> seen;
    for (const Vec3& p : positions) {
      if (!volume.contains(p)) throw BoundsError("waypoint outside the volume");
      if (!seen.emplace(p.x, p.y, p.z).second) throw DomainError("duplicate waypoint");
    }
  }
};

struct ZigzagParams {
  double slab_width = 100.0;    // mm along X
  double column_width = 100.0;  // mm along Y
};

/// Permutation of waypoint indices.
using Route = std::vector<std::size_t>;

inline bool is_permutation_of_indices(const Route& route, std::size_t n) {
  if (route.size() != n) return false;
  std::vector<bool> hit(n, false);
  for (std::size_t i : route) {
    if (i >= n || hit[i]) return false;
    hit[i] = true;
  }
  return true;
}

namespace detail {

// Half-open bucket [k*w, (k+1)*w) from `origin`; the far face of the volume
// folds into the last bucket.
inline long bucket(double value, double origin, double extent, double width) {
  const long last = std::max(0L, static_cast<long>(std::ceil(extent / width)) - 1);
  const long k = static_cast<long>(std::floor((value - origin) / width));
  return std::clamp(k, 0L, last);
}

}  // namespace detail

/// Nested zig-zag order.
///
/// Slabs are visited in +X order. Columns inside the first visited slab run
/// in +Y, the next slab in -Y, and so on. Z alternates between ascending and
/// descending on every visited column, carrying over between slabs. Empty
/// slabs and columns are skipped and do not flip the alternation. Ties in Z
/// are broken by ascending (X, Y).
inline Route plan_zigzag(const WaypointSet& set, const ZigzagParams& params) {
  if (set.positions.empty()) throw DomainError("plan_zigzag: empty waypoint set");
  if (!(params.slab_width > 0.0) || !(params.column_width > 0.0))
    throw DomainError("plan_zigzag: slab and column widths must be positive");

  const Vec3 extent = set.volume.max - set.volume.min;
  std::map<long, std::map<long, std::vector<std::size_t>>> slabs;
  for (std::size_t i = 0; i < set.positions.size(); ++i) {
    const Vec3& p = set.positions[i];
    const long s = detail::bucket(p.x, set.volume.min.x, extent.x, params.slab_width);
    const long c = detail::bucket(p.y, set.volume.min.y, extent.y, params.column_width);
    slabs[s][c].push_back(i);
  }

  Route route;
  route.reserve(set.positions.size());
  bool forward_y = true;
  bool ascending_z = true;
  for (auto& [slab, columns] : slabs) {
    std::vector<std::vector<std::size_t>*> order;
    for (auto& [col, members] : columns) order.push_back(&members);
    if (!forward_y) std::reverse(order.begin(), order.end());

    for (auto* members : order) {
      const auto& pts = set.positions;
      std::sort(members->begin(), members->end(), [&](std::size_t a, std::size_t b) {
        const Vec3& pa = pts[a];
        const Vec3& pb = pts[b];
        if (pa.z != pb.z) return ascending_z ? pa.z < pb.z : pa.z > pb.z;
        return std::tie(pa.x, pa.y, a) < std::tie(pb.x, pb.y, b);
      });
      route.insert(route.end(), members->begin(), members->end());
      ascending_z = !ascending_z;
    }
    forward_y = !forward_y;
  }
  return route;
}

struct RouteCost {
  double seconds = 0.0;
  double millimeters = 0.0;
  std::vector<double> leg_seconds;
  std::vector<double> leg_millimeters;
};

/// Euclidean length of the open path through `route`.
inline double path_length(const Route& route, const std::vector<Vec3>& pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i)
    total += distance(pts[route[i - 1]], pts[route[i]]);
  return total;
}

inline RouteCost route_cost(const Route& route, const WaypointSet& set,
                            const MotionContext& ctx) {
  if (!is_permutation_of_indices(route, set.positions.size()))
    throw DomainError("route_cost: route is not a permutation of the waypoints");
  RouteCost cost;
  for (std::size_t i = 1; i < route.size(); ++i) {
    CameraPose a, b;
    a.position = set.positions[route[i - 1]];
    b.position = set.positions[route[i]];
    const double t = move_time(a, b, ctx);
    cost.leg_seconds.push_back(t);
    cost.leg_millimeters.push_back(distance(a.position, b.position));
    cost.seconds += t;
  }
  cost.millimeters = path_length(route, set.positions);
  return cost;
}

/// Greedy tour: start at the waypoint closest to the volume's min corner,
/// then always move to the closest unvisited waypoint (lowest index on ties).
inline Route nearest_neighbor_route(const WaypointSet& set) {
  const auto& pts = set.positions;
  if (pts.empty()) throw DomainError("nearest_neighbor_route: empty waypoint set");
  std::vector<bool> used(pts.size(), false);
  Route route;
  Vec3 here = set.volume.min;
  for (std::size_t step = 0; step < pts.size(); ++step) {
    std::size_t best = pts.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (used[i]) continue;
      const double d = distance(here, pts[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    used[best] = true;
    route.push_back(best);
    here = pts[best];
  }
  return route;
}

inline constexpr std::size_t kBruteForceLimit = 10;

/// Minimum-length open path over all permutations. Among equal lengths the
/// lexicographically smallest permutation wins.
inline Route brute_force_tsp(const WaypointSet& set) {
  const std::size_t n = set.positions.size();
  if (n == 0) throw DomainError("brute_force_tsp: empty waypoint set");
  if (n > kBruteForceLimit) throw SizeError("brute_force_tsp: at most 10 waypoints");

  Route perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Route best = perm;
  double best_len = path_length(perm, set.positions);
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double len = path_length(perm, set.positions);
    if (len < best_len) {
      best_len = len;
      best = perm;
    }
  }
  return best;
}

}  // namespace gantrylab
