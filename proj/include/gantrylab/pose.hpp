#pragma once

#include "gantrylab/vec3.hpp"

namespace gantrylab {

/// Gantry head position plus pan-tilt orientation.
///
/// Angles are in degrees. `pan` is the azimuth about world +Z measured from
/// world +X; `tilt` is the elevation, 0 horizontal and -90 straight down.
/// `head_offset` displaces the optical center from the gantry head reference
/// and is expressed in the panned and tilted camera frame.
struct CameraPose {
  Vec3 position{};
  double pan = 0.0;
  double tilt = 0.0;
  Vec3 head_offset{};

  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

}  // namespace gantrylab
