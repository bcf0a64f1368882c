#pragma once

#include <stdexcept>
#include <string>

namespace gantrylab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Gantry pose outside the travel limits (the limit switches would trip).
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Projection request that has no geometric answer (point behind the
/// camera, camera inside a bounding sphere, ray misses a plane).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class CropError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gantrylab
