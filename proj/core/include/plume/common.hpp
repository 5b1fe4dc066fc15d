#pragma once

#include <Eigen/Core>

#include <numbers>
#include <stdexcept>
#include <string>

namespace plume {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double rad);

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A persisted artifact (snapshot, checkpoint, log) failed to load (exit code 3).
class ArtifactError : public Error {
 public:
  using Error::Error;
};

/// Shape or precondition violation inside the numerical engine.
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace plume
