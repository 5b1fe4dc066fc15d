#pragma once

#include "plume/common.hpp"

#include <Eigen/Core>

// Geodesy for the observer view: great-circle distance, a local tangent
// frame tying ENU metres to GPS, and the affine pixel <-> GPS map of a nadir
// camera.
namespace plume::geo {

inline constexpr double kEarthRadius = 6'371'000.0;  // m

struct Gps {
  double lat = 0.0;  // deg
  double lon = 0.0;  // deg
  double alt = 0.0;  // m
  bool operator==(const Gps&) const = default;
};

double haversine(const Gps& a, const Gps& b);

/// Local tangent approximation around an origin: metres per degree of
/// latitude is R*pi/180, longitude is scaled by cos(lat0).
struct LocalFrame {
  Gps origin;
  Gps to_gps(const Vec3& enu) const;
  Vec3 to_enu(const Gps& gps) const;
};

struct ObserverCamera {
  Gps gps;  // nadir point and altitude above the ENU ground plane
  double focal = 440.0;
  int width = 400;
  int height = 400;
};

struct GeoRef {
  Eigen::Matrix<double, 2, 3> to_px;   // (lat, lon, 1) -> (x, y)
  Eigen::Matrix<double, 2, 3> to_gps;  // (x, y, 1) -> (lat, lon)
  int width = 0;
  int height = 0;
  double footprint_w = 0.0;  // m
  double footprint_h = 0.0;  // m
};

/// North-up, east-right affine georeference; the image centre maps to the
/// observer's nadir. Throws ConfigError for degenerate focal/altitude or when
/// the haversine footprint disagrees with the pinhole footprint.
GeoRef georef_from_observer(const ObserverCamera& cam);

struct PixelHit {
  Vec2 px = Vec2::Zero();  // continuous image coordinates, (0, 0) at the top-left corner
  bool in_frame = false;
};

PixelHit gps_to_pixel(const GeoRef& g, const Gps& gps);
Gps pixel_to_gps(const GeoRef& g, const Vec2& px);

}  // namespace plume::geo
