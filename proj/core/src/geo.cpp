#include "plume/geo.hpp"

#include <cmath>

namespace plume::geo {

namespace {

constexpr double kDeg = kPi / 180.0;
constexpr double kMetresPerDegree = kEarthRadius * kDeg;

}  // namespace

double haversine(const Gps& a, const Gps& b) {
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s = std::sin(0.5 * dlat);
  const double t = std::sin(0.5 * dlon);
  const double h = s * s + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * t * t;
  return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

Gps LocalFrame::to_gps(const Vec3& enu) const {
  const double m_lon = kMetresPerDegree * std::cos(origin.lat * kDeg);
  return {origin.lat + enu.y() / kMetresPerDegree, origin.lon + enu.x() / m_lon, origin.alt + enu.z()};
}

Vec3 LocalFrame::to_enu(const Gps& g) const {
  const double m_lon = kMetresPerDegree * std::cos(origin.lat * kDeg);
  return {(g.lon - origin.lon) * m_lon, (g.lat - origin.lat) * kMetresPerDegree, g.alt - origin.alt};
}

GeoRef georef_from_observer(const ObserverCamera& cam) {
  if (!(cam.focal > 0.0) || !(cam.gps.alt > 0.0) || cam.width <= 0 || cam.height <= 0)
    throw ConfigError("observer: focal, altitude and image size must be positive");
  const double mpp = cam.gps.alt / cam.focal;  // ground metres per pixel
  const double px_per_lat = kMetresPerDegree / mpp;
  const double px_per_lon = kMetresPerDegree * std::cos(cam.gps.lat * kDeg) / mpp;
  const double cx = 0.5 * cam.width, cy = 0.5 * cam.height;

  GeoRef g;
  g.width = cam.width;
  g.height = cam.height;
  g.footprint_w = mpp * cam.width;
  g.footprint_h = mpp * cam.height;
  // x = cx + (lon - lon0) * px_per_lon ; y = cy - (lat - lat0) * px_per_lat
  g.to_px << 0.0, px_per_lon, cx - cam.gps.lon * px_per_lon,
      -px_per_lat, 0.0, cy + cam.gps.lat * px_per_lat;
  g.to_gps << 0.0, -1.0 / px_per_lat, cam.gps.lat + cy / px_per_lat,
      1.0 / px_per_lon, 0.0, cam.gps.lon - cx / px_per_lon;

  const Gps west = pixel_to_gps(g, {0.0, cy});
  const Gps east = pixel_to_gps(g, {static_cast<double>(cam.width), cy});
  const Gps north = pixel_to_gps(g, {cx, 0.0});
  const Gps south = pixel_to_gps(g, {cx, static_cast<double>(cam.height)});
  const double ew = haversine(west, east), ns = haversine(north, south);
  if (std::abs(ew - g.footprint_w) > 0.01 * g.footprint_w || std::abs(ns - g.footprint_h) > 0.01 * g.footprint_h)
    throw ConfigError("observer: footprint too large for a planar georeference");
  return g;
}

PixelHit gps_to_pixel(const GeoRef& g, const Gps& gps) {
  PixelHit h;
  h.px = g.to_px * Eigen::Vector3d(gps.lat, gps.lon, 1.0);
  h.in_frame = h.px.x() >= 0.0 && h.px.y() >= 0.0 && h.px.x() < g.width && h.px.y() < g.height;
  return h;
}

Gps pixel_to_gps(const GeoRef& g, const Vec2& px) {
  const Vec2 ll = g.to_gps * Eigen::Vector3d(px.x(), px.y(), 1.0);
  return {ll.x(), ll.y(), 0.0};
}

}  // namespace plume::geo
