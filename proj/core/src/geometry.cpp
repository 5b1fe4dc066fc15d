#include "plume/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plume {

double wrap_angle(double rad) {
  double a = std::remainder(rad, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

namespace geom {

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double dist_to_polyline(const Vec2& p, std::span<const Vec2> line) {
  if (line.empty()) throw ShapeError("dist_to_polyline: empty polyline");
  if (line.size() == 1) return (p - line[0]).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, dist_point_segment(p, line[i], line[i + 1]));
  return best;
}

namespace {

double dist_to_ring(const Vec2& p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    best = std::min(best, dist_point_segment(p, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

}  // namespace

bool inside_or_on(const Vec2& p, std::span<const Vec2> poly) {
  if (poly.empty()) throw ShapeError("inside_or_on: empty polygon");
  if (dist_to_ring(p, poly) <= 1e-12) return true;
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

double dist_outside_polygon(const Vec2& p, std::span<const Vec2> poly) {
  if (inside_or_on(p, poly)) return 0.0;
  return dist_to_ring(p, poly);
}

double arc_length(std::span<const Vec2> line) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) s += (line[i + 1] - line[i]).norm();
  return s;
}

}  // namespace geom
}  // namespace plume
