#pragma once

#include "plume/common.hpp"

#include <span>
#include <vector>

// Planar helpers in pixel space shared by the metric code.
namespace plume::geom {

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;  // closed implicitly: last vertex connects to the first

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);

/// Minimum distance to any segment; a single vertex counts as a point.
/// Throws ShapeError on an empty polyline.
double dist_to_polyline(const Vec2& p, std::span<const Vec2> polyline);

/// Even-odd ray casting; points on an edge count as inside.
bool inside_or_on(const Vec2& p, std::span<const Vec2> polygon);

/// Zero inside or on the polygon, otherwise the distance to its boundary.
double dist_outside_polygon(const Vec2& p, std::span<const Vec2> polygon);

double arc_length(std::span<const Vec2> polyline);

}  // namespace plume::geom
