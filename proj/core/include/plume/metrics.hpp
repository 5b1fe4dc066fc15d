#pragma once

#include "plume/geo.hpp"
#include "plume/geometry.hpp"
#include "plume/sensor.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Tracking metrics in observer-image space: plume contour and mean line from
// top-view masks, drone-to-plume distances normalised by the mean-line
// length, and mean/std aggregation across runs.
namespace plume::metrics {

using sensor::SegMask;

/// Largest 4-connected component; ties go to the component whose first
/// pixel in row-major order comes first. Empty input gives an empty mask.
SegMask largest_component(const SegMask& mask);

/// Closed ring through the centres (index coordinates) of the outer boundary
/// pixels of the largest component, clockwise in image coordinates. Throws
/// Error("no contour") on an empty mask.
geom::Polygon largest_contour(const SegMask& mask);

/// Two-subpass neighbourhood thinning to an 8-connected unit-width set.
SegMask thin(const SegMask& mask);

struct SkeletonParams {
  int prune_len = 5;       // px, shorter end branches are removed
  int smooth_window = 5;   // moving-average points
};

/// Mean line of the largest component: thinned, pruned, longest path ordered
/// from the end nearest `source_px` (when given), then smoothed. Components
/// that thinning leaves untouched come back unsmoothed. Throws Error("no
/// contour") on an empty mask.
geom::Polyline skeleton(const SegMask& mask, const SkeletonParams& params = {},
                        const std::optional<Vec2>& source_px = std::nullopt);

struct SampleDistances {
  double d_m = 0.0;   // px to the mean line
  double d_c = 0.0;   // px outside the contour, 0 when inside
  bool inside = false;
};

struct MetricsReport {
  double mu_m = 0.0;     // %
  double d_m_max = 0.0;  // %
  double mu_c = 0.0;     // %
  double d_c_max = 0.0;  // %
  double t_R = 0.0;      // %
  int samples = 0;
  int excluded_frames = 0;
  double l_ref = 0.0;    // px
  bool operator==(const MetricsReport&) const = default;
};

/// The five normalised metrics from per-sample distances.
MetricsReport summarize(std::span<const SampleDistances> samples, double l_ref);

/// Distances of one drone pixel (index coordinates) against one frame.
/// Returns nullopt when the frame has no contour.
std::optional<SampleDistances> sample_distances(const Vec2& px, const SegMask& frame, const SkeletonParams& params,
                                                const std::optional<Vec2>& source_px);

/// Pairs track[i] with masks[i]. L_ref is the arc length of the last frame
/// that had a contour.
MetricsReport compute_metrics(std::span<const geo::Gps> track, std::span<const SegMask> masks,
                              const geo::GeoRef& georef, const std::optional<geo::Gps>& source,
                              const SkeletonParams& params = {});

/// Incremental form of compute_metrics for long runs: frames are consumed one
/// at a time without being stored.
class MetricsAccumulator {
 public:
  MetricsAccumulator(const geo::GeoRef& georef, const std::optional<geo::Gps>& source, const SkeletonParams& params);
  void add(const geo::Gps& drone, const SegMask& frame);
  MetricsReport report() const;
  /// Skeleton and contour of the last frame that had a contour.
  const geom::Polyline& last_skeleton() const { return last_skeleton_; }
  const geom::Polygon& last_contour() const { return last_contour_; }
  const std::vector<Vec2>& track_px() const { return track_px_; }

 private:
  geo::GeoRef georef_;
  std::optional<Vec2> source_px_;
  SkeletonParams params_;
  std::vector<SampleDistances> samples_;
  std::vector<Vec2> track_px_;
  int excluded_ = 0;
  geom::Polyline last_skeleton_;
  geom::Polygon last_contour_;
};

inline constexpr std::array<const char*, 5> kMetricNames{"mu_m", "d_m_max", "mu_c", "d_c_max", "t_R"};

std::array<double, 5> metric_values(const MetricsReport& r);

struct Stat {
  double mean = 0.0;
  std::optional<double> std;  // sample (n - 1) deviation, absent for n < 2
};

struct AggregateRow {
  std::array<Stat, 5> stats;  // kMetricNames order
  int runs = 0;
};

AggregateRow aggregate(std::span<const MetricsReport> reports);

}  // namespace plume::metrics
