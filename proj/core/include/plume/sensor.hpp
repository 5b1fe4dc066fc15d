#pragma once

#include "plume/common.hpp"
#include "plume/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

// Synthetic perception: binary smoke masks rendered from a pinhole camera,
// mask statistics, and centroid-displacement flow estimation.
//
// Image coordinates: x to the right, y downward, row-major storage. Pixel
// (i, j) covers [i, i+1) x [j, j+1); statistics are reported in pixel-index
// coordinates.
namespace plume::sensor {

using sim::CameraMount;

struct CameraModel {
  int width = 320;
  int height = 320;
  double focal = 160.0;  // px
  CameraMount mount = CameraMount::down;
  double min_depth = 1.0;  // m
  double max_depth = 60.0; // m

  /// Same field of view at a different resolution.
  [[nodiscard]] CameraModel resized(int w, int h) const;
  void validate() const;
};

struct BBox {
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;  // inclusive
  Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool operator==(const BBox&) const = default;
};

struct MaskStats {
  long area = 0;
  std::optional<Vec2> centroid;
  std::optional<BBox> bbox;
  /// True when area >= the valid-segment threshold (and area > 0).
  bool valid = false;
};

/// Unweighted pixel statistics of a row-major binary grid.
MaskStats mask_stats(int width, int height, std::span<const std::uint8_t> bits, long area_min = 1);

class SegMask {
 public:
  SegMask() = default;
  SegMask(int width, int height);
  SegMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  void set(int x, int y, bool on = true);
  std::span<const std::uint8_t> bits() const { return bits_; }

  /// Recomputes area/centroid/bbox; call after editing bits with set().
  void refresh();
  long area() const { return stats_.area; }
  const std::optional<Vec2>& centroid() const { return stats_.centroid; }
  const std::optional<BBox>& bbox() const { return stats_.bbox; }
  MaskStats stats(long area_min) const;

  bool operator==(const SegMask& o) const {
    return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
  MaskStats stats_;
};

/// Valid-segment area threshold for a camera: frac * pixel count, at least 1.
long area_threshold(int width, int height, double frac);

/// Camera-frame coordinates (x right, y down, z depth) of a world point.
Vec3 to_camera(const sim::DroneState& drone, CameraMount mount, const Vec3& world);

/// Splats every visible puff as an image-space Gaussian and thresholds the
/// accumulation at rho_img. Deterministic.
SegMask render_mask(const sim::PlumeState& plume, const sim::DroneState& drone,
                    const CameraModel& cam, double rho_img);

/// Block-OR downsampling/nearest upsampling to a target resolution.
SegMask resample(const SegMask& mask, int width, int height);

struct FlowEstimate {
  Vec2 direction = Vec2::Zero();  // unit vector, image coordinates
  double circular_variance = 1.0;
  int samples = 0;                // displacement vectors consumed
};

/// Circular mean of frame-to-frame centroid displacements. Stops early once
/// at least two displacements give circular variance below eps_var, or after
/// k_max displacements. Returns nullopt when no nonzero displacement exists.
std::optional<FlowEstimate> estimate_flow(std::span<const SegMask> masks, double eps_var, int k_max);

/// Binary PGM (P4).
void write_pgm(const std::filesystem::path& path, const SegMask& mask);
SegMask read_pgm(const std::filesystem::path& path);

}  // namespace plume::sensor
