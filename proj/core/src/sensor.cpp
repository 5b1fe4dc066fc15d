#include "plume/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace plume::sensor {

CameraModel CameraModel::resized(int w, int h) const {
  CameraModel c = *this;
  c.focal = focal * static_cast<double>(w) / width;
  c.width = w;
  c.height = h;
  return c;
}

void CameraModel::validate() const {
  if (width <= 0 || height <= 0 || focal <= 0.0)
    throw ConfigError("camera: width, height and focal must be positive");
  if (!(min_depth < max_depth)) throw ConfigError("camera: min_depth must be below max_depth");
}

MaskStats mask_stats(int width, int height, std::span<const std::uint8_t> bits, long area_min) {
  MaskStats s;
  double sx = 0.0, sy = 0.0;
  BBox box{width, height, -1, -1};
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* row = bits.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      if (!row[x]) continue;
      ++s.area;
      sx += x;
      sy += y;
      box.x_min = std::min(box.x_min, x);
      box.x_max = std::max(box.x_max, x);
      box.y_min = std::min(box.y_min, y);
      box.y_max = std::max(box.y_max, y);
    }
  }
  if (s.area > 0) {
    s.centroid = Vec2{sx / static_cast<double>(s.area), sy / static_cast<double>(s.area)};
    s.bbox = box;
  }
  s.valid = s.area > 0 && s.area >= area_min;
  return s;
}

SegMask::SegMask(int width, int height)
    : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

SegMask::SegMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (bits_.size() != static_cast<std::size_t>(width) * height)
    throw ShapeError("SegMask: bit count does not match dimensions");
  for (auto& b : bits_) b = b ? 1 : 0;
  refresh();
}

void SegMask::set(int x, int y, bool on) {
  bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0;
}

void SegMask::refresh() { stats_ = mask_stats(width_, height_, bits_); }

MaskStats SegMask::stats(long area_min) const {
  MaskStats s = stats_;
  s.valid = s.area > 0 && s.area >= area_min;
  return s;
}

long area_threshold(int width, int height, double frac) {
  const double px = frac * static_cast<double>(width) * height;
  return std::max(1L, static_cast<long>(std::ceil(px)));
}

Vec3 to_camera(const sim::DroneState& drone, CameraMount mount, const Vec3& world) {
  const Vec3 rel = world - drone.position;
  const Vec3 fwd = sim::forward_axis(drone.yaw);
  const Vec3 right = sim::right_axis(drone.yaw);
  if (mount == CameraMount::forward) return {rel.dot(right), -rel.z(), rel.dot(fwd)};
  // Nadir view: image up is body forward.
  return {rel.dot(right), -rel.dot(fwd), -rel.z()};
}

SegMask render_mask(const sim::PlumeState& plume, const sim::DroneState& drone,
                    const CameraModel& cam, double rho_img) {
  constexpr double kNegligible = 1e-4;  // fraction of rho_img below which a splat tail is dropped
  const int W = cam.width, H = cam.height;
  std::vector<double> acc(static_cast<std::size_t>(W) * H, 0.0);
  std::vector<double> ex(W), ey(H);
  const double cx = 0.5 * W, cy = 0.5 * H;
  const double floor_level = kNegligible * rho_img;

  for (const sim::Puff& puff : plume.puffs) {
    const Vec3 c = to_camera(drone, cam.mount, puff.center);
    const double depth = c.z();
    if (depth < cam.min_depth || depth > cam.max_depth) continue;
    const double amp = puff.strength / (depth * depth * puff.sigma * puff.sigma);
    if (amp <= floor_level) continue;
    const double s = cam.focal * puff.sigma / depth;
    const double u = cx + cam.focal * c.x() / depth;
    const double v = cy + cam.focal * c.y() / depth;
    const double r_cut = s * std::sqrt(2.0 * std::log(amp / floor_level));
    const int x0 = std::max(0, static_cast<int>(std::floor(u - r_cut - 0.5)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(u + r_cut - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(v - r_cut - 0.5)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(v + r_cut - 0.5)));
    if (x0 > x1 || y0 > y1) continue;
    const double inv = 1.0 / (2.0 * s * s);
    for (int x = x0; x <= x1; ++x) {
      const double d = x + 0.5 - u;
      ex[x] = std::exp(-d * d * inv);
    }
    for (int y = y0; y <= y1; ++y) {
      const double d = y + 0.5 - v;
      ey[y] = amp * std::exp(-d * d * inv);
    }
    for (int y = y0; y <= y1; ++y) {
      double* row = acc.data() + static_cast<std::size_t>(y) * W;
      const double ay = ey[y];
      for (int x = x0; x <= x1; ++x) row[x] += ay * ex[x];
    }
  }

  std::vector<std::uint8_t> bits(acc.size());
  std::transform(acc.begin(), acc.end(), bits.begin(),
                 [rho_img](double a) { return static_cast<std::uint8_t>(a >= rho_img); });
  return SegMask(W, H, std::move(bits));
}

SegMask resample(const SegMask& mask, int width, int height) {
  if (mask.width() == width && mask.height() == height) return mask;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height, 0);
  const long W = mask.width(), H = mask.height();
  for (int j = 0; j < height; ++j) {
    const long y0 = j * H / height;
    const long y1 = std::max(y0 + 1, (j + 1) * H / height);
    for (int i = 0; i < width; ++i) {
      const long x0 = i * W / width;
      const long x1 = std::max(x0 + 1, (i + 1) * W / width);
      bool any = false;
      for (long y = y0; y < y1 && !any; ++y)
        for (long x = x0; x < x1 && !any; ++x) any = mask.at(static_cast<int>(x), static_cast<int>(y));
      out[static_cast<std::size_t>(j) * width + i] = any;
    }
  }
  return SegMask(width, height, std::move(out));
}

std::optional<FlowEstimate> estimate_flow(std::span<const SegMask> masks, double eps_var, int k_max) {
  constexpr double kMinDisplacement = 1e-9;  // px
  std::optional<Vec2> prev;
  Vec2 sum = Vec2::Zero();
  int n = 0;
  FlowEstimate est;
  for (const SegMask& m : masks) {
    if (!m.centroid()) continue;
    const Vec2 c = *m.centroid();
    if (prev) {
      const Vec2 d = c - *prev;
      const double len = d.norm();
      if (len > kMinDisplacement) {
        sum += d / len;
        ++n;
        const double r = sum.norm() / n;
        est.circular_variance = std::clamp(1.0 - r, 0.0, 1.0);
        est.direction = sum.norm() > 0.0 ? Vec2(sum / sum.norm()) : Vec2::Zero();
        est.samples = n;
        if ((n >= 2 && est.circular_variance < eps_var) || n >= k_max) break;
      }
    }
    prev = c;
  }
  if (n == 0) return std::nullopt;
  return est;
}

void write_pgm(const std::filesystem::path& path, const SegMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P4\n" << mask.width() << ' ' << mask.height() << '\n';
  const int row_bytes = (mask.width() + 7) / 8;
  std::vector<char> row(row_bytes);
  for (int y = 0; y < mask.height(); ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) row[x / 8] = static_cast<char>(row[x / 8] | (0x80 >> (x % 8)));
    out.write(row.data(), row_bytes);
  }
}

SegMask read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  in >> magic;
  auto skip_comments = [&] {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
  };
  skip_comments();
  in >> w;
  skip_comments();
  in >> h;
  in.get();
  if (magic != "P4" || w <= 0 || h <= 0 || !in) throw ArtifactError("not a P4 bitmap: " + path.string());
  const int row_bytes = (w + 7) / 8;
  std::vector<char> row(row_bytes);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    if (!in.read(row.data(), row_bytes)) throw ArtifactError("truncated bitmap: " + path.string());
    for (int x = 0; x < w; ++x)
      bits[static_cast<std::size_t>(y) * w + x] = (static_cast<unsigned char>(row[x / 8]) >> (7 - x % 8)) & 1;
  }
  return SegMask(w, h, std::move(bits));
}

}  // namespace plume::sensor
