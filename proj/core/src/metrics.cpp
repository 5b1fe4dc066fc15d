#include "plume/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace plume::metrics {

namespace {

// Binary grid with a one-pixel empty border so neighbourhood reads never
// leave the buffer. (ox, oy) is the mask coordinate of interior cell (0, 0).
struct Grid {
  int w = 0, h = 0;  // interior size
  int ox = 0, oy = 0;
  std::vector<std::uint8_t> cells;

  Grid(int w_, int h_, int ox_, int oy_)
      : w(w_), h(h_), ox(ox_), oy(oy_), cells(static_cast<std::size_t>(w_ + 2) * (h_ + 2), 0) {}
  int stride() const { return w + 2; }
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y + 1) * stride() + (x + 1); }
  std::uint8_t& at(int x, int y) { return cells[idx(x, y)]; }
  std::uint8_t at(int x, int y) const { return cells[idx(x, y)]; }
};

// Clockwise in image coordinates (y down), starting east.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d)
    if (kDx[d] == dx && kDy[d] == dy) return d;
  return -1;
}

// Largest component cropped to its bounding box.
std::optional<Grid> component_grid(const SegMask& mask) {
  const int W = mask.width(), H = mask.height();
  std::vector<int> label(static_cast<std::size_t>(W) * H, -1);
  std::vector<int> stack;
  int best = -1;
  long best_area = 0;
  int next = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (!mask.at(x, y) || label[i] >= 0) continue;
      long area = 0;
      label[i] = next;
      stack.assign(1, static_cast<int>(i));
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        ++area;
        const int px = p % W, py = p / W;
        const int nx[4] = {px + 1, px - 1, px, px};
        const int ny[4] = {py, py, py + 1, py - 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= W || ny[k] >= H) continue;
          const std::size_t j = static_cast<std::size_t>(ny[k]) * W + nx[k];
          if (mask.at(nx[k], ny[k]) && label[j] < 0) {
            label[j] = next;
            stack.push_back(static_cast<int>(j));
          }
        }
      }
      if (area > best_area) {
        best_area = area;
        best = next;
      }
      ++next;
    }
  }
  if (best < 0) return std::nullopt;

  int x0 = W, y0 = H, x1 = -1, y1 = -1;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (label[static_cast<std::size_t>(y) * W + x] == best) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  Grid g(x1 - x0 + 1, y1 - y0 + 1, x0, y0);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (label[static_cast<std::size_t>(y) * W + x] == best) g.at(x - x0, y - y0) = 1;
  return g;
}

geom::Polygon trace(const Grid& g) {
  int sx = -1, sy = -1;
  for (int y = 0; y < g.h && sx < 0; ++y)
    for (int x = 0; x < g.w; ++x)
      if (g.at(x, y)) {
        sx = x;
        sy = y;
        break;
      }
  geom::Polygon ring;
  auto push = [&](int x, int y) { ring.emplace_back(x + g.ox, y + g.oy); };
  push(sx, sy);

  // Moore-neighbour tracing; `back` is the direction from the current pixel
  // to the last background pixel examined.
  int cx = sx, cy = sy, back = 4;
  int first_x = -1, first_y = -1;
  const std::size_t limit = 4 * static_cast<std::size_t>(g.w + 2) * (g.h + 2);
  for (std::size_t step = 0; step < limit; ++step) {
    int nx = -1, ny = -1, prev = back;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      if (g.at(cx + kDx[d], cy + kDy[d])) {
        nx = cx + kDx[d];
        ny = cy + kDy[d];
        break;
      }
      prev = d;
    }
    if (nx < 0) break;  // isolated pixel
    if (cx == sx && cy == sy && nx == first_x && ny == first_y) break;
    if (first_x < 0) {
      first_x = nx;
      first_y = ny;
    }
    back = direction_of(cx + kDx[prev] - nx, cy + kDy[prev] - ny);
    cx = nx;
    cy = ny;
    if (!(cx == sx && cy == sy)) push(cx, cy);
  }
  return ring;
}

int neighbour_count(const Grid& g, int x, int y) {
  int n = 0;
  for (int d = 0; d < 8; ++d) n += g.at(x + kDx[d], y + kDy[d]);
  return n;
}

// Returns the number of pixels removed.
long thin_grid(Grid& g) {
  std::vector<std::pair<int, int>> live;
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x)
      if (g.at(x, y)) live.emplace_back(x, y);

  long removed = 0;
  std::vector<std::size_t> doomed;
  for (bool changed = true; changed;) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      doomed.clear();
      for (std::size_t i = 0; i < live.size(); ++i) {
        const auto [x, y] = live[i];
        // p2..p9 clockwise from north.
        const int p[8] = {g.at(x, y - 1), g.at(x + 1, y - 1), g.at(x + 1, y), g.at(x + 1, y + 1),
                          g.at(x, y + 1), g.at(x - 1, y + 1), g.at(x - 1, y), g.at(x - 1, y - 1)};
        const int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
        if (b < 2 || b > 6) continue;
        int a = 0;
        for (int k = 0; k < 8; ++k) a += (p[k] == 0 && p[(k + 1) % 8] == 1);
        if (a != 1) continue;
        const bool ok = pass == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                  : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
        if (ok) doomed.push_back(i);
      }
      if (doomed.empty()) continue;
      changed = true;
      for (std::size_t i : doomed) g.at(live[i].first, live[i].second) = 0;
      removed += static_cast<long>(doomed.size());
      std::vector<std::pair<int, int>> keep;
      keep.reserve(live.size() - doomed.size());
      std::size_t di = 0;
      for (std::size_t i = 0; i < live.size(); ++i) {
        if (di < doomed.size() && doomed[di] == i) {
          ++di;
          continue;
        }
        keep.push_back(live[i]);
      }
      live.swap(keep);
    }
  }

  // Drop staircase corners whose only neighbours are two perpendicular
  // 4-neighbours; they stay 8-connected through the diagonal.
  for (const auto& [x, y] : live) {
    if (neighbour_count(g, x, y) != 2) continue;
    const int n = g.at(x, y - 1), e = g.at(x + 1, y), s = g.at(x, y + 1), w = g.at(x - 1, y);
    if ((n && e) || (e && s) || (s && w) || (w && n)) {
      g.at(x, y) = 0;
      ++removed;
    }
  }
  return removed;
}

void prune(Grid& g, int prune_len) {
  std::vector<std::pair<int, int>> doomed, branch;
  for (int y = 0; y < g.h; ++y) {
    for (int x = 0; x < g.w; ++x) {
      if (!g.at(x, y) || neighbour_count(g, x, y) != 1) continue;
      branch.assign(1, {x, y});
      int px = -1, py = -1, cx = x, cy = y;
      bool junction = false;
      while (static_cast<int>(branch.size()) <= prune_len) {
        int nx = -1, ny = -1;
        for (int d = 0; d < 8; ++d) {
          const int qx = cx + kDx[d], qy = cy + kDy[d];
          if (g.at(qx, qy) && !(qx == px && qy == py) &&
              std::find(branch.begin(), branch.end(), std::make_pair(qx, qy)) == branch.end()) {
            nx = qx;
            ny = qy;
            break;
          }
        }
        if (nx < 0) break;
        if (neighbour_count(g, nx, ny) >= 3) {
          junction = true;
          break;
        }
        px = cx;
        py = cy;
        cx = nx;
        cy = ny;
        branch.emplace_back(cx, cy);
      }
      if (junction && static_cast<int>(branch.size()) < prune_len)
        doomed.insert(doomed.end(), branch.begin(), branch.end());
    }
  }
  for (const auto& [x, y] : doomed) g.at(x, y) = 0;
}

// Longest geodesic path (in 8-neighbour hops) through the set pixels.
std::vector<std::pair<int, int>> longest_path(const Grid& g) {
  const std::size_t n = g.cells.size();
  std::vector<int> dist(n), parent(n);
  auto bfs = [&](std::size_t start) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(parent.begin(), parent.end(), -1);
    std::vector<std::size_t> queue{start};
    dist[start] = 0;
    std::size_t far = start;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t c = queue[head];
      if (dist[c] > dist[far]) far = c;
      const int cx = static_cast<int>(c % g.stride()), cy = static_cast<int>(c / g.stride());
      for (int d = 0; d < 8; ++d) {
        const std::size_t q = static_cast<std::size_t>(cy + kDy[d]) * g.stride() + (cx + kDx[d]);
        if (g.cells[q] && dist[q] < 0) {
          dist[q] = dist[c] + 1;
          parent[q] = static_cast<int>(c);
          queue.push_back(q);
        }
      }
    }
    return far;
  };
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i)
    if (g.cells[i]) {
      start = i;
      break;
    }
  if (start == n) return {};
  const std::size_t a = bfs(start);
  const std::size_t b = bfs(a);
  std::vector<std::pair<int, int>> path;
  for (long c = static_cast<long>(b); c >= 0; c = parent[static_cast<std::size_t>(c)])
    path.emplace_back(static_cast<int>(c % g.stride()) - 1, static_cast<int>(c / g.stride()) - 1);
  return path;
}

geom::Polyline skeleton_of(Grid g, const SkeletonParams& params, const std::optional<Vec2>& source_px) {
  const long removed = thin_grid(g);
  prune(g, params.prune_len);
  const auto path = longest_path(g);
  geom::Polyline line;
  line.reserve(path.size());
  for (const auto& [x, y] : path) line.emplace_back(x + g.ox, y + g.oy);
  if (source_px && line.size() > 1 && (line.front() - *source_px).norm() > (line.back() - *source_px).norm())
    std::reverse(line.begin(), line.end());
  if (removed == 0 || params.smooth_window <= 1 || line.size() < 3) return line;

  const int half = params.smooth_window / 2;
  const int m = static_cast<int>(line.size());
  geom::Polyline smooth(line.size());
  for (int i = 0; i < m; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(m - 1, i + half);
    Vec2 s = Vec2::Zero();
    for (int k = lo; k <= hi; ++k) s += line[static_cast<std::size_t>(k)];
    smooth[static_cast<std::size_t>(i)] = s / static_cast<double>(hi - lo + 1);
  }
  return smooth;
}

SegMask grid_to_mask(const Grid& g, int W, int H) {
  SegMask out(W, H);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x)
      if (g.at(x, y)) out.set(x + g.ox, y + g.oy);
  out.refresh();
  return out;
}

Grid full_grid(const SegMask& mask) {
  Grid g(mask.width(), mask.height(), 0, 0);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) g.at(x, y) = mask.at(x, y);
  return g;
}

}  // namespace

SegMask largest_component(const SegMask& mask) {
  const auto g = component_grid(mask);
  if (!g) return SegMask(mask.width(), mask.height());
  return grid_to_mask(*g, mask.width(), mask.height());
}

geom::Polygon largest_contour(const SegMask& mask) {
  const auto g = component_grid(mask);
  if (!g) throw Error("no contour");
  return trace(*g);
}

SegMask thin(const SegMask& mask) {
  Grid g = full_grid(mask);
  thin_grid(g);
  return grid_to_mask(g, mask.width(), mask.height());
}

geom::Polyline skeleton(const SegMask& mask, const SkeletonParams& params, const std::optional<Vec2>& source_px) {
  const auto g = component_grid(mask);
  if (!g) throw Error("no contour");
  return skeleton_of(*g, params, source_px);
}

MetricsReport summarize(std::span<const SampleDistances> samples, double l_ref) {
  MetricsReport r;
  r.samples = static_cast<int>(samples.size());
  r.l_ref = l_ref;
  if (samples.empty()) return r;
  double sum_m = 0.0, max_m = 0.0, sum_c = 0.0, max_c = 0.0;
  int inside = 0, outside = 0;
  for (const auto& s : samples) {
    sum_m += s.d_m;
    max_m = std::max(max_m, s.d_m);
    max_c = std::max(max_c, s.d_c);
    if (s.inside) {
      ++inside;
    } else {
      ++outside;
      sum_c += s.d_c;
    }
  }
  const double n = static_cast<double>(samples.size());
  r.mu_m = 100.0 * (sum_m / n) / l_ref;
  r.d_m_max = 100.0 * max_m / l_ref;
  r.mu_c = outside > 0 ? 100.0 * (sum_c / outside) / l_ref : 0.0;
  r.d_c_max = 100.0 * max_c / l_ref;
  r.t_R = 100.0 * inside / n;
  return r;
}

std::optional<SampleDistances> sample_distances(const Vec2& px, const SegMask& frame, const SkeletonParams& params,
                                                const std::optional<Vec2>& source_px) {
  const auto g = component_grid(frame);
  if (!g) return std::nullopt;
  const auto contour = trace(*g);
  const auto line = skeleton_of(*g, params, source_px);
  SampleDistances s;
  s.d_m = geom::dist_to_polyline(px, line);
  s.inside = geom::inside_or_on(px, contour);
  s.d_c = s.inside ? 0.0 : geom::dist_outside_polygon(px, contour);
  return s;
}

MetricsAccumulator::MetricsAccumulator(const geo::GeoRef& georef, const std::optional<geo::Gps>& source,
                                       const SkeletonParams& params)
    : georef_(georef), params_(params) {
  // Image coordinates put pixel i on [i, i + 1); masks are indexed by i.
  if (source) source_px_ = geo::gps_to_pixel(georef_, *source).px - Vec2(0.5, 0.5);
}

void MetricsAccumulator::add(const geo::Gps& drone, const SegMask& frame) {
  const Vec2 px = geo::gps_to_pixel(georef_, drone).px - Vec2(0.5, 0.5);
  track_px_.push_back(px);
  const auto g = component_grid(frame);
  if (!g) {
    ++excluded_;
    return;
  }
  last_contour_ = trace(*g);
  last_skeleton_ = skeleton_of(*g, params_, source_px_);
  SampleDistances s;
  s.d_m = geom::dist_to_polyline(px, last_skeleton_);
  s.inside = geom::inside_or_on(px, last_contour_);
  s.d_c = s.inside ? 0.0 : geom::dist_outside_polygon(px, last_contour_);
  samples_.push_back(s);
}

MetricsReport MetricsAccumulator::report() const {
  const double l_ref = std::max(1.0, geom::arc_length(last_skeleton_));
  MetricsReport r = summarize(samples_, l_ref);
  r.excluded_frames = excluded_;
  return r;
}

MetricsReport compute_metrics(std::span<const geo::Gps> track, std::span<const SegMask> masks,
                              const geo::GeoRef& georef, const std::optional<geo::Gps>& source,
                              const SkeletonParams& params) {
  if (track.size() != masks.size()) throw ShapeError("compute_metrics: track and masks differ in length");
  MetricsAccumulator acc(georef, source, params);
  for (std::size_t i = 0; i < track.size(); ++i) acc.add(track[i], masks[i]);
  return acc.report();
}

std::array<double, 5> metric_values(const MetricsReport& r) { return {r.mu_m, r.d_m_max, r.mu_c, r.d_c_max, r.t_R}; }

AggregateRow aggregate(std::span<const MetricsReport> reports) {
  AggregateRow row;
  row.runs = static_cast<int>(reports.size());
  if (reports.empty()) return row;
  const double n = static_cast<double>(reports.size());
  std::vector<double> v(reports.size());
  for (std::size_t k = 0; k < 5; ++k) {
    // Sorted summation keeps the result independent of run order.
    for (std::size_t i = 0; i < reports.size(); ++i) v[i] = metric_values(reports[i])[k];
    std::sort(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    row.stats[k].mean = mean;
    if (reports.size() >= 2) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      row.stats[k].std = std::sqrt(ss / (n - 1.0));
    }
  }
  return row;
}

}  // namespace plume::metrics
