#include <doctest.h>

#include "plume/sensor.hpp"

#include <filesystem>
#include <random>

using namespace plume;
using namespace plume::sensor;

namespace {

sim::PlumeState single_puff(const Vec3& c, double sigma) {
  sim::PlumeState p;
  p.puffs.push_back({c, sigma, 0.0, 1.0});
  return p;
}

sim::DroneState nadir_at(double altitude) {
  sim::DroneState d;
  d.position = {0.0, 0.0, altitude};
  return d;
}

double radius_of(const SegMask& m) {
  // Horizontal half-extent of the disc around the centre row.
  const auto b = *m.bbox();
  return 0.5 * (b.x_max - b.x_min + 1);
}

}  // namespace

TEST_CASE("mask statistics") {
  SegMask m(8, 8);
  m.set(3, 4);
  m.refresh();
  CHECK(m.area() == 1);
  CHECK(*m.centroid() == Vec2(3.0, 4.0));

  SegMask b(4, 4);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) b.set(x, y);
  b.refresh();
  CHECK(b.area() == 4);
  CHECK(*b.centroid() == Vec2(0.5, 0.5));
  CHECK(*b.bbox() == BBox{0, 0, 1, 1});

  SegMask e(4, 4);
  CHECK_FALSE(e.stats(1).valid);
  CHECK_FALSE(e.centroid());

  SUBCASE("brute-force centroid") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::uint8_t> bits(256);
      double sx = 0, sy = 0;
      long n = 0;
      for (int i = 0; i < 256; ++i) {
        bits[i] = rng() % 3 == 0;
        if (bits[i]) sx += i % 16, sy += i / 16, ++n;
      }
      const auto s = mask_stats(16, 16, bits);
      REQUIRE(s.area == n);
      if (n) {
        CHECK(s.centroid->x() == sx / n);
        CHECK(s.centroid->y() == sy / n);
      }
    }
  }
  SUBCASE("area threshold") {
    CHECK(area_threshold(320, 320, 0.002) == 205);
    CHECK(area_threshold(4, 4, 0.0) == 1);
  }
}

TEST_CASE("rendering") {
  const CameraModel cam{64, 64, 32.0, sim::CameraMount::down, 1.0, 60.0};
  CHECK(render_mask(sim::PlumeState{}, nadir_at(10), cam, 1e-3).area() == 0);

  const auto near = render_mask(single_puff(Vec3::Zero(), 1.0), nadir_at(10.0), cam, 1e-4);
  REQUIRE(near.area() > 0);
  CHECK((*near.centroid() - Vec2(31.5, 31.5)).norm() <= 0.5);

  SUBCASE("double depth halves the disc") {
    // Threshold scaled with the 1/depth^2 amplitude so only geometry changes.
    const auto far = render_mask(single_puff(Vec3::Zero(), 1.0), nadir_at(20.0), cam, 0.25e-4);
    CHECK(std::abs(radius_of(far) - 0.5 * radius_of(near)) <= 1.0);
  }
  SUBCASE("lower threshold gives a superset") {
    const auto lo = render_mask(single_puff(Vec3(1.0, 2.0, 0.0), 1.0), nadir_at(10.0), cam, 5e-5);
    const auto hi = render_mask(single_puff(Vec3(1.0, 2.0, 0.0), 1.0), nadir_at(10.0), cam, 2e-4);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (hi.at(x, y)) CHECK(lo.at(x, y));
  }
  SUBCASE("translation consistency") {
    const Vec3 off(13.0, -7.0, 2.0);
    auto d = nadir_at(10.0);
    d.yaw = 0.7;
    auto d2 = d;
    d2.position += off;
    const auto a = render_mask(single_puff(Vec3(1.0, 1.0, 0.0), 1.0), d, cam, 1e-4);
    const auto b2 = render_mask(single_puff(Vec3(1.0, 1.0, 0.0) + off, 1.0), d2, cam, 1e-4);
    CHECK(a == b2);
  }
  SUBCASE("nadir image up is body forward") {
    // A puff ahead of the drone (yaw 0 -> north) lands in the upper half.
    const auto m = render_mask(single_puff(Vec3(0.0, 3.0, 0.0), 0.5), nadir_at(10.0), cam, 1e-4);
    REQUIRE(m.centroid());
    CHECK(m.centroid()->y() < 31.5);
    const auto r = render_mask(single_puff(Vec3(3.0, 0.0, 0.0), 0.5), nadir_at(10.0), cam, 1e-4);
    CHECK(r.centroid()->x() > 31.5);
  }
  SUBCASE("forward camera sees what is ahead") {
    sim::DroneState d;
    d.position = {0.0, 0.0, 5.0};
    d.gimbal = sim::CameraMount::forward;
    CameraModel fc = cam;
    fc.mount = sim::CameraMount::forward;
    const auto ahead = render_mask(single_puff(Vec3(0.0, 10.0, 6.0), 0.5), d, fc, 1e-4);
    REQUIRE(ahead.centroid());
    CHECK(ahead.centroid()->y() < 31.5);  // above the drone appears high in the image
    CHECK(render_mask(single_puff(Vec3(0.0, -10.0, 5.0), 0.5), d, fc, 1e-4).area() == 0);
  }
}

TEST_CASE("flow estimation") {
  auto blob_at = [](int x, int y) {
    SegMask m(64, 64);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) m.set(x + i, y + j);
    m.refresh();
    return m;
  };
  std::vector<SegMask> drift;
  for (int k = 0; k < 6; ++k) drift.push_back(blob_at(10 + 2 * k, 20));
  const auto e = estimate_flow(drift, 0.05, 30);
  REQUIRE(e);
  CHECK(e->direction.x() == doctest::Approx(1.0));
  CHECK(e->direction.y() == doctest::Approx(0.0));
  CHECK(e->circular_variance < 1e-12);

  std::vector<SegMask> still(5, blob_at(10, 10));
  CHECK_FALSE(estimate_flow(still, 0.05, 30));

  std::vector<SegMask> alt;
  for (int k = 0; k < 5; ++k) alt.push_back(blob_at(10 + (k % 2), 10));
  const auto a = estimate_flow(alt, 0.05, 4);
  REQUIRE(a);
  CHECK(a->circular_variance == doctest::Approx(1.0));

  SUBCASE("scale invariance") {
    std::vector<SegMask> slow, fast;
    for (int k = 0; k < 5; ++k) {
      slow.push_back(blob_at(10 + k, 10 + 2 * k));
      fast.push_back(blob_at(10 + 3 * k, 10 + 6 * k));
    }
    CHECK((estimate_flow(slow, 0.05, 30)->direction - estimate_flow(fast, 0.05, 30)->direction).norm() < 1e-12);
  }
}

TEST_CASE("pgm round trip") {
  SegMask m(13, 5);
  m.set(0, 0);
  m.set(12, 4);
  m.set(7, 2);
  m.refresh();
  const auto path = std::filesystem::temp_directory_path() / "plume_test_mask.pgm";
  write_pgm(path, m);
  const auto back = read_pgm(path);
  CHECK(back == m);
  CHECK(back.area() == 3);
  std::filesystem::remove(path);
}

TEST_CASE("resample") {
  SegMask m(8, 8);
  m.set(5, 6);
  m.refresh();
  const auto d = resample(m, 4, 4);
  CHECK(d.area() == 1);
  CHECK(d.at(2, 3));
}
