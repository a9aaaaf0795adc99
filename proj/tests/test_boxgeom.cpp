#include <cmath>

#include "doctest.h"
#include "xdt/boxgeom.hpp"
#include "xdt/random.hpp"

using namespace xdt;
using namespace xdt::boxgeom;

namespace {

Box3 random_box3(Rng& rng) {
  Box3 b;
  b.x1 = rng.uniform(-100, 100);
  b.y1 = rng.uniform(-100, 100);
  b.z1 = rng.uniform(-100, 100);
  b.x2 = b.x1 + rng.uniform(0.5, 60);
  b.y2 = b.y1 + rng.uniform(0.5, 60);
  b.z2 = b.z1 + rng.uniform(0.5, 60);
  return b;
}

}  // namespace

TEST_CASE("encode of box equal to anchor is exactly zero") {
  const Anchor3 a{10, 10, 10, 4, 4, 4};
  const Box3 b{8, 8, 8, 12, 12, 12, {}, {}};
  const auto t = encode_box(b, a);
  for (double v : t) CHECK(v == 0.0);
  const Anchor2 a2{3, -2, 5, 7};
  const Box2 b2{0.5, -5.5, 5.5, 1.5, {}, {}};
  for (double v : encode_box(b2, a2)) CHECK(v == 0.0);
}

TEST_CASE("encode worked example") {
  const Anchor3 a{10, 10, 10, 4, 4, 4};
  const Box3 b{8, 8, 8, 16, 12, 12, {}, {}};  // center (12, 10, 10), size (8, 4, 4)
  const auto t = encode_box(b, a);
  CHECK(t[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t[1] == 0.0);
  CHECK(t[2] == 0.0);
  CHECK(t[3] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(t[4] == 0.0);
  CHECK(t[5] == 0.0);
}

TEST_CASE("decode inverts encode") {
  const Anchor2 a{0, 0, 10, 10};
  const Box2 z = decode_box(Offsets2{0, 0, 0, 0}, a);
  CHECK(z.x1 == -5);
  CHECK(z.x2 == 5);
  const Box2 d = decode_box(Offsets2{0, 0, std::log(2.0), 0}, a);
  CHECK(d.width() == doctest::Approx(20));
  CHECK(d.height() == doctest::Approx(10));

  Rng rng(11);
  double worst = 0;
  for (int i = 0; i < 2000; ++i) {
    const Box3 b = random_box3(rng);
    const Anchor3 an{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100),
                     rng.uniform(1, 50),     rng.uniform(1, 50),     rng.uniform(1, 50)};
    const Box3 r = decode_box(encode_box(b, an), an);
    worst = std::max({worst, std::abs(r.x1 - b.x1), std::abs(r.y1 - b.y1), std::abs(r.z1 - b.z1),
                      std::abs(r.x2 - b.x2), std::abs(r.y2 - b.y2), std::abs(r.z2 - b.z2)});
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("zero-extent boxes cannot be encoded") {
  const Anchor2 a{0, 0, 1, 1};
  CHECK_THROWS_AS(encode_box(Box2{0, 0, 0, 1, {}, {}}, a), EncodeError);
  const Anchor3 a3{0, 0, 0, 1, 1, 1};
  CHECK_THROWS_AS(encode_box(Box3{0, 0, 0, 1, 1, 0, {}, {}}, a3), EncodeError);
}

TEST_CASE("rotation") {
  const Point2 p{3.5, -1.25};
  const Point2 id = rotate2(p, 0, {7, 2});
  CHECK(id.x == p.x);
  CHECK(id.y == p.y);
  const Point2 odd{0.1 + 1e-7, -33.3}, odd_id = rotate2(odd, 0, {-0.7, 0.3});
  CHECK(odd_id.x == odd.x);
  CHECK(odd_id.y == odd.y);

  const Point2 q = rotate2({1, 0}, 90, {0, 0});
  CHECK(std::abs(q.x - 0) <= 1e-12);
  CHECK(std::abs(q.y + 1) <= 1e-12);

  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const Point2 c{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const Point2 s{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    const double t1 = rng.uniform(-180, 180), t2 = rng.uniform(-180, 180);
    const Point2 a = rotate2(rotate2(s, t1, c), t2, c);
    const Point2 b = rotate2(s, t1 + t2, c);
    REQUIRE(std::abs(a.x - b.x) <= 1e-9);
    REQUIRE(std::abs(a.y - b.y) <= 1e-9);
  }
}

TEST_CASE("quarter-turn cosines are exact") {
  CHECK(cos_sin_deg(90)[0] == 0.0);
  CHECK(cos_sin_deg(90)[1] == 1.0);
  CHECK(cos_sin_deg(-90)[1] == -1.0);
  CHECK(cos_sin_deg(180)[0] == -1.0);
  CHECK(cos_sin_deg(270)[0] == 0.0);
}

TEST_CASE("box projection") {
  Box3 b{-3, 5, 1, 7, 9, 4, 0.75, std::string("n")};
  const Box2 p0 = project_box3(b, 0, {0, 0});
  CHECK(p0 == Box2{-3, 1, 7, 4, 0.75, std::string("n")});

  // Quarter turn about the box center swaps in the y-extent.
  const Box2 p90 = project_box3(b, 90, {2, 7});
  CHECK(p90.width() == doctest::Approx(4).epsilon(1e-12));
  CHECK(p90.x1 == doctest::Approx(0).epsilon(1e-12));
  CHECK(p90.z1 == 1);
  CHECK(p90.z2 == 4);

  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const Box3 r = random_box3(rng);
    const double th = rng.uniform(-180, 180);
    const Point2 c{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    const Box2 p = project_box3(r, th, c);
    for (double x : {r.x1, r.x2})
      for (double y : {r.y1, r.y2}) {
        const Point2 q = rotate2({x, y}, th, c);
        REQUIRE(q.x >= p.x1 - 1e-9);
        REQUIRE(q.x <= p.x2 + 1e-9);
      }
    REQUIRE(p.z1 == r.z1);
    REQUIRE(p.z2 == r.z2);
  }
}

TEST_CASE("iou") {
  const Box2 a{0, 0, 2, 2, {}, {}}, b{1, 1, 3, 3, {}, {}};
  CHECK(iou2(a, b) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(iou2(a, a) == 1.0);
  CHECK(iou2(a, Box2{5, 5, 6, 6, {}, {}}) == 0.0);
  CHECK(iou2(a, Box2{2, 0, 4, 2, {}, {}}) == 0.0);  // touching edges
  CHECK(iou2(a, b) == iou2(b, a));

  const Box3 c{0, 0, 0, 2, 2, 2, {}, {}}, d{1, 1, 1, 3, 3, 3, {}, {}};
  CHECK(iou3(c, d) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
  CHECK(iou3(c, c) == 1.0);

  const Box2 pt{1, 1, 1, 1, {}, {}};
  CHECK(iou2(pt, pt) == 1.0);
  CHECK(iou2(pt, Box2{2, 2, 2, 2, {}, {}}) == 0.0);
  CHECK(iou2(pt, a) == 0.0);

  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Box3 x = random_box3(rng), y = random_box3(rng);
    const double v = iou3(x, y);
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    REQUIRE(v == iou3(y, x));
  }
}
