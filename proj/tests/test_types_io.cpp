#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "test_util.hpp"
#include "xdt/io.hpp"
#include "xdt/random.hpp"

using namespace xdt;
namespace fs = std::filesystem;

using testing::TempDir;

TEST_CASE("volume construction checks shape and values") {
  VolumeGeometry g;
  g.dims = {2, 3, 4};
  CHECK_NOTHROW(Volume3(g, std::vector<float>(24, 0.0f)));
  CHECK_THROWS_AS(Volume3(g, std::vector<float>(23, 0.0f)), FormatError);
  std::vector<float> bad(24, 0.0f);
  bad[5] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(Volume3(g, bad), ValidationError);
  bad[5] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(Volume3(g, bad), ValidationError);
  g.spacing = {1, 0, 1};
  CHECK_THROWS_AS(Volume3{g}, ValidationError);
}

TEST_CASE("volume indexing is channel, z, y, x with x fastest") {
  VolumeGeometry g;
  g.dims = {2, 3, 4};
  g.channels = 2;
  std::vector<float> d(g.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<float>(i);
  const Volume3 v(g, d);
  CHECK(v.at(0, 0, 0, 1) == 1.0f);
  CHECK(v.at(0, 0, 1, 0) == 2.0f);
  CHECK(v.at(0, 1, 0, 0) == 6.0f);
  CHECK(v.at(1, 0, 0, 0) == 24.0f);
  CHECK(v.channel(1).size() == 24);
}

TEST_CASE("centered geometry is symmetric about the origin") {
  const auto g = VolumeGeometry::centered({4, 5, 6}, {2, 1, 0.5});
  CHECK(g.origin[0] == doctest::Approx(-3));
  CHECK(g.origin[1] == doctest::Approx(-2));
  CHECK(g.origin[2] == doctest::Approx(-1.25));
}

TEST_CASE("view set validation") {
  ViewSet v;
  CHECK_THROWS_AS(v.validate(), GeometryError);
  v.angles = {0};
  CHECK_NOTHROW(v.validate());
  v.angles = {std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(v.validate(), GeometryError);
  v.angles = {0};
  v.detector_dims = {0, 4};
  CHECK_THROWS_AS(v.validate(), GeometryError);
}

TEST_CASE("zero volume round trip") {
  TempDir tmp;
  VolumeGeometry g;
  g.dims = {2, 3, 4};
  const Volume3 v(g);
  io::write_volume(v, tmp.path / "zeros");
  CHECK(fs::exists(tmp.path / "zeros.json"));
  CHECK(fs::file_size(tmp.path / "zeros.raw") == 24 * 4);
  CHECK(io::read_volume(tmp.path / "zeros") == v);
}

TEST_CASE("random 16^3 volume round trips bitwise") {
  TempDir tmp;
  Rng rng(7);
  auto g = VolumeGeometry::centered({16, 16, 16}, {1.5, 1.5, 2.5}, 2);
  std::vector<float> d(g.size());
  for (auto& x : d) x = static_cast<float>(rng.normal(100));
  const Volume3 v(g, d);
  io::write_volume(v, tmp.path / "rand");
  const Volume3 r = io::read_volume(tmp.path / "rand");
  REQUIRE(r.data().size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    REQUIRE(std::bit_cast<std::uint32_t>(r.data()[i]) == std::bit_cast<std::uint32_t>(d[i]));
  CHECK(r.geometry() == g);
}

TEST_CASE("payload shorter than header is a format error") {
  TempDir tmp;
  VolumeGeometry g;
  g.dims = {2, 3, 4};
  io::write_volume(Volume3(g), tmp.path / "v");
  fs::resize_file(tmp.path / "v.raw", 23 * 4);
  CHECK_THROWS_AS(io::read_volume(tmp.path / "v"), FormatError);
}

TEST_CASE("NaN in payload is a validation error") {
  TempDir tmp;
  VolumeGeometry g;
  g.dims = {2, 2, 2};
  io::write_volume(Volume3(g), tmp.path / "v");
  {
    std::fstream f(tmp.path / "v.raw", std::ios::in | std::ios::out | std::ios::binary);
    const std::uint32_t nan = 0x7fc00000u;
    const char bytes[4] = {static_cast<char>(nan & 0xff), static_cast<char>((nan >> 8) & 0xff),
                           static_cast<char>((nan >> 16) & 0xff), static_cast<char>(nan >> 24)};
    f.seekp(8);
    f.write(bytes, 4);
  }
  CHECK_THROWS_AS(io::read_volume(tmp.path / "v"), ValidationError);
}

TEST_CASE("image round trip keeps origin and channels") {
  TempDir tmp;
  ImageGeometry g;
  g.dims = {5, 3};
  g.spacing = {2, 0.5};
  g.origin = {-4, -0.5};
  g.channels = 2;
  std::vector<float> d(g.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<float>(i) * 0.25f;
  const Image2 img(g, d);
  io::write_image(img, tmp.path / "img");
  CHECK(io::read_image(tmp.path / "img") == img);
  CHECK_THROWS_AS(io::read_volume(tmp.path / "img"), FormatError);
}

TEST_CASE("box records") {
  CHECK(io::parse_boxes("").empty());
  CHECK(io::parse_boxes("\n\n").empty());

  const std::string bad =
      "{\"kind\":\"2d\",\"coords\":[0,0,1,1]}\n{\"kind\":\"2d\",\"coords\":[0,0,0,1,1,1]}\n";
  try {
    io::parse_boxes(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 2);
  }
  CHECK_THROWS_AS(io::parse_boxes("{\"kind\":\"3d\",\"coords\":[0,0,1,1]}"), ParseError);
  CHECK_THROWS_AS(io::parse_boxes("not json"), ParseError);
  CHECK_THROWS_AS(io::parse_boxes("{\"kind\":\"4d\",\"coords\":[0,0,1,1]}"), ParseError);

  const auto recs = io::parse_boxes(
      "{\"view\":1,\"kind\":\"2d\",\"coords\":[0,1,2,3],\"score\":0.5,\"label\":\"a\"}\n"
      "{\"kind\":\"3d\",\"coords\":[0,1,2,3,4,5],\"score\":null}\n");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].view == 1);
  const auto& b = std::get<Box2>(recs[0].box);
  CHECK(b.x2 == 2);
  CHECK(b.score == 0.5);
  CHECK(b.label == "a");
  CHECK_FALSE(recs[1].view.has_value());
  CHECK_FALSE(std::get<Box3>(recs[1].box).score.has_value());
}

TEST_CASE("1000 random boxes round trip") {
  TempDir tmp;
  Rng rng(3);
  std::vector<io::BoxRecord> recs;
  for (int i = 0; i < 1000; ++i) {
    io::BoxRecord r;
    if (rng.bernoulli(0.5)) {
      Box2 b;
      b.x1 = rng.normal(50);
      b.z1 = rng.normal(50);
      b.x2 = b.x1 + rng.uniform(0, 40);
      b.z2 = b.z1 + rng.uniform(0, 40);
      if (rng.bernoulli(0.7)) b.score = rng.uniform();
      if (rng.bernoulli(0.3)) b.label = "n" + std::to_string(i);
      r.view = static_cast<int>(rng.uniform() * 3);
      r.box = b;
    } else {
      Box3 b;
      b.x1 = rng.normal(50);
      b.y1 = rng.normal(50);
      b.z1 = rng.normal(50);
      b.x2 = b.x1 + rng.uniform(0, 40);
      b.y2 = b.y1 + rng.uniform(0, 40);
      b.z2 = b.z1 + rng.uniform(0, 40);
      if (rng.bernoulli(0.7)) b.score = rng.uniform();
      r.box = b;
    }
    recs.push_back(r);
  }
  io::write_boxes(recs, tmp.path / "b.jsonl");
  CHECK(io::read_boxes(tmp.path / "b.jsonl") == recs);
  CHECK(io::parse_boxes(io::format_boxes(recs)) == recs);
}

TEST_CASE("per-view grouping") {
  std::vector<std::vector<Box2>> pv(3);
  pv[0].push_back(Box2{0, 0, 1, 1, 0.5, {}});
  pv[2].push_back(Box2{1, 1, 2, 2, {}, {}});
  pv[2].push_back(Box2{2, 2, 3, 3, {}, {}});
  const auto back = io::per_view_boxes(io::to_records(pv), 3);
  CHECK(back == pv);
  CHECK_THROWS_AS(io::per_view_boxes(io::to_records(pv), 2), GeometryError);
}

TEST_CASE("box validation rejects inverted corners") {
  Box2 b{2, 0, 1, 1, {}, {}};
  CHECK_THROWS_AS(b.validate(), ValidationError);
  Box3 c{0, 0, 0, 1, 1, 1, {}, {}};
  CHECK_NOTHROW(c.validate());
  CHECK(c.volume() == 1);
}
