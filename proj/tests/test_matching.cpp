#include <algorithm>

#include "doctest.h"
#include "xdt/boxgeom.hpp"
#include "xdt/detect_sim.hpp"
#include "xdt/matching.hpp"
#include "xdt/reference_matching.hpp"
#include "xdt/selfcheck.hpp"

using namespace xdt;
using namespace xdt::matching;

namespace {

ViewSet three_views() {
  ViewSet v;
  v.angles = {-35, 0, 35};
  return v;
}

Box3 cube(double x, double y, double z, double side, std::optional<double> score = {}) {
  return Box3{x, y, z, x + side, y + side, z + side, score, {}};
}

Box2 scored(Box2 b, double s) {
  b.score = s;
  b.label.reset();
  return b;
}

IouMatrices matrices(std::size_t rows, std::vector<double> u, std::vector<int> q) {
  IouMatrices m;
  m.rows = rows;
  m.cols = u.size() / rows;
  m.u = std::move(u);
  m.q = std::move(q);
  return m;
}

}  // namespace

TEST_CASE("empty view gives an unmatched column") {
  const ViewSet views = three_views();
  const std::vector<Box3> b3{cube(0, 0, 0, 10), cube(20, 0, 0, 10)};
  std::vector<std::vector<Box2>> b2(3);
  b2[0].push_back(boxgeom::project_box3(b3[0], -35, {0, 0}));
  b2[2].push_back(boxgeom::project_box3(b3[1], 35, {0, 0}));
  const auto m = build_iou_matrix(b3, b2, views);
  CHECK(m.q_at(0, 1) == -1);
  CHECK(m.q_at(1, 1) == -1);
  CHECK(m.u_at(0, 1) == 0.0);
}

TEST_CASE("perfectly matching box gives unit IoU row") {
  const ViewSet views = three_views();
  const std::vector<Box3> b3{cube(-7, 3, 11, 14)};
  std::vector<std::vector<Box2>> b2(3);
  for (std::size_t k = 0; k < 3; ++k) b2[k].push_back(boxgeom::project_box3(b3[0], views.angles[k], {0, 0}));
  const auto m = build_iou_matrix(b3, b2, views);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(m.u_at(0, k) == 1.0);
    CHECK(m.q_at(0, k) == 0);
  }
  CHECK(m.mean_iou(0) == 1.0);
}

TEST_CASE("argmax ties go to the lowest index and threshold is strict") {
  ViewSet views;
  views.angles = {0};
  const std::vector<Box3> b3{Box3{0, 0, 0, 2, 2, 2, {}, {}}};
  const Box2 p{0, 0, 2, 2, {}, {}};
  std::vector<std::vector<Box2>> b2{{Box2{5, 5, 6, 6, {}, {}}, Box2{1, 0, 3, 2, {}, {}},
                                     Box2{-1, 0, 1, 2, {}, {}}}};
  auto m = build_iou_matrix(b3, b2, views);
  CHECK(m.q_at(0, 0) == 1);
  CHECK(m.u_at(0, 0) == doctest::Approx(boxgeom::iou2(p, b2[0][1])));
  m = build_iou_matrix(b3, b2, views, 1.0 / 3.0);
  CHECK(m.q_at(0, 0) == -1);  // u == threshold counts as unmatched
  m = build_iou_matrix(b3, b2, views, 0.3);
  CHECK(m.q_at(0, 0) == 1);
  CHECK_THROWS_AS(build_iou_matrix(b3, {{}, {}}, views), GeometryError);
}

TEST_CASE("matrices equal brute force on random instances") {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    const auto inst = selfcheck::random_matching_instance(rng);
    const auto m = build_iou_matrix(inst.boxes3, inst.boxes2, inst.views);
    for (std::size_t i = 0; i < inst.boxes3.size(); ++i)
      for (std::size_t k = 0; k < 3; ++k) {
        const Box2 p = boxgeom::project_box3(inst.boxes3[i], inst.views.angles[k], {0, 0});
        double best = 0;
        int arg = -1;
        for (std::size_t j = 0; j < inst.boxes2[k].size(); ++j) {
          const double v = boxgeom::iou2(p, inst.boxes2[k][j]);
          if (v > best) best = v, arg = static_cast<int>(j);
        }
        REQUIRE(m.u_at(i, k) == best);
        REQUIRE(m.q_at(i, k) == arg);
        REQUIRE(m.u_at(i, k) >= 0.0);
        REQUIRE(m.u_at(i, k) <= 1.0);
      }
  }
}

TEST_CASE("conflict keeps the higher mean IoU") {
  // Both rows claim 2D box 0 in view 0; means 0.8 and 0.3.
  const auto m = matrices(2, {0.8, 0.8, 0.8, 0.9, 0.0, 0.0}, {0, 0, 0, 0, -1, -1});
  const auto r = resolve_matches(m);
  REQUIRE(r.kept.size() == 1);
  CHECK(r.kept[0] == 0);
  CHECK(r.rows[0] == std::vector<int>{0, 0, 0});

  // Same with the stronger box listed second.
  const auto m2 = matrices(2, {0.9, 0.0, 0.0, 0.8, 0.8, 0.8}, {0, -1, -1, 0, 0, 0});
  const auto r2 = resolve_matches(m2);
  REQUIRE(r2.kept.size() == 1);
  CHECK(r2.kept[0] == 1);
}

TEST_CASE("disjoint signatures all survive in mean-IoU order") {
  const auto m = matrices(3, {0.2, 0.2, 0.2, 0.9, 0.9, 0.9, 0.5, 0.0, 0.5},
                          {0, 0, 0, 1, 1, 1, 2, -1, 2});
  const auto r = resolve_matches(m);
  CHECK(r.kept == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("equal means keep input order") {
  const auto m = matrices(2, {0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 2});
  const auto r = resolve_matches(m);
  CHECK(r.kept == std::vector<std::size_t>{0});
  const auto m2 = matrices(2, {0.5, 0.5, 0.5, 0.5}, {0, 1, 1, 2});
  CHECK(resolve_matches(m2).kept == std::vector<std::size_t>{0, 1});
}

TEST_CASE("unmatched rows are dropped") {
  const auto m = matrices(2, {0, 0, 0, 0, 0, 0}, {-1, -1, -1, -1, -1, -1});
  CHECK(resolve_matches(m).kept.empty());
}

TEST_CASE("missed view is recovered from the 3D box") {
  const ViewSet views = three_views();
  const Box3 b3 = cube(-20, 5, 10, 24, 0.9);
  std::vector<std::vector<Box2>> b2(3);
  b2[0].push_back(scored(boxgeom::project_box3(b3, -35, {0, 0}), 0.8));
  b2[1].push_back(scored(boxgeom::project_box3(b3, 0, {0, 0}), 0.7));
  b2[1].push_back(Box2{60, 60, 70, 70, 0.2, {}});
  const auto out = collaborate({b3}, b2, views);
  REQUIRE(out.groups.size() == 1);
  const auto& g = out.groups[0];
  CHECK(g.views[0].source == Source::detected);
  CHECK(g.views[1].source == Source::detected);
  CHECK(g.views[2].source == Source::recovered);
  CHECK(g.views[0].box == b2[0][0]);
  CHECK(g.score == doctest::Approx((0.9 + 0.8 + 0.7) / 3));
  Box2 expect = boxgeom::project_box3(b3, 35, {0, 0});
  expect.score = g.score;
  CHECK(g.views[2].box == expect);
  CHECK(g.q == std::vector<int>{0, 0, -1});
  CHECK(g.mean_iou == doctest::Approx(2.0 / 3.0));
  REQUIRE(out.leftovers[1].size() == 1);
  CHECK(out.leftovers[1][0].index == 1);
  CHECK(out.leftovers[0].empty());

  const auto dets = collaborative_detections(out, 3);
  CHECK(dets[0].size() == 1);
  CHECK(dets[1].size() == 2);
  CHECK(dets[2].size() == 1);
  CHECK(dets[2][0] == expect);
}

TEST_CASE("no 3D boxes leaves every 2D box as a leftover") {
  std::vector<std::vector<Box2>> b2(3);
  b2[0] = {Box2{0, 0, 1, 1, 0.5, {}}, Box2{2, 2, 3, 3, 0.4, {}}};
  b2[2] = {Box2{0, 0, 1, 1, {}, {}}};
  const auto out = collaborate({}, b2, three_views());
  CHECK(out.groups.empty());
  CHECK(out.leftovers[0].size() == 2);
  CHECK(out.leftovers[1].empty());
  CHECK(out.leftovers[2].size() == 1);
  CHECK(collaborative_detections(out, 3) == b2);
}

TEST_CASE("scores fuse only what is present") {
  ViewSet views;
  views.angles = {0, 90};
  const Box3 b3 = cube(0, 0, 0, 10);
  std::vector<std::vector<Box2>> b2(2);
  b2[0].push_back(boxgeom::project_box3(b3, 0, {0, 0}));
  b2[1].push_back(scored(boxgeom::project_box3(b3, 90, {0, 0}), 0.6));
  CHECK(collaborate({b3}, b2, views).groups[0].score == doctest::Approx(0.6));
  b2[1][0].score.reset();
  CHECK(collaborate({b3}, b2, views).groups[0].score == 0.0);
}

TEST_CASE("random instances agree with the naive implementation") {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto inst = selfcheck::random_matching_instance(rng);
    const auto fast = collaborate(inst.boxes3, inst.boxes2, inst.views);
    const auto slow = reference::naive_collaborate(inst.boxes3, inst.boxes2, inst.views);
    std::string why;
    REQUIRE_MESSAGE(reference::same_outcome(fast, slow, &why), "instance ", t, ": ", why);
    REQUIRE(selfcheck::check_outcome_invariants(fast, inst).empty());
    for (std::size_t g = 1; g < fast.groups.size(); ++g)
      REQUIRE(fast.groups[g - 1].mean_iou >= fast.groups[g].mean_iou);
  }
}

TEST_CASE("phantom with simulated detector agrees with the naive implementation") {
  const Phantom ph = generate_phantom(PhantomSpec::defaults());
  const ViewSet views = three_views();
  const GroundTruth gt = make_ground_truth_boxes(ph.truth, views);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    detect::PerturbSpec spec;
    spec.miss_prob = {0.3};
    spec.false_pos_rate = {1.5};
    spec.false_pos_rate_3d = 3.0;
    spec.jitter_sigma = 2.0;
    spec.score_noise_sigma = 0.2;
    spec.seed = seed;
    const auto dets = detect::perturb_detect(gt, views, spec);
    const auto fast = collaborate(dets.boxes3, dets.boxes2, views);
    const auto slow = reference::naive_collaborate(dets.boxes3, dets.boxes2, views);
    std::string why;
    CHECK_MESSAGE(reference::same_outcome(fast, slow, &why), "seed ", seed, ": ", why);
  }
}

TEST_CASE("outcome comparison notices differences") {
  Rng rng(1);
  selfcheck::MatchingInstance inst;
  do inst = selfcheck::random_matching_instance(rng);
  while (collaborate(inst.boxes3, inst.boxes2, inst.views).groups.empty());
  const auto a = collaborate(inst.boxes3, inst.boxes2, inst.views);
  auto b = a;
  b.groups[0].score += 1e-12;
  std::string why;
  CHECK_FALSE(reference::same_outcome(a, b, &why));
  CHECK(why.find("score") != std::string::npos);
}
