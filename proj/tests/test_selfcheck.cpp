#include <algorithm>

#include "doctest.h"
#include "xdt/selfcheck.hpp"

using namespace xdt;
using namespace xdt::selfcheck;

namespace {

Options quick() {
  Options o;
  o.adjoint_instances = 3;
  o.matching_instances = 50;
  o.roundtrip_boxes = 100;
  return o;
}

// Mirror each projection along u; the adjoint no longer matches back_project.
std::vector<Image2> mirrored_forward(const Volume3& v, const ViewSet& s, const ProjectorConfig& c) {
  auto imgs = forward_project(v, s, c);
  for (auto& img : imgs) {
    std::vector<float> d(img.data().begin(), img.data().end());
    const int nu = img.dims()[0];
    for (std::size_t row = 0; row < d.size(); row += nu) std::reverse(d.begin() + row, d.begin() + row + nu);
    img = Image2(img.geometry(), std::move(d));
  }
  return imgs;
}

// One percent gain on every pixel.
std::vector<Image2> scaled_forward(const Volume3& v, const ViewSet& s, const ProjectorConfig& c) {
  auto imgs = forward_project(v, s, c);
  for (auto& img : imgs) {
    std::vector<float> d(img.data().begin(), img.data().end());
    for (auto& x : d) x *= 1.01f;
    img = Image2(img.geometry(), std::move(d));
  }
  return imgs;
}

// Views processed in reverse order.
Volume3 swapped_back(const std::vector<Image2>& imgs, const ViewSet& s, const VolumeGeometry& g,
                     const ProjectorConfig& c) {
  std::vector<Image2> rev(imgs.rbegin(), imgs.rend());
  return back_project(rev, s, g, c);
}

}  // namespace

TEST_CASE("all checks pass on the real operators") {
  for (const auto& r : run_all(quick())) CHECK_MESSAGE(r.pass, r.name, ": ", r.detail);
}

TEST_CASE("adjoint check catches a mirrored forward projector") {
  Options o = quick();
  o.forward = mirrored_forward;
  const Result r = check_adjoint(o);
  CHECK_FALSE(r.pass);
  CHECK(r.detail.find("relative gap") != std::string::npos);
  CHECK_FALSE(check_parallel_vs_reference(o).pass);
}

TEST_CASE("adjoint check catches a one percent scale error") {
  Options o = quick();
  o.forward = scaled_forward;
  CHECK_FALSE(check_adjoint(o).pass);
}

TEST_CASE("adjoint check catches view reordering in the back projector") {
  Options o = quick();
  o.back = swapped_back;
  CHECK_FALSE(check_adjoint(o).pass);
  CHECK_FALSE(check_parallel_vs_reference(o).pass);
}

TEST_CASE("adjoint pair is symmetric for the real operators") {
  Rng rng(9);
  const auto inst = random_adjoint_instance(rng, 16);
  const Options o;
  for (const auto& cfg : all_projector_modes()) {
    const auto [lhs, rhs] = adjoint_pair(inst, cfg, o.forward, o.back);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    CHECK(lhs > 0.0);
  }
  CHECK(all_projector_modes().size() == 4);
}

TEST_CASE("outcome invariants flag a tampered recovery") {
  Rng rng(3);
  MatchingInstance inst;
  matching::MatchOutcome out;
  do {
    inst = random_matching_instance(rng);
    out = matching::collaborate(inst.boxes3, inst.boxes2, inst.views);
  } while (std::none_of(out.groups.begin(), out.groups.end(), [](const auto& g) {
    return std::any_of(g.views.begin(), g.views.end(),
                       [](const auto& v) { return v.source == matching::Source::recovered; });
  }));
  CHECK(check_outcome_invariants(out, inst).empty());
  for (auto& g : out.groups)
    for (auto& v : g.views)
      if (v.source == matching::Source::recovered) v.box.x1 -= 1.0;
  CHECK_FALSE(check_outcome_invariants(out, inst).empty());
}
