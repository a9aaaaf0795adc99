#include "xdt/selfcheck.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "xdt/boxgeom.hpp"
#include "xdt/io.hpp"
#include "xdt/reference_matching.hpp"

namespace xdt::selfcheck {

namespace fs = std::filesystem;

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

std::string mode_name(const ProjectorConfig& cfg) {
  return to_string(cfg.interpolation) + "/" + to_string(cfg.normalization);
}

Box3 random_box3(Rng& rng, double extent) {
  Box3 b;
  const double w = rng.uniform(4, 30), h = rng.uniform(4, 30), d = rng.uniform(4, 30);
  b.x1 = rng.uniform(-extent, extent - w);
  b.y1 = rng.uniform(-extent, extent - h);
  b.z1 = rng.uniform(-extent, extent - d);
  b.x2 = b.x1 + w;
  b.y2 = b.y1 + h;
  b.z2 = b.z1 + d;
  return b;
}

}  // namespace

std::vector<ProjectorConfig> all_projector_modes() {
  std::vector<ProjectorConfig> out;
  for (auto interp : {Interpolation::nearest, Interpolation::bilinear_in_plane})
    for (auto norm : {Normalization::ray_sum, Normalization::mean_along_ray}) {
      ProjectorConfig c;
      c.interpolation = interp;
      c.normalization = norm;
      out.push_back(c);
    }
  return out;
}

AdjointInstance random_adjoint_instance(Rng& rng, int n) {
  AdjointInstance inst;
  const double sp = rng.uniform(0.8, 2.0);
  const double sz = rng.uniform(0.8, 2.0);
  const auto geom = VolumeGeometry::centered({n, n, n}, {sp, sp, sz}, 1);
  std::vector<float> data(geom.size());
  for (auto& v : data) v = static_cast<float>(rng.uniform());
  inst.volume = Volume3(geom, std::move(data));

  inst.views.angles = {rng.uniform(-90, 90), rng.uniform(-90, 90), rng.uniform(-90, 90)};
  inst.views.detector_dims = {n + 8, n + 4};
  inst.views.detector_spacing = {rng.uniform(0.8, 2.0), rng.uniform(0.8, 2.0)};
  inst.views.rotation_center = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
  inst.views.axial_center = rng.uniform(-3, 3);
  const auto ig = inst.views.image_geometry(1);
  for (std::size_t k = 0; k < inst.views.size(); ++k) {
    std::vector<float> px(ig.size());
    for (auto& v : px) v = static_cast<float>(rng.uniform());
    inst.images.emplace_back(ig, std::move(px));
  }
  return inst;
}

std::pair<double, double> adjoint_pair(const AdjointInstance& inst, const ProjectorConfig& cfg,
                                       const ForwardFn& forward, const BackFn& back) {
  const auto px = forward(inst.volume, inst.views, cfg);
  double lhs = 0.0;
  for (std::size_t k = 0; k < px.size(); ++k) lhs += dot(px[k].data(), inst.images[k].data());
  const Volume3 pty = back(inst.images, inst.views, inst.volume.geometry(), cfg);
  const double rhs = dot(inst.volume.data(), pty.data());
  return {lhs, rhs};
}

MatchingInstance random_matching_instance(Rng& rng, int max3, int max2) {
  MatchingInstance inst;
  inst.views.angles = {-35, 0, 35};
  if (rng.bernoulli(0.5))
    for (auto& a : inst.views.angles) a = rng.uniform(-90, 90);
  const int n3 = static_cast<int>(rng.uniform() * (max3 + 1));
  for (int i = 0; i < n3; ++i) {
    Box3 b = random_box3(rng, 40);
    if (rng.bernoulli(0.8)) b.score = rng.uniform();
    inst.boxes3.push_back(b);
  }
  const boxgeom::Point2 center{0, 0};
  inst.boxes2.resize(inst.views.size());
  for (std::size_t k = 0; k < inst.views.size(); ++k) {
    const int n2 = static_cast<int>(rng.uniform() * (max2 + 1));
    for (int j = 0; j < n2; ++j) {
      Box2 b;
      if (n3 > 0 && rng.bernoulli(0.6)) {
        const auto& src = inst.boxes3[static_cast<std::size_t>(rng.uniform() * n3)];
        b = boxgeom::project_box3(src, inst.views.angles[k], center);
        b.label.reset();
        const double j1 = rng.normal(3), j2 = rng.normal(3), j3 = rng.normal(3), j4 = rng.normal(3);
        b.x1 += j1;
        b.z1 += j2;
        b.x2 = std::max(b.x1 + 1, b.x2 + j3);
        b.z2 = std::max(b.z1 + 1, b.z2 + j4);
      } else {
        const double w = rng.uniform(4, 30), h = rng.uniform(4, 30);
        b.x1 = rng.uniform(-50, 50 - w);
        b.z1 = rng.uniform(-50, 50 - h);
        b.x2 = b.x1 + w;
        b.z2 = b.z1 + h;
      }
      // Coarse scores make exact ties between groups likely.
      if (rng.bernoulli(0.9)) b.score = std::round(rng.uniform() * 4) / 4;
      inst.boxes2[k].push_back(b);
    }
  }
  return inst;
}

std::string check_outcome_invariants(const matching::MatchOutcome& out,
                                     const MatchingInstance& inst) {
  const std::size_t views = inst.views.size();
  std::vector<std::vector<int>> used(views);
  for (const auto& g : out.groups) {
    if (g.views.size() != views) return "group missing a view";
    bool any = false;
    for (std::size_t k = 0; k < views; ++k) {
      const auto& va = g.views[k];
      if (va.source == matching::Source::detected) {
        any = true;
        if (va.index < 0 || !(va.box == inst.boxes2[k][va.index]))
          return "detected box differs from its input";
        for (int u : used[k])
          if (u == va.index) return "2D detection shared by two groups";
        used[k].push_back(va.index);
      } else {
        Box2 expect = boxgeom::project_box3(g.box3, inst.views.angles[k], {0, 0});
        expect.score = g.score;
        if (!(va.box == expect)) return "recovered box is not the projected 3D box";
      }
    }
    if (!any) return "group with no detected view";
  }
  for (std::size_t k = 0; k < views; ++k) {
    if (used[k].size() + out.leftovers[k].size() != inst.boxes2[k].size())
      return "2D detections lost or duplicated";
  }
  return {};
}

Result check_adjoint(const Options& opts) {
  Result r{"adjoint", true, {}};
  Rng rng(opts.seed);
  double worst = 0.0;
  for (int i = 0; i < opts.adjoint_instances; ++i) {
    const auto inst = random_adjoint_instance(rng);
    for (const auto& cfg : all_projector_modes()) {
      const auto [lhs, rhs] = adjoint_pair(inst, cfg, opts.forward, opts.back);
      const double rel = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30});
      worst = std::max(worst, rel);
      if (!(rel <= 1e-4) && r.pass) {
        r.pass = false;
        std::ostringstream ss;
        ss << "instance " << i << " " << mode_name(cfg) << ": relative gap " << rel;
        r.detail = ss.str();
      }
    }
  }
  if (r.pass) {
    std::ostringstream ss;
    ss << opts.adjoint_instances << " instances x 4 modes, worst relative gap " << worst;
    r.detail = ss.str();
  }
  return r;
}

Result check_parallel_vs_reference(const Options& opts) {
  Result r{"parallel-vs-reference", true, {}};
  Rng rng(opts.seed + 1);
  const int n = std::max(1, std::min(opts.adjoint_instances, 4));
  for (int i = 0; i < n && r.pass; ++i) {
    const auto inst = random_adjoint_instance(rng, 24);
    for (const auto& cfg : all_projector_modes()) {
      const auto a = opts.forward(inst.volume, inst.views, cfg);
      const auto b = reference::forward_project(inst.volume, inst.views, cfg);
      double scale = 0.0, diff = 0.0;
      for (std::size_t k = 0; k < b.size() && k < a.size(); ++k) {
        if (a[k].dims() != b[k].dims()) diff = 1e30;
        else
          for (std::size_t p = 0; p < b[k].data().size(); ++p) {
            scale = std::max(scale, std::abs(static_cast<double>(b[k].data()[p])));
            diff = std::max(diff, std::abs(static_cast<double>(a[k].data()[p]) - b[k].data()[p]));
          }
      }
      if (a.size() != b.size()) diff = 1e30;
      const auto va = opts.back(inst.images, inst.views, inst.volume.geometry(), cfg);
      const auto vb = reference::back_project(inst.images, inst.views, inst.volume.geometry(), cfg);
      double vscale = 0.0, vdiff = 0.0;
      if (va.data().size() != vb.data().size()) vdiff = 1e30;
      else
        for (std::size_t p = 0; p < vb.data().size(); ++p) {
          vscale = std::max(vscale, std::abs(static_cast<double>(vb.data()[p])));
          vdiff = std::max(vdiff, std::abs(static_cast<double>(va.data()[p]) - vb.data()[p]));
        }
      if (diff > 1e-5 * std::max(scale, 1.0) || vdiff > 1e-5 * std::max(vscale, 1.0)) {
        r.pass = false;
        std::ostringstream ss;
        ss << "instance " << i << " " << mode_name(cfg) << ": forward diff " << diff
           << ", back diff " << vdiff;
        r.detail = ss.str();
        break;
      }
    }
  }
  if (r.pass) r.detail = std::to_string(n) + " instances x 4 modes agree";
  return r;
}

Result check_roundtrip(const Options& opts) {
  Result r{"round-trip", true, {}};
  Rng rng(opts.seed + 2);
  auto fail = [&](const std::string& why) {
    if (r.pass) r.detail = why;
    r.pass = false;
  };

  const fs::path dir = fs::temp_directory_path() /
                       ("xdt_selfcheck_" + std::to_string(rng.next() % 1000000000ULL));
  fs::create_directories(dir);
  try {
    const auto inst = random_adjoint_instance(rng, 12);
    io::write_volume(inst.volume, dir / "vol");
    if (!(io::read_volume(dir / "vol") == inst.volume)) fail("volume file round trip");
    io::write_image(inst.images[0], dir / "img");
    if (!(io::read_image(dir / "img") == inst.images[0])) fail("image file round trip");
    const auto m = random_matching_instance(rng);
    auto records = io::to_records(m.boxes2);
    const auto r3 = io::to_records(m.boxes3);
    records.insert(records.end(), r3.begin(), r3.end());
    io::write_boxes(records, dir / "boxes.jsonl");
    if (!(io::read_boxes(dir / "boxes.jsonl") == records)) fail("box file round trip");
  } catch (const std::exception& e) {
    fail(std::string("exception: ") + e.what());
  }
  std::error_code ec;
  fs::remove_all(dir, ec);

  double worst = 0.0;
  for (int i = 0; i < opts.roundtrip_boxes; ++i) {
    const Box3 b = random_box3(rng, 100);
    const Anchor3 a{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100),
                    rng.uniform(2, 40),     rng.uniform(2, 40),     rng.uniform(2, 40)};
    const Box3 d = boxgeom::decode_box(boxgeom::encode_box(b, a), a);
    worst = std::max({worst, std::abs(d.x1 - b.x1), std::abs(d.y1 - b.y1), std::abs(d.z1 - b.z1),
                      std::abs(d.x2 - b.x2), std::abs(d.y2 - b.y2), std::abs(d.z2 - b.z2)});
  }
  if (worst > 1e-9) fail("box encode/decode error " + std::to_string(worst));
  if (r.pass) r.detail = "files and box offsets round trip";
  return r;
}

Result check_matching(const Options& opts) {
  Result r{"matching-oracle", true, {}};
  Rng rng(opts.seed + 3);
  for (int i = 0; i < opts.matching_instances; ++i) {
    const auto inst = random_matching_instance(rng);
    const auto fast = matching::collaborate(inst.boxes3, inst.boxes2, inst.views);
    const auto slow = reference::naive_collaborate(inst.boxes3, inst.boxes2, inst.views);
    std::string why;
    if (!reference::same_outcome(fast, slow, &why)) {
      r.pass = false;
      r.detail = "instance " + std::to_string(i) + ": " + why;
      return r;
    }
    why = check_outcome_invariants(fast, inst);
    if (!why.empty()) {
      r.pass = false;
      r.detail = "instance " + std::to_string(i) + ": " + why;
      return r;
    }
  }
  r.detail = std::to_string(opts.matching_instances) + " instances agree";
  return r;
}

std::vector<Result> run_all(const Options& opts) {
  return {check_adjoint(opts), check_parallel_vs_reference(opts), check_roundtrip(opts),
          check_matching(opts)};
}

}  // namespace xdt::selfcheck
