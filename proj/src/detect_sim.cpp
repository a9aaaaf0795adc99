#include "xdt/detect_sim.hpp"

#include <algorithm>
#include <cmath>

#include "xdt/boxgeom.hpp"
#include "xdt/random.hpp"

namespace xdt::detect {

namespace {

double broadcast(const std::vector<double>& v, std::size_t i) {
  if (v.empty()) return 0.0;
  return v.size() == 1 ? v[0] : v.at(i);
}

void order(double& lo, double& hi) {
  if (lo > hi) std::swap(lo, hi);
}

double true_score(Rng& rng, double sigma) {
  return std::clamp(1.0 - std::abs(rng.normal(sigma)), 0.0, 1.0);
}

}  // namespace

void PerturbSpec::validate() const {
  for (double p : miss_prob)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("miss_prob must lie in [0,1]");
  for (double r : false_pos_rate)
    if (!(r >= 0.0)) throw ValidationError("false_pos_rate must be >= 0");
  if (!(miss_prob_3d >= 0.0 && miss_prob_3d <= 1.0))
    throw ValidationError("miss_prob_3d must lie in [0,1]");
  if (!(false_pos_rate_3d >= 0.0)) throw ValidationError("false_pos_rate_3d must be >= 0");
  if (!(jitter_sigma >= 0.0) || !(score_noise_sigma >= 0.0))
    throw ValidationError("sigmas must be >= 0");
  if (!(fp_score_max >= 0.0 && fp_score_max <= 1.0))
    throw ValidationError("fp_score_max must lie in [0,1]");
  if (!(fp_size_min > 0.0) || fp_size_max < fp_size_min)
    throw ValidationError("false positive size range is invalid");
}

double PerturbSpec::miss(std::size_t view) const { return broadcast(miss_prob, view); }
double PerturbSpec::fp_rate(std::size_t view) const { return broadcast(false_pos_rate, view); }

Detections perturb_detect(const GroundTruth& gt, const ViewSet& views,
                          const PerturbSpec& spec) {
  spec.validate();
  views.validate();
  if (gt.boxes2.size() != views.size())
    throw GeometryError("ground truth has no 2D boxes for this view set");
  for (const auto* v : {&spec.miss_prob, &spec.false_pos_rate})
    if (v->size() > 1 && v->size() != views.size())
      throw ValidationError("per-view detector parameters must have 1 or K entries");

  Rng rng(spec.seed);
  const boxgeom::Point2 center{views.rotation_center[0], views.rotation_center[1]};
  const auto lung_box = mask_bounds(gt.lung_mask);

  Detections out;
  out.boxes2.resize(views.size());
  for (std::size_t k = 0; k < views.size(); ++k) {
    for (const Box2& truth : gt.boxes2[k]) {
      if (rng.bernoulli(spec.miss(k))) continue;
      Box2 b = truth;
      b.x1 += rng.normal(spec.jitter_sigma);
      b.z1 += rng.normal(spec.jitter_sigma);
      b.x2 += rng.normal(spec.jitter_sigma);
      b.z2 += rng.normal(spec.jitter_sigma);
      order(b.x1, b.x2);
      order(b.z1, b.z2);
      b.score = true_score(rng, spec.score_noise_sigma);
      out.boxes2[k].push_back(b);
    }
    const int fps = rng.count(spec.fp_rate(k));
    if (fps > 0 && lung_box) {
      const Box2 area = boxgeom::project_box3(*lung_box, views.angles[k], center);
      for (int f = 0; f < fps; ++f) {
        const double w = rng.uniform(spec.fp_size_min, spec.fp_size_max);
        const double h = rng.uniform(spec.fp_size_min, spec.fp_size_max);
        const double cx = rng.uniform(area.x1, area.x2);
        const double cz = rng.uniform(area.z1, area.z2);
        Box2 b{cx - 0.5 * w, cz - 0.5 * h, cx + 0.5 * w, cz + 0.5 * h, {}, {}};
        b.score = rng.uniform(0.0, spec.fp_score_max);
        b.label = "false-positive";
        out.boxes2[k].push_back(b);
      }
    }
  }

  for (const Box3& truth : gt.boxes3) {
    if (rng.bernoulli(spec.miss_prob_3d)) continue;
    Box3 b = truth;
    for (double* c : {&b.x1, &b.y1, &b.z1, &b.x2, &b.y2, &b.z2}) *c += rng.normal(spec.jitter_sigma);
    order(b.x1, b.x2);
    order(b.y1, b.y2);
    order(b.z1, b.z2);
    b.score = true_score(rng, spec.score_noise_sigma);
    out.boxes3.push_back(b);
  }
  const int fps3 = rng.count(spec.false_pos_rate_3d);
  if (fps3 > 0 && lung_box) {
    for (int f = 0; f < fps3; ++f) {
      const double s = rng.uniform(spec.fp_size_min, spec.fp_size_max);
      const double cx = rng.uniform(lung_box->x1, lung_box->x2);
      const double cy = rng.uniform(lung_box->y1, lung_box->y2);
      const double cz = rng.uniform(lung_box->z1, lung_box->z2);
      Box3 b{cx - 0.5 * s, cy - 0.5 * s, cz - 0.5 * s, cx + 0.5 * s, cy + 0.5 * s, cz + 0.5 * s, {}, {}};
      b.score = rng.uniform(0.0, spec.fp_score_max);
      b.label = "false-positive";
      out.boxes3.push_back(b);
    }
  }
  return out;
}

std::vector<Box2> blob_detect(const Image2& image, const BlobParams& params) {
  if (image.channels() != 1) throw ValidationError("blob_detect expects a single-channel image");
  const auto& g = image.geometry();
  const int nu = g.dims[0], nv = g.dims[1];
  const auto data = image.data();
  const float peak = *std::max_element(data.begin(), data.end());
  const double range = static_cast<double>(peak) - params.threshold;

  std::vector<int> label(data.size(), -1);
  std::vector<std::size_t> stack;
  std::vector<Box2> out;
  int next = 0;
  for (std::size_t start = 0; start < data.size(); ++start) {
    if (!(data[start] > params.threshold) || label[start] >= 0) continue;
    int u_lo = nu, u_hi = -1, v_lo = nv, v_hi = -1, area = 0;
    double excess = 0.0;
    stack.assign(1, start);
    label[start] = next;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int u = static_cast<int>(p % nu), v = static_cast<int>(p / nu);
      u_lo = std::min(u_lo, u);
      u_hi = std::max(u_hi, u);
      v_lo = std::min(v_lo, v);
      v_hi = std::max(v_hi, v);
      ++area;
      excess += data[p] - params.threshold;
      const int nbr[4][2] = {{u - 1, v}, {u + 1, v}, {u, v - 1}, {u, v + 1}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[0] >= nu || n[1] < 0 || n[1] >= nv) continue;
        const std::size_t q = static_cast<std::size_t>(n[1]) * nu + n[0];
        if (label[q] < 0 && data[q] > params.threshold) {
          label[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
    if (area < params.min_area) continue;
    Box2 b;
    b.x1 = g.origin[0] + (u_lo - 0.5) * g.spacing[0];
    b.x2 = g.origin[0] + (u_hi + 0.5) * g.spacing[0];
    b.z1 = g.origin[1] + (v_lo - 0.5) * g.spacing[1];
    b.z2 = g.origin[1] + (v_hi + 0.5) * g.spacing[1];
    b.score = range > 0 ? std::clamp(excess / area / range, 0.0, 1.0) : 0.0;
    out.push_back(b);
  }
  return out;
}

}  // namespace xdt::detect
