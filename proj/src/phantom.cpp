#include "xdt/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xdt/boxgeom.hpp"
#include "xdt/random.hpp"

namespace xdt {

bool Ellipsoid::contains(double x, double y, double z) const {
  const double dx = (x - center[0]) / half_axes[0];
  const double dy = (y - center[1]) / half_axes[1];
  const double dz = (z - center[2]) / half_axes[2];
  return dx * dx + dy * dy + dz * dz <= 1.0;
}

PhantomSpec PhantomSpec::defaults() {
  PhantomSpec s;
  s.lungs = {Ellipsoid{{-50, -5, 0}, {38, 55, 85}, 0.25},
             Ellipsoid{{50, -5, 0}, {38, 55, 85}, 0.25}};
  s.random_nodules.count = 4;
  return s;
}

void PhantomSpec::validate() const {
  geometry().validate();
  if (!(body.half_axes[0] > 0 && body.half_axes[1] > 0))
    throw ValidationError("body half-axes must be positive");
  if (body.attenuation < 0) throw ValidationError("attenuations must be non-negative");
  for (const auto& l : lungs) {
    if (!(l.half_axes[0] > 0 && l.half_axes[1] > 0 && l.half_axes[2] > 0))
      throw ValidationError("lung half-axes must be positive");
    if (l.attenuation < 0) throw ValidationError("attenuations must be non-negative");
    if (l.attenuation >= body.attenuation)
      throw ValidationError("lung attenuation must be below body attenuation");
  }
  if (ribs.count < 0) throw ValidationError("rib count must be non-negative");
  if (ribs.count > 0) {
    if (!(ribs.thickness > 0)) throw ValidationError("rib thickness must be positive");
    if (ribs.attenuation < body.attenuation)
      throw ValidationError("rib attenuation must exceed body attenuation");
  }
  for (const auto& n : nodules) {
    if (!(n.diameter > 0)) throw ValidationError("nodule diameter must be positive");
    if (n.attenuation < 0) throw ValidationError("attenuations must be non-negative");
    const bool inside = std::any_of(lungs.begin(), lungs.end(), [&](const Ellipsoid& l) {
      return l.contains(n.center[0], n.center[1], n.center[2]);
    });
    if (!inside) throw ValidationError("nodule center lies outside both lungs");
  }
  if (random_nodules.count < 0) throw ValidationError("random nodule count must be >= 0");
  if (random_nodules.count > 0) {
    if (lungs.empty()) throw ValidationError("random nodules need at least one lung");
    if (!(random_nodules.diameter_min > 0) ||
        random_nodules.diameter_max < random_nodules.diameter_min)
      throw ValidationError("random nodule diameter range is invalid");
  }
}

std::vector<NoduleSpec> resolve_nodules(const PhantomSpec& spec) {
  std::vector<NoduleSpec> out = spec.nodules;
  const auto& rn = spec.random_nodules;
  if (rn.count == 0) return out;
  Rng rng(spec.seed);
  constexpr int kMaxAttempts = 10000;
  for (int placed = 0; placed < rn.count; ++placed) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      const auto& lung = spec.lungs[static_cast<std::size_t>(rng.uniform() * spec.lungs.size())];
      const double d = rng.uniform(rn.diameter_min, rn.diameter_max);
      const double r = 0.5 * d;
      std::array<double, 3> p;
      do {
        for (auto& v : p) v = rng.uniform(-1.0, 1.0);
      } while (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] > 1.0);
      NoduleSpec n;
      n.diameter = d;
      n.attenuation = rn.attenuation;
      bool fits = true;
      for (int a = 0; a < 3; ++a) {
        const double room = lung.half_axes[a] - r - spec.spacing[a];
        if (room <= 0) fits = false;
        n.center[a] = lung.center[a] + p[a] * std::max(room, 0.0);
      }
      if (!fits) continue;
      ok = std::all_of(out.begin(), out.end(), [&](const NoduleSpec& o) {
        const double dist = std::hypot(n.center[0] - o.center[0], n.center[1] - o.center[1],
                                       n.center[2] - o.center[2]);
        return dist >= r + 0.5 * o.diameter + rn.min_gap;
      });
      if (ok) out.push_back(n);
    }
    if (!ok) throw ValidationError("could not place random nodule without overlap");
  }
  return out;
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const auto nodules = resolve_nodules(spec);
  const VolumeGeometry grid = spec.geometry();
  const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
  const std::size_t n = grid.voxels();

  std::vector<float> att(n, 0.0f), lung(n, 0.0f), rib(n, 0.0f);
  std::vector<std::vector<float>> nod(nodules.size(), std::vector<float>(n, 0.0f));

  const double ax = spec.body.half_axes[0], ay = spec.body.half_axes[1];
  const double rib_outer = spec.ribs.radius_scale;
  const double rib_inner = rib_outer - spec.ribs.thickness / std::min(ax, ay);
  std::vector<double> rib_z(spec.ribs.count);
  for (int i = 0; i < spec.ribs.count; ++i)
    rib_z[i] = (i - 0.5 * (spec.ribs.count - 1)) * spec.ribs.spacing;

#pragma omp parallel for schedule(static)
  for (int iz = 0; iz < nz; ++iz) {
    const double z = grid.origin[2] + iz * grid.spacing[2];
    const bool rib_slab = std::any_of(rib_z.begin(), rib_z.end(), [&](double rz) {
      return std::abs(z - rz) <= 0.5 * spec.ribs.thickness;
    });
    for (int iy = 0; iy < ny; ++iy) {
      const double y = grid.origin[1] + iy * grid.spacing[1];
      for (int ix = 0; ix < nx; ++ix) {
        const double x = grid.origin[0] + ix * grid.spacing[0];
        const std::size_t idx = (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
        const double rho = std::sqrt((x / ax) * (x / ax) + (y / ay) * (y / ay));
        const bool is_rib = rib_slab && rho >= rib_inner && rho <= rib_outer;
        double value = 0.0;
        if (rho <= 1.0) value = spec.body.attenuation;
        if (is_rib) value = spec.ribs.attenuation;
        bool in_lung = false;
        for (const auto& l : spec.lungs) {
          if (l.contains(x, y, z)) {
            value = l.attenuation;
            in_lung = true;
            break;
          }
        }
        for (std::size_t k = 0; k < nodules.size(); ++k) {
          const auto& nd = nodules[k];
          const double r = 0.5 * nd.diameter;
          const double dx = x - nd.center[0], dy = y - nd.center[1], dz = z - nd.center[2];
          if (dx * dx + dy * dy + dz * dz <= r * r) {
            value = nd.attenuation;
            nod[k][idx] = 1.0f;
            in_lung = true;
          }
        }
        att[idx] = static_cast<float>(value);
        if (in_lung) lung[idx] = 1.0f;
        else if (is_rib) rib[idx] = 1.0f;
      }
    }
  }

  Phantom out{Volume3(grid, std::move(att)), {}, Volume3(grid, std::move(rib))};
  out.truth.lung_mask = Volume3(grid, std::move(lung));
  out.truth.nodules = nodules;
  for (std::size_t k = 0; k < nodules.size(); ++k) {
    Volume3 mask(grid, std::move(nod[k]));
    auto box = mask_bounds(mask);
    if (!box) throw ValidationError("nodule " + std::to_string(k) + " covers no voxel centers");
    box->label = "nodule-" + std::to_string(k);
    out.truth.boxes3.push_back(*box);
    out.truth.nodule_masks.push_back(std::move(mask));
  }
  return out;
}

std::optional<Box3> mask_bounds(const Volume3& mask) {
  const auto& g = mask.geometry();
  int lo[3] = {g.dims[0], g.dims[1], g.dims[2]}, hi[3] = {-1, -1, -1};
  for (int iz = 0; iz < g.dims[2]; ++iz)
    for (int iy = 0; iy < g.dims[1]; ++iy)
      for (int ix = 0; ix < g.dims[0]; ++ix) {
        if (mask.at(0, iz, iy, ix) == 0.0f) continue;
        const int idx[3] = {ix, iy, iz};
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], idx[a]);
          hi[a] = std::max(hi[a], idx[a]);
        }
      }
  if (hi[0] < 0) return std::nullopt;
  auto edge = [&](int a, int i, double side) {
    return g.origin[a] + (i + side) * g.spacing[a];
  };
  Box3 b;
  b.x1 = edge(0, lo[0], -0.5);
  b.x2 = edge(0, hi[0], 0.5);
  b.y1 = edge(1, lo[1], -0.5);
  b.y2 = edge(1, hi[1], 0.5);
  b.z1 = edge(2, lo[2], -0.5);
  b.z2 = edge(2, hi[2], 0.5);
  return b;
}

std::optional<Box2> image_bounds(const Image2& image, int channel, float threshold) {
  const auto& g = image.geometry();
  int lo[2] = {g.dims[0], g.dims[1]}, hi[2] = {-1, -1};
  for (int iv = 0; iv < g.dims[1]; ++iv)
    for (int iu = 0; iu < g.dims[0]; ++iu) {
      if (!(image.at(channel, iv, iu) > threshold)) continue;
      lo[0] = std::min(lo[0], iu);
      hi[0] = std::max(hi[0], iu);
      lo[1] = std::min(lo[1], iv);
      hi[1] = std::max(hi[1], iv);
    }
  if (hi[0] < 0) return std::nullopt;
  Box2 b;
  b.x1 = g.origin[0] + (lo[0] - 0.5) * g.spacing[0];
  b.x2 = g.origin[0] + (hi[0] + 0.5) * g.spacing[0];
  b.z1 = g.origin[1] + (lo[1] - 0.5) * g.spacing[1];
  b.z2 = g.origin[1] + (hi[1] + 0.5) * g.spacing[1];
  return b;
}

ProjectorConfig mask_projection_config(const VolumeGeometry& grid) {
  ProjectorConfig cfg;
  cfg.interpolation = Interpolation::nearest;
  cfg.normalization = Normalization::ray_sum;
  cfg.ray_step = 0.5 * std::min(grid.spacing[0], grid.spacing[1]);
  return cfg;
}

GroundTruth make_ground_truth_boxes(GroundTruth gt, const ViewSet& views) {
  views.validate();
  gt.boxes2.assign(views.size(), {});
  if (gt.nodule_masks.empty()) return gt;

  // Stack the nodule masks as channels so one projection call covers all.
  const VolumeGeometry single = gt.nodule_masks.front().geometry();
  VolumeGeometry stacked = single;
  stacked.channels = static_cast<int>(gt.nodule_masks.size());
  std::vector<float> data;
  data.reserve(stacked.size());
  for (const auto& m : gt.nodule_masks) data.insert(data.end(), m.data().begin(), m.data().end());
  const auto images = forward_project(Volume3(stacked, std::move(data)), views,
                                      mask_projection_config(single));

  const boxgeom::Point2 center{views.rotation_center[0], views.rotation_center[1]};
  for (std::size_t k = 0; k < views.size(); ++k) {
    for (std::size_t i = 0; i < gt.nodule_masks.size(); ++i) {
      auto box = image_bounds(images[k], static_cast<int>(i));
      // A nodule entirely off the detector falls back to its analytic footprint.
      Box2 b = box ? *box : boxgeom::project_box3(gt.boxes3[i], views.angles[k], center);
      b.label = gt.boxes3[i].label;
      b.score.reset();
      gt.boxes2[k].push_back(b);
    }
  }
  return gt;
}

namespace {

Volume3 resample_axial(const Volume3& volume, double target_spacing, bool nearest) {
  const auto& g = volume.geometry();
  if (!(target_spacing > 0.0) || target_spacing > g.spacing[2])
    throw ValidationError("target spacing must be positive and not exceed current spacing");
  if (target_spacing == g.spacing[2]) return volume;
  const double extent = (g.dims[2] - 1) * g.spacing[2];
  const int nz = static_cast<int>(std::floor(extent / target_spacing + 1e-9)) + 1;
  VolumeGeometry out = g;
  out.dims[2] = nz;
  out.spacing[2] = target_spacing;
  const std::size_t slice = static_cast<std::size_t>(g.dims[0]) * g.dims[1];
  std::vector<float> data(out.size());
  const auto src = volume.data();
  for (int c = 0; c < g.channels; ++c) {
    for (int iz = 0; iz < nz; ++iz) {
      const double f = iz * target_spacing / g.spacing[2];
      int i0 = std::min(static_cast<int>(std::floor(f)), g.dims[2] - 1);
      const double w = std::clamp(f - i0, 0.0, 1.0);
      const int i1 = std::min(i0 + 1, g.dims[2] - 1);
      const float* s0 = src.data() + (static_cast<std::size_t>(c) * g.dims[2] + i0) * slice;
      const float* s1 = src.data() + (static_cast<std::size_t>(c) * g.dims[2] + i1) * slice;
      float* d = data.data() + (static_cast<std::size_t>(c) * nz + iz) * slice;
      for (std::size_t i = 0; i < slice; ++i) {
        if (nearest) {
          const float v = w < 0.5 ? s0[i] : s1[i];
          d[i] = v >= 0.5f ? 1.0f : 0.0f;
        } else {
          d[i] = static_cast<float>((1.0 - w) * s0[i] + w * s1[i]);
        }
      }
    }
  }
  return Volume3(out, std::move(data));
}

}  // namespace

Volume3 upsample_axial(const Volume3& volume, double target_spacing) {
  return resample_axial(volume, target_spacing, false);
}

Volume3 upsample_axial_mask(const Volume3& mask, double target_spacing) {
  return resample_axial(mask, target_spacing, true);
}

}  // namespace xdt
