#pragma once

// Ray geometry shared by the parallel and serial projector kernels.

#include <algorithm>
#include <cmath>
#include <vector>

#include "xdt/boxgeom.hpp"
#include "xdt/projector.hpp"

namespace xdt::detail {

struct Tap {
  int index;  // flat index into an x/y slice, or a slice number for axial taps
  double weight;
};

/// Interpolation taps at fractional grid position f along an axis of n cells.
/// Appends (cell, weight) pairs with non-zero weight.
inline void axis_taps(double f, int n, Interpolation interp,
                      std::vector<std::pair<int, double>>& out) {
  out.clear();
  if (interp == Interpolation::nearest) {
    const double r = std::floor(f + 0.5);
    if (r >= 0 && r < n) out.emplace_back(static_cast<int>(r), 1.0);
    return;
  }
  const double fl = std::floor(f);
  const double w1 = f - fl;
  const int i0 = static_cast<int>(fl);
  if (i0 >= 0 && i0 < n && w1 < 1.0) out.emplace_back(i0, 1.0 - w1);
  if (i0 + 1 >= 0 && i0 + 1 < n && w1 > 0.0) out.emplace_back(i0 + 1, w1);
}

struct ViewRays {
  double cos_t = 1, sin_t = 0;
  double xc = 0, yc = 0;
  double u0 = 0, su = 1;  // world u of detector column 0 relative to xc
  int nu = 1;
  int half_samples = 0;
  double step = 1;

  int samples() const { return 2 * half_samples + 1; }

  void point(int iu, int m, double& x, double& y) const {
    const double a = u0 + iu * su;
    const double t = (m - half_samples) * step;
    x = xc + cos_t * a - sin_t * t;
    y = yc + sin_t * a + cos_t * t;
  }
};

/// Ray lattice for one view: samples at integer multiples of the step,
/// symmetric about the detector plane through the rotation center, long
/// enough to cross the whole grid footprint plus one voxel of margin.
inline ViewRays make_view_rays(const VolumeGeometry& grid, const ViewSet& views,
                               double angle_deg, double step) {
  ViewRays r;
  const auto cs = boxgeom::cos_sin_deg(angle_deg);
  r.cos_t = cs[0];
  r.sin_t = cs[1];
  r.xc = views.rotation_center[0];
  r.yc = views.rotation_center[1];
  r.nu = views.detector_dims[0];
  r.su = views.detector_spacing[0];
  r.u0 = -0.5 * (r.nu - 1) * r.su;
  r.step = step;
  double radius = 0;
  for (int cx = 0; cx < 2; ++cx) {
    for (int cy = 0; cy < 2; ++cy) {
      const double x = cx ? grid.origin[0] + grid.dims[0] * grid.spacing[0]
                          : grid.origin[0] - grid.spacing[0];
      const double y = cy ? grid.origin[1] + grid.dims[1] * grid.spacing[1]
                          : grid.origin[1] - grid.spacing[1];
      radius = std::max(radius, std::hypot(x - r.xc, y - r.yc));
    }
  }
  r.half_samples = static_cast<int>(std::ceil(radius / step));
  return r;
}

/// In-plane taps of one sample point, flattened to slice indices.
inline void inplane_taps(const VolumeGeometry& grid, Interpolation interp,
                         double x, double y,
                         std::vector<std::pair<int, double>>& tx,
                         std::vector<std::pair<int, double>>& ty,
                         std::vector<Tap>& out) {
  out.clear();
  const double fx = (x - grid.origin[0]) / grid.spacing[0];
  const double fy = (y - grid.origin[1]) / grid.spacing[1];
  axis_taps(fx, grid.dims[0], interp, tx);
  if (tx.empty()) return;
  axis_taps(fy, grid.dims[1], interp, ty);
  for (const auto& [iy, wy] : ty)
    for (const auto& [ix, wx] : tx) out.push_back({iy * grid.dims[0] + ix, wy * wx});
}

/// Axial taps of each detector row: slice index and weight.
inline std::vector<std::vector<Tap>> row_taps(const VolumeGeometry& grid,
                                              const ViewSet& views,
                                              Interpolation interp) {
  const int nv = views.detector_dims[1];
  const double sv = views.detector_spacing[1];
  const double v0 = views.axial_center - 0.5 * (nv - 1) * sv;
  std::vector<std::vector<Tap>> rows(nv);
  std::vector<std::pair<int, double>> tz;
  for (int iv = 0; iv < nv; ++iv) {
    const double z = v0 + iv * sv;
    axis_taps((z - grid.origin[2]) / grid.spacing[2], grid.dims[2], interp, tz);
    for (const auto& [iz, w] : tz) rows[iv].push_back({iz, w});
  }
  return rows;
}

inline double ray_scale(const ProjectorConfig& cfg, double step, int inside) {
  if (cfg.normalization == Normalization::ray_sum) return step;
  return inside > 0 ? 1.0 / inside : 0.0;
}

}  // namespace xdt::detail
