#include "xdt/projector.hpp"

#include <cmath>

#include "projector_detail.hpp"

namespace xdt {

double ProjectorConfig::resolved_step(const VolumeGeometry& geom) const {
  const double step = ray_step.value_or(std::min(geom.spacing[0], geom.spacing[1]));
  if (!(step > 0.0) || !std::isfinite(step))
    throw ConfigError("ray_step must be positive and finite");
  return step;
}

Interpolation parse_interpolation(const std::string& name) {
  if (name == "nearest") return Interpolation::nearest;
  if (name == "bilinear" || name == "bilinear-in-plane")
    return Interpolation::bilinear_in_plane;
  throw ConfigError("unknown interpolation '" + name + "'");
}

Normalization parse_normalization(const std::string& name) {
  if (name == "ray-sum") return Normalization::ray_sum;
  if (name == "mean-along-ray" || name == "mean") return Normalization::mean_along_ray;
  throw ConfigError("unknown normalization '" + name + "'");
}

std::string to_string(Interpolation interp) {
  return interp == Interpolation::nearest ? "nearest" : "bilinear-in-plane";
}

std::string to_string(Normalization norm) {
  return norm == Normalization::ray_sum ? "ray-sum" : "mean-along-ray";
}

namespace {

// Sparse in-plane projection operator of one view in CSR form: detector
// column iu owns entries [offsets[iu], offsets[iu+1]), stored in ray-sample
// order with the normalization already folded into the weights.
struct Stencil {
  std::vector<std::size_t> offsets;
  std::vector<detail::Tap> taps;
};

Stencil build_stencil(const VolumeGeometry& grid, const detail::ViewRays& rays,
                      const ProjectorConfig& cfg) {
  Stencil st;
  st.offsets.reserve(rays.nu + 1);
  st.offsets.push_back(0);
  std::vector<std::pair<int, double>> tx, ty;
  std::vector<detail::Tap> taps;
  for (int iu = 0; iu < rays.nu; ++iu) {
    const std::size_t begin = st.taps.size();
    int inside = 0;
    for (int m = 0; m < rays.samples(); ++m) {
      double x, y;
      rays.point(iu, m, x, y);
      detail::inplane_taps(grid, cfg.interpolation, x, y, tx, ty, taps);
      if (taps.empty()) continue;
      ++inside;
      st.taps.insert(st.taps.end(), taps.begin(), taps.end());
    }
    const double scale = detail::ray_scale(cfg, rays.step, inside);
    for (std::size_t i = begin; i < st.taps.size(); ++i) st.taps[i].weight *= scale;
    st.offsets.push_back(st.taps.size());
  }
  return st;
}

void check_views(const ViewSet& views) { views.validate(); }

}  // namespace

std::vector<Image2> forward_project(const Volume3& volume, const ViewSet& views,
                                    const ProjectorConfig& cfg) {
  check_views(views);
  const auto& grid = volume.geometry();
  const double step = cfg.resolved_step(grid);
  const auto rows = detail::row_taps(grid, views, cfg.interpolation);
  const int nu = views.detector_dims[0], nv = views.detector_dims[1];
  const int channels = volume.channels();
  const std::size_t slice = static_cast<std::size_t>(grid.dims[0]) * grid.dims[1];
  const float* vol = volume.data().data();

  std::vector<Image2> out;
  out.reserve(views.size());
  for (double angle : views.angles) {
    const auto rays = detail::make_view_rays(grid, views, angle, step);
    const Stencil st = build_stencil(grid, rays, cfg);
    const auto img_geom = views.image_geometry(channels);
    std::vector<float> pixels(img_geom.size(), 0.0f);

    // One task per detector row; each pixel is summed by exactly one thread
    // in a fixed order, so the result does not depend on the thread count.
    const long tasks = static_cast<long>(channels) * nv;
#pragma omp parallel for schedule(static)
    for (long task = 0; task < tasks; ++task) {
      const int c = static_cast<int>(task / nv);
      const int iv = static_cast<int>(task % nv);
      float* row = pixels.data() + static_cast<std::size_t>(task) * nu;
      for (int iu = 0; iu < nu; ++iu) {
        double acc = 0.0;
        for (const auto& zt : rows[iv]) {
          const float* s = vol + (static_cast<std::size_t>(c) * grid.dims[2] + zt.index) * slice;
          double part = 0.0;
          for (std::size_t e = st.offsets[iu]; e < st.offsets[iu + 1]; ++e)
            part += st.taps[e].weight * s[st.taps[e].index];
          acc += zt.weight * part;
        }
        row[iu] = static_cast<float>(acc);
      }
    }
    out.emplace_back(img_geom, std::move(pixels));
  }
  return out;
}

Volume3 back_project(const std::vector<Image2>& images, const ViewSet& views,
                     const VolumeGeometry& grid_in, const ProjectorConfig& cfg) {
  check_views(views);
  if (images.size() != views.size())
    throw GeometryError("back_project: " + std::to_string(images.size()) +
                        " images for " + std::to_string(views.size()) + " views");
  const int channels = images.front().channels();
  for (const auto& img : images) {
    if (img.channels() != channels)
      throw GeometryError("back_project: inconsistent channel counts");
    if (img.dims() != views.detector_dims)
      throw GeometryError("back_project: image dims differ from detector dims");
  }
  VolumeGeometry grid = grid_in;
  grid.channels = channels;
  grid.validate();
  const double step = cfg.resolved_step(grid);
  const auto rows = detail::row_taps(grid, views, cfg.interpolation);
  const int nu = views.detector_dims[0];
  const int nz = grid.dims[2];

  // Invert the row table: which detector rows touch each axial slice.
  std::vector<std::vector<detail::Tap>> slice_rows(nz);
  for (int iv = 0; iv < static_cast<int>(rows.size()); ++iv)
    for (const auto& zt : rows[iv]) slice_rows[zt.index].push_back({iv, zt.weight});

  const std::size_t slice = static_cast<std::size_t>(grid.dims[0]) * grid.dims[1];
  std::vector<double> acc(grid.size(), 0.0);
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto rays = detail::make_view_rays(grid, views, views.angles[k], step);
    const Stencil st = build_stencil(grid, rays, cfg);
    const Image2& img = images[k];

    // One task per output slice: scatter stays within the slice, so no two
    // threads write the same voxel and the accumulation order is fixed.
    const long tasks = static_cast<long>(channels) * nz;
#pragma omp parallel for schedule(static)
    for (long task = 0; task < tasks; ++task) {
      const int c = static_cast<int>(task / nz);
      const int iz = static_cast<int>(task % nz);
      double* out = acc.data() + static_cast<std::size_t>(task) * slice;
      for (const auto& rt : slice_rows[iz]) {
        for (int iu = 0; iu < nu; ++iu) {
          const double g = rt.weight * img.at(c, rt.index, iu);
          if (g == 0.0) continue;
          for (std::size_t e = st.offsets[iu]; e < st.offsets[iu + 1]; ++e)
            out[st.taps[e].index] += st.taps[e].weight * g;
        }
      }
    }
  }
  std::vector<float> data(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) data[i] = static_cast<float>(acc[i]);
  return Volume3(grid, std::move(data));
}

Volume3 apply_mask(const Volume3& volume, const Volume3& mask) {
  if (mask.channels() != 1) throw ValidationError("mask must be single-channel");
  if (mask.dims() != volume.dims())
    throw ValidationError("mask dims differ from volume dims");
  const auto m = mask.data();
  for (float v : m)
    if (v != 0.0f && v != 1.0f) throw ValidationError("mask must be binary (0 or 1)");
  const auto src = volume.data();
  std::vector<float> data(src.size());
  const std::size_t n = volume.geometry().voxels();
  for (std::size_t i = 0; i < src.size(); ++i) data[i] = src[i] * m[i % n];
  return Volume3(volume.geometry(), std::move(data));
}

std::vector<Image2> dissect_project(const Volume3& volume, const Volume3& mask,
                                    const ViewSet& views, const ProjectorConfig& cfg) {
  return forward_project(apply_mask(volume, mask), views, cfg);
}

}  // namespace xdt
