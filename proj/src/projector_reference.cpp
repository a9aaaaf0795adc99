#include <cmath>

#include "projector_detail.hpp"
#include "xdt/projector.hpp"

namespace xdt::reference {

namespace {

int inside_count(const VolumeGeometry& grid, const detail::ViewRays& rays,
                 const ProjectorConfig& cfg, int iu) {
  std::vector<std::pair<int, double>> tx, ty;
  std::vector<detail::Tap> taps;
  int inside = 0;
  for (int m = 0; m < rays.samples(); ++m) {
    double x, y;
    rays.point(iu, m, x, y);
    detail::inplane_taps(grid, cfg.interpolation, x, y, tx, ty, taps);
    if (!taps.empty()) ++inside;
  }
  return inside;
}

}  // namespace

std::vector<Image2> forward_project(const Volume3& volume, const ViewSet& views,
                                    const ProjectorConfig& cfg) {
  views.validate();
  const auto& grid = volume.geometry();
  const double step = cfg.resolved_step(grid);
  const auto rows = detail::row_taps(grid, views, cfg.interpolation);
  const int nu = views.detector_dims[0], nv = views.detector_dims[1];
  std::vector<std::pair<int, double>> tx, ty;
  std::vector<detail::Tap> taps;

  std::vector<Image2> out;
  for (double angle : views.angles) {
    const auto rays = detail::make_view_rays(grid, views, angle, step);
    const auto geom = views.image_geometry(volume.channels());
    std::vector<float> pixels(geom.size(), 0.0f);
    std::vector<double> scale(nu);
    for (int iu = 0; iu < nu; ++iu)
      scale[iu] = detail::ray_scale(cfg, step, inside_count(grid, rays, cfg, iu));
    for (int c = 0; c < volume.channels(); ++c) {
      for (int iv = 0; iv < nv; ++iv) {
        for (int iu = 0; iu < nu; ++iu) {
          double acc = 0.0;
          for (int m = 0; m < rays.samples(); ++m) {
            double x, y;
            rays.point(iu, m, x, y);
            detail::inplane_taps(grid, cfg.interpolation, x, y, tx, ty, taps);
            for (const auto& zt : rows[iv])
              for (const auto& t : taps)
                acc += zt.weight * t.weight *
                       volume.at(c, zt.index, t.index / grid.dims[0], t.index % grid.dims[0]);
          }
          pixels[(static_cast<std::size_t>(c) * nv + iv) * nu + iu] =
              static_cast<float>(acc * scale[iu]);
        }
      }
    }
    out.emplace_back(geom, std::move(pixels));
  }
  return out;
}

Volume3 back_project(const std::vector<Image2>& images, const ViewSet& views,
                     const VolumeGeometry& grid_in, const ProjectorConfig& cfg) {
  views.validate();
  if (images.size() != views.size())
    throw GeometryError("back_project: image count differs from view count");
  VolumeGeometry grid = grid_in;
  grid.channels = images.front().channels();
  grid.validate();
  const double step = cfg.resolved_step(grid);
  const auto rows = detail::row_taps(grid, views, cfg.interpolation);
  const int nu = views.detector_dims[0], nv = views.detector_dims[1];
  const std::size_t slice = static_cast<std::size_t>(grid.dims[0]) * grid.dims[1];
  std::vector<double> acc(grid.size(), 0.0);
  std::vector<std::pair<int, double>> tx, ty;
  std::vector<detail::Tap> taps;

  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto rays = detail::make_view_rays(grid, views, views.angles[k], step);
    std::vector<double> scale(nu);
    for (int iu = 0; iu < nu; ++iu)
      scale[iu] = detail::ray_scale(cfg, step, inside_count(grid, rays, cfg, iu));
    for (int c = 0; c < grid.channels; ++c) {
      for (int iv = 0; iv < nv; ++iv) {
        for (int iu = 0; iu < nu; ++iu) {
          const double g = images[k].at(c, iv, iu) * scale[iu];
          for (int m = 0; m < rays.samples(); ++m) {
            double x, y;
            rays.point(iu, m, x, y);
            detail::inplane_taps(grid, cfg.interpolation, x, y, tx, ty, taps);
            for (const auto& zt : rows[iv])
              for (const auto& t : taps)
                acc[(static_cast<std::size_t>(c) * grid.dims[2] + zt.index) * slice + t.index] +=
                    zt.weight * t.weight * g;
          }
        }
      }
    }
  }
  std::vector<float> data(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) data[i] = static_cast<float>(acc[i]);
  return Volume3(grid, std::move(data));
}

}  // namespace xdt::reference
