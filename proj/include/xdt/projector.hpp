#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xdt/types.hpp"

namespace xdt {

enum class Interpolation {
  nearest,           // nearest voxel in x, y and z
  bilinear_in_plane  // bilinear in x/y, linear between axial slices
};

enum class Normalization {
  ray_sum,         // sum of samples times ray step (line integral, mm)
  mean_along_ray   // sum of samples over the number of samples inside the grid
};

struct ProjectorConfig {
  /// Sampling step along rays in mm. Unset means the smallest in-plane
  /// voxel spacing of the volume being projected.
  std::optional<double> ray_step;
  Interpolation interpolation = Interpolation::bilinear_in_plane;
  Normalization normalization = Normalization::ray_sum;

  double resolved_step(const VolumeGeometry& geom) const;
};

Interpolation parse_interpolation(const std::string& name);
Normalization parse_normalization(const std::string& name);
std::string to_string(Interpolation interp);
std::string to_string(Normalization norm);

/// Parallel-beam line integrals of every channel, one image per view.
/// The ray for view theta runs along (-sin theta, cos theta) in the x/y
/// plane; the detector u coordinate is the x component of the same rotation
/// boxgeom::rotate2 applies, so box projection and image projection agree.
std::vector<Image2> forward_project(const Volume3& volume, const ViewSet& views,
                                    const ProjectorConfig& cfg = {});

/// Exact transpose of forward_project for the same geometry and config,
/// summed over views. `grid` fixes the output shape; its channel count is
/// replaced by the images' channel count.
Volume3 back_project(const std::vector<Image2>& images, const ViewSet& views,
                     const VolumeGeometry& grid, const ProjectorConfig& cfg = {});

/// Forward projection of volume * mask, i.e. the organ-only radiograph.
/// The mask must be single-channel, binary and share the volume's grid.
std::vector<Image2> dissect_project(const Volume3& volume, const Volume3& mask,
                                    const ViewSet& views,
                                    const ProjectorConfig& cfg = {});

/// Elementwise product of each channel with a single-channel binary mask.
Volume3 apply_mask(const Volume3& volume, const Volume3& mask);

namespace reference {

// Serial ray-marching versions. They recompute sample positions on the fly
// and accumulate in natural loop order; used by tests, selfcheck and the
// benchmark as the baseline for the parallel kernels.
std::vector<Image2> forward_project(const Volume3& volume, const ViewSet& views,
                                    const ProjectorConfig& cfg = {});
Volume3 back_project(const std::vector<Image2>& images, const ViewSet& views,
                     const VolumeGeometry& grid, const ProjectorConfig& cfg = {});

}  // namespace reference

}  // namespace xdt
