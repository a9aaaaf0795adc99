#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "xdt/projector.hpp"
#include "xdt/types.hpp"

namespace xdt {

struct Ellipsoid {
  std::array<double, 3> center{0, 0, 0};
  std::array<double, 3> half_axes{1, 1, 1};
  double attenuation = 0;

  bool contains(double x, double y, double z) const;
};

/// Elliptical cylinder along z centered on the world z axis.
struct BodySpec {
  std::array<double, 2> half_axes{115, 85};
  double attenuation = 1.0;
};

/// Rib arcs: rings hugging the body outline at `radius_scale` of its
/// half-axes, `thickness` mm radially and axially, `spacing` mm apart in z.
struct RibSpec {
  int count = 8;
  double thickness = 6;
  double spacing = 20;
  double attenuation = 2.0;
  double radius_scale = 0.92;
};

struct NoduleSpec {
  std::array<double, 3> center{0, 0, 0};
  double diameter = 20;
  double attenuation = 1.0;
};

/// Nodules placed at seeded random positions inside the lungs.
struct RandomNoduleSpec {
  int count = 0;
  double diameter_min = 20;
  double diameter_max = 30;
  double attenuation = 1.0;
  double min_gap = 4;  // mm between nodule surfaces
};

struct PhantomSpec {
  std::array<int, 3> dims{128, 128, 128};
  std::array<double, 3> spacing{2, 2, 2};
  BodySpec body;
  std::vector<Ellipsoid> lungs;
  RibSpec ribs;
  std::vector<NoduleSpec> nodules;
  RandomNoduleSpec random_nodules;
  std::uint64_t seed = 0;

  /// Desk-scale chest: 128^3 at 2 mm, two lungs, eight ribs and four random
  /// nodules of 20-30 mm.
  static PhantomSpec defaults();
  void validate() const;
  VolumeGeometry geometry() const {
    return VolumeGeometry::centered(dims, spacing, 1);
  }
};

struct GroundTruth {
  Volume3 lung_mask;
  std::vector<Volume3> nodule_masks;
  std::vector<Box3> boxes3;
  std::vector<std::vector<Box2>> boxes2;  // [view][nodule], empty until filled
  std::vector<NoduleSpec> nodules;        // resolved nodule list
};

struct Phantom {
  Volume3 volume;
  GroundTruth truth;
  Volume3 rib_mask;
};

/// Rasterizes the phantom (voxel included when its center lies inside the
/// analytic surface). Throws ValidationError when a nodule center lies
/// outside every lung.
Phantom generate_phantom(const PhantomSpec& spec);

/// Resolves the nodule list, drawing random placements from the seed.
std::vector<NoduleSpec> resolve_nodules(const PhantomSpec& spec);

/// Tight world-space bound of the non-zero voxels of a single-channel mask,
/// using voxel edges. Empty mask gives nullopt.
std::optional<Box3> mask_bounds(const Volume3& mask);

/// Tight world-space bound of the non-zero pixels of one image channel.
std::optional<Box2> image_bounds(const Image2& image, int channel = 0,
                                 float threshold = 0.0f);

/// Fills gt.boxes2 from forward projections of each nodule mask.
GroundTruth make_ground_truth_boxes(GroundTruth gt, const ViewSet& views);

/// Trilinear resampling along z onto `target_spacing` (<= current spacing).
Volume3 upsample_axial(const Volume3& volume, double target_spacing);
/// Nearest-neighbour axial resampling followed by re-binarization at 0.5.
Volume3 upsample_axial_mask(const Volume3& mask, double target_spacing);

/// Projector settings used for mask-derived 2D boxes.
ProjectorConfig mask_projection_config(const VolumeGeometry& grid);

}  // namespace xdt
