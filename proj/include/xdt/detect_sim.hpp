#pragma once

#include <cstdint>
#include <vector>

#include "xdt/phantom.hpp"
#include "xdt/types.hpp"

namespace xdt::detect {

/// Perturbation model standing in for trained 2D and 3D detectors.
/// Per-view vectors of length 1 are broadcast to every view.
struct PerturbSpec {
  std::vector<double> miss_prob{0.0};
  std::vector<double> false_pos_rate{0.0};  // expected false positives per view
  double miss_prob_3d = 0.0;
  double false_pos_rate_3d = 0.0;
  double jitter_sigma = 0.0;       // mm, per corner coordinate
  double score_noise_sigma = 0.0;  // true detections score 1 - |noise|
  double fp_score_max = 0.5;       // false positives score U(0, fp_score_max)
  double fp_size_min = 10.0;       // mm
  double fp_size_max = 30.0;
  std::uint64_t seed = 0;

  void validate() const;
  double miss(std::size_t view) const;
  double fp_rate(std::size_t view) const;
};

struct Detections {
  std::vector<std::vector<Box2>> boxes2;  // per view
  std::vector<Box3> boxes3;
};

/// Seeded detector simulation over ground truth with boxes2 filled.
/// Each true 2D box is dropped with the view's miss probability, otherwise
/// corner-jittered and scored; false positives are placed uniformly inside
/// the lung footprint. 3D candidates follow the same recipe in the volume.
Detections perturb_detect(const GroundTruth& gt, const ViewSet& views,
                          const PerturbSpec& spec);

struct BlobParams {
  float threshold = 0.0f;
  int min_area = 1;  // pixels
};

/// Threshold + 4-connected labelling on a single-channel image. Each
/// component with at least `min_area` pixels yields its tight box in world
/// coordinates, scored by its mean excess over the threshold relative to
/// the image's peak excess.
std::vector<Box2> blob_detect(const Image2& image, const BlobParams& params);

}  // namespace xdt::detect
