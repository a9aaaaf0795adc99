#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xdt/matching.hpp"
#include "xdt/projector.hpp"
#include "xdt/random.hpp"

namespace xdt::selfcheck {

using ForwardFn = std::function<std::vector<Image2>(const Volume3&, const ViewSet&,
                                                    const ProjectorConfig&)>;
using BackFn = std::function<Volume3(const std::vector<Image2>&, const ViewSet&,
                                     const VolumeGeometry&, const ProjectorConfig&)>;

struct Options {
  int adjoint_instances = 20;
  int matching_instances = 200;
  int roundtrip_boxes = 1000;
  std::uint64_t seed = 1;
  // Operators under test; tests swap in broken ones.
  ForwardFn forward = [](const Volume3& v, const ViewSet& s, const ProjectorConfig& c) {
    return forward_project(v, s, c);
  };
  BackFn back = [](const std::vector<Image2>& i, const ViewSet& s, const VolumeGeometry& g,
                   const ProjectorConfig& c) { return back_project(i, s, g, c); };
};

struct Result {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The four interpolation/normalization combinations.
std::vector<ProjectorConfig> all_projector_modes();

/// Random 32^3 volume, three random views, and a random image stack of the
/// matching shape.
struct AdjointInstance {
  Volume3 volume;
  ViewSet views;
  std::vector<Image2> images;
};
AdjointInstance random_adjoint_instance(Rng& rng, int n = 32);

/// <P x, y> and <x, P^T y> in double precision.
std::pair<double, double> adjoint_pair(const AdjointInstance& inst, const ProjectorConfig& cfg,
                                       const ForwardFn& forward, const BackFn& back);

/// Random matching problem with up to `max3` 3D boxes, three views and up to
/// `max2` 2D boxes per view. 2D boxes are a mix of jittered projections of the
/// 3D boxes and unrelated clutter, so overlaps and conflicts are common.
struct MatchingInstance {
  std::vector<Box3> boxes3;
  std::vector<std::vector<Box2>> boxes2;
  ViewSet views;
};
MatchingInstance random_matching_instance(Rng& rng, int max3 = 6, int max2 = 6);

/// Recovery and suppression invariants of a matching outcome; returns an
/// empty string when they hold.
std::string check_outcome_invariants(const matching::MatchOutcome& out,
                                     const MatchingInstance& inst);

Result check_adjoint(const Options& opts);
Result check_parallel_vs_reference(const Options& opts);
Result check_roundtrip(const Options& opts);
Result check_matching(const Options& opts);

std::vector<Result> run_all(const Options& opts = {});

}  // namespace xdt::selfcheck
