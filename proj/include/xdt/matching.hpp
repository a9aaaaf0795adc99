#pragma once

#include <vector>

#include "xdt/types.hpp"

namespace xdt::matching {

/// N x K matrices stored row-major: row i is a 3D box, column k a view.
struct IouMatrices {
  std::size_t rows = 0, cols = 0;
  std::vector<double> u;  // best IoU of projected 3D box i against view k
  std::vector<int> q;     // index of that 2D box, or -1 when u <= threshold

  double u_at(std::size_t i, std::size_t k) const { return u[i * cols + k]; }
  int q_at(std::size_t i, std::size_t k) const { return q[i * cols + k]; }
  double mean_iou(std::size_t i) const;
};

/// Projects every 3D box into every view and records, per view, the best
/// overlapping 2D detection. Ties go to the lowest 2D index. A 3D box counts
/// as unmatched in a view when its best IoU is <= `threshold`.
IouMatrices build_iou_matrix(const std::vector<Box3>& boxes3,
                             const std::vector<std::vector<Box2>>& boxes2,
                             const ViewSet& views, double threshold = 0.0);

struct Resolution {
  std::vector<std::size_t> kept;      // surviving 3D indices, by descending mean IoU
  std::vector<std::vector<int>> rows;  // matched index rows, parallel to `kept`
};

/// Conflict resolution: walks 3D boxes by descending mean IoU (lowest index
/// first on ties) and keeps a box unless it shares a matched 2D detection in
/// some view with an already kept box. Boxes matched in no view are dropped.
Resolution resolve_matches(const IouMatrices& m);

enum class Source { detected, recovered };

struct ViewAssignment {
  Box2 box;
  Source source = Source::detected;
  int index = -1;  // 2D detection index in this view, -1 when recovered
};

struct MatchGroup {
  std::size_t index3 = 0;  // position of the 3D box in the input list
  Box3 box3;
  std::vector<ViewAssignment> views;  // one per view
  std::vector<int> q;
  double mean_iou = 0;
  double score = 0;  // mean of the available 2D and 3D scores
};

struct Leftover {
  int view = 0;
  int index = 0;
  Box2 box;
};

struct MatchOutcome {
  std::vector<MatchGroup> groups;
  std::vector<std::vector<Leftover>> leftovers;  // per view
};

struct MatchOptions {
  double threshold = 0.0;
};

/// Full 2D-3D collaborative matching: missing views of a matched group are
/// filled with the projected 3D box (carrying the group score); 2D boxes
/// referenced by no group are returned unchanged as leftovers.
MatchOutcome collaborate(const std::vector<Box3>& boxes3,
                         const std::vector<std::vector<Box2>>& boxes2,
                         const ViewSet& views, const MatchOptions& opts = {});

/// Per-view 2D detections after matching: group boxes followed by leftovers.
std::vector<std::vector<Box2>> collaborative_detections(const MatchOutcome& outcome,
                                                        std::size_t num_views);

}  // namespace xdt::matching
