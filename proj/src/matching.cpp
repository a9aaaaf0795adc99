#include "xdt/matching.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "xdt/boxgeom.hpp"

namespace xdt::matching {

double IouMatrices::mean_iou(std::size_t i) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < cols; ++k) sum += u_at(i, k);
  return cols ? sum / static_cast<double>(cols) : 0.0;
}

IouMatrices build_iou_matrix(const std::vector<Box3>& boxes3,
                             const std::vector<std::vector<Box2>>& boxes2,
                             const ViewSet& views, double threshold) {
  if (boxes2.size() != views.size())
    throw GeometryError("boxes2 has " + std::to_string(boxes2.size()) +
                        " views, view set has " + std::to_string(views.size()));
  IouMatrices m;
  m.rows = boxes3.size();
  m.cols = views.size();
  m.u.assign(m.rows * m.cols, 0.0);
  m.q.assign(m.rows * m.cols, -1);
  const boxgeom::Point2 center{views.rotation_center[0], views.rotation_center[1]};
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t k = 0; k < m.cols; ++k) {
      const Box2 proj = boxgeom::project_box3(boxes3[i], views.angles[k], center);
      double best = 0.0;
      int arg = -1;
      for (std::size_t j = 0; j < boxes2[k].size(); ++j) {
        const double v = boxgeom::iou2(proj, boxes2[k][j]);
        if (arg < 0 || v > best) {
          best = v;
          arg = static_cast<int>(j);
        }
      }
      m.u[i * m.cols + k] = best;
      m.q[i * m.cols + k] = best > threshold ? arg : -1;
    }
  }
  return m;
}

Resolution resolve_matches(const IouMatrices& m) {
  std::vector<double> mean(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) mean[i] = m.mean_iou(i);
  std::vector<std::size_t> order(m.rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });

  std::vector<std::set<int>> used(m.cols);
  Resolution res;
  for (std::size_t i : order) {
    bool any = false, conflict = false;
    for (std::size_t k = 0; k < m.cols; ++k) {
      const int q = m.q_at(i, k);
      if (q < 0) continue;
      any = true;
      if (used[k].count(q)) conflict = true;
    }
    if (!any || conflict) continue;
    std::vector<int> row(m.cols);
    for (std::size_t k = 0; k < m.cols; ++k) {
      row[k] = m.q_at(i, k);
      if (row[k] >= 0) used[k].insert(row[k]);
    }
    res.kept.push_back(i);
    res.rows.push_back(std::move(row));
  }
  return res;
}

MatchOutcome collaborate(const std::vector<Box3>& boxes3,
                         const std::vector<std::vector<Box2>>& boxes2,
                         const ViewSet& views, const MatchOptions& opts) {
  const IouMatrices m = build_iou_matrix(boxes3, boxes2, views, opts.threshold);
  const Resolution res = resolve_matches(m);
  const boxgeom::Point2 center{views.rotation_center[0], views.rotation_center[1]};

  MatchOutcome out;
  std::vector<std::vector<bool>> referenced(views.size());
  for (std::size_t k = 0; k < views.size(); ++k) referenced[k].assign(boxes2[k].size(), false);

  for (std::size_t g = 0; g < res.kept.size(); ++g) {
    const std::size_t i = res.kept[g];
    MatchGroup group;
    group.index3 = i;
    group.box3 = boxes3[i];
    group.q = res.rows[g];
    group.mean_iou = m.mean_iou(i);

    double score_sum = 0.0;
    int score_count = 0;
    if (boxes3[i].score) {
      score_sum += *boxes3[i].score;
      ++score_count;
    }
    for (std::size_t k = 0; k < views.size(); ++k) {
      const int q = group.q[k];
      if (q < 0) continue;
      referenced[k][q] = true;
      if (const auto& s = boxes2[k][q].score) {
        score_sum += *s;
        ++score_count;
      }
    }
    group.score = score_count ? score_sum / score_count : 0.0;

    for (std::size_t k = 0; k < views.size(); ++k) {
      const int q = group.q[k];
      ViewAssignment va;
      if (q >= 0) {
        va.box = boxes2[k][q];
        va.source = Source::detected;
        va.index = q;
      } else {
        va.box = boxgeom::project_box3(boxes3[i], views.angles[k], center);
        va.box.score = group.score;
        va.source = Source::recovered;
      }
      group.views.push_back(std::move(va));
    }
    out.groups.push_back(std::move(group));
  }

  out.leftovers.resize(views.size());
  for (std::size_t k = 0; k < views.size(); ++k)
    for (std::size_t j = 0; j < boxes2[k].size(); ++j)
      if (!referenced[k][j])
        out.leftovers[k].push_back({static_cast<int>(k), static_cast<int>(j), boxes2[k][j]});
  return out;
}

std::vector<std::vector<Box2>> collaborative_detections(const MatchOutcome& outcome,
                                                        std::size_t num_views) {
  std::vector<std::vector<Box2>> out(num_views);
  for (const auto& g : outcome.groups)
    for (std::size_t k = 0; k < num_views && k < g.views.size(); ++k)
      out[k].push_back(g.views[k].box);
  for (std::size_t k = 0; k < num_views && k < outcome.leftovers.size(); ++k)
    for (const auto& l : outcome.leftovers[k]) out[k].push_back(l.box);
  return out;
}

}  // namespace xdt::matching
