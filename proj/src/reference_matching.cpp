#include "xdt/reference_matching.hpp"

#include <algorithm>

#include "xdt/boxgeom.hpp"

namespace xdt::reference {

using matching::MatchGroup;
using matching::MatchOutcome;
using matching::Source;

MatchOutcome naive_collaborate(const std::vector<Box3>& boxes3,
                               const std::vector<std::vector<Box2>>& boxes2,
                               const ViewSet& views, double threshold) {
  const std::size_t n = boxes3.size(), views_n = views.size();
  const boxgeom::Point2 center{views.rotation_center[0], views.rotation_center[1]};

  // Full pairwise IoU table, then max / first-argmax per (3D box, view).
  std::vector<std::vector<double>> u(n, std::vector<double>(views_n, 0.0));
  std::vector<std::vector<int>> q(n, std::vector<int>(views_n, -1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < views_n; ++k) {
      const Box2 p = boxgeom::project_box3(boxes3[i], views.angles[k], center);
      std::vector<double> all;
      for (const auto& b : boxes2[k]) all.push_back(boxgeom::iou2(p, b));
      if (all.empty()) continue;
      const auto it = std::max_element(all.begin(), all.end());
      u[i][k] = *it;
      q[i][k] = *it > threshold ? static_cast<int>(it - all.begin()) : -1;
    }
  }
  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < views_n; ++k) s += u[i][k];
    mean[i] = views_n ? s / static_cast<double>(views_n) : 0.0;
  }

  // Repeatedly take the best remaining candidate and discard everything that
  // shares a matched 2D box with it.
  std::vector<bool> alive(n, false);
  for (std::size_t i = 0; i < n; ++i)
    alive[i] = std::any_of(q[i].begin(), q[i].end(), [](int v) { return v >= 0; });
  std::vector<std::size_t> kept;
  while (true) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i] && (best == n || mean[i] > mean[best])) best = i;
    if (best == n) break;
    kept.push_back(best);
    alive[best] = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!alive[j]) continue;
      for (std::size_t k = 0; k < views_n; ++k)
        if (q[j][k] >= 0 && q[j][k] == q[best][k]) alive[j] = false;
    }
  }

  MatchOutcome out;
  out.leftovers.resize(views_n);
  for (std::size_t i : kept) {
    MatchGroup g;
    g.index3 = i;
    g.box3 = boxes3[i];
    g.q = q[i];
    g.mean_iou = mean[i];
    double sum = 0.0;
    int cnt = 0;
    if (boxes3[i].score) sum += *boxes3[i].score, ++cnt;
    for (std::size_t k = 0; k < views_n; ++k)
      if (q[i][k] >= 0 && boxes2[k][q[i][k]].score) sum += *boxes2[k][q[i][k]].score, ++cnt;
    g.score = cnt ? sum / cnt : 0.0;
    for (std::size_t k = 0; k < views_n; ++k) {
      matching::ViewAssignment va;
      if (q[i][k] >= 0) {
        va.box = boxes2[k][q[i][k]];
        va.index = q[i][k];
        va.source = Source::detected;
      } else {
        va.box = boxgeom::project_box3(boxes3[i], views.angles[k], center);
        va.box.score = g.score;
        va.source = Source::recovered;
      }
      g.views.push_back(va);
    }
    out.groups.push_back(g);
  }
  for (std::size_t k = 0; k < views_n; ++k) {
    for (std::size_t j = 0; j < boxes2[k].size(); ++j) {
      const bool used = std::any_of(kept.begin(), kept.end(), [&](std::size_t i) {
        return q[i][k] == static_cast<int>(j);
      });
      if (!used) out.leftovers[k].push_back({static_cast<int>(k), static_cast<int>(j), boxes2[k][j]});
    }
  }
  return out;
}

bool same_outcome(const MatchOutcome& a, const MatchOutcome& b, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (a.groups.size() != b.groups.size()) return fail("group count differs");
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    const auto& x = a.groups[g];
    const auto& y = b.groups[g];
    if (x.index3 != y.index3) return fail("group " + std::to_string(g) + ": 3D index differs");
    if (!(x.box3 == y.box3)) return fail("group " + std::to_string(g) + ": 3D box differs");
    if (x.q != y.q) return fail("group " + std::to_string(g) + ": index row differs");
    if (x.mean_iou != y.mean_iou) return fail("group " + std::to_string(g) + ": mean IoU differs");
    if (x.score != y.score) return fail("group " + std::to_string(g) + ": score differs");
    if (x.views.size() != y.views.size()) return fail("view count differs");
    for (std::size_t k = 0; k < x.views.size(); ++k) {
      if (!(x.views[k].box == y.views[k].box) || x.views[k].source != y.views[k].source ||
          x.views[k].index != y.views[k].index)
        return fail("group " + std::to_string(g) + ", view " + std::to_string(k) + " differs");
    }
  }
  if (a.leftovers.size() != b.leftovers.size()) return fail("leftover view count differs");
  for (std::size_t k = 0; k < a.leftovers.size(); ++k) {
    if (a.leftovers[k].size() != b.leftovers[k].size())
      return fail("leftover count differs in view " + std::to_string(k));
    for (std::size_t j = 0; j < a.leftovers[k].size(); ++j) {
      const auto& l = a.leftovers[k][j];
      const auto& r = b.leftovers[k][j];
      if (l.view != r.view || l.index != r.index || !(l.box == r.box))
        return fail("leftover differs in view " + std::to_string(k));
    }
  }
  return true;
}

}  // namespace xdt::reference
