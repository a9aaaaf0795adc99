#include "xdt/boxgeom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xdt::boxgeom {

std::array<double, 2> cos_sin_deg(double theta_deg) {
  // Quarter turns return exact values (cos(pi/2) is 6e-17 in floating point).
  double r = std::fmod(theta_deg, 360.0);
  if (r < 0) r += 360.0;
  if (r == 0.0) return {1.0, 0.0};
  if (r == 90.0) return {0.0, 1.0};
  if (r == 180.0) return {-1.0, 0.0};
  if (r == 270.0) return {0.0, -1.0};
  const double rad = r * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

namespace {

double safe_log_ratio(double size, double anchor_size) {
  if (!(size > 0.0)) throw EncodeError("cannot encode a box with zero extent");
  return std::log(size / anchor_size);
}

}  // namespace

Offsets2 encode_box(const Box2& box, const Anchor2& anchor) {
  anchor.validate();
  const double w = box.x2 - box.x1, h = box.z2 - box.z1;
  const double tw = safe_log_ratio(w, anchor.w);
  const double th = safe_log_ratio(h, anchor.h);
  const double cx = 0.5 * (box.x1 + box.x2), cz = 0.5 * (box.z1 + box.z2);
  return {(cx - anchor.x) / anchor.w, (cz - anchor.z) / anchor.h, tw, th};
}

Offsets3 encode_box(const Box3& box, const Anchor3& anchor) {
  anchor.validate();
  const double w = box.x2 - box.x1, h = box.y2 - box.y1, d = box.z2 - box.z1;
  const double tw = safe_log_ratio(w, anchor.w);
  const double th = safe_log_ratio(h, anchor.h);
  const double td = safe_log_ratio(d, anchor.d);
  const double cx = 0.5 * (box.x1 + box.x2);
  const double cy = 0.5 * (box.y1 + box.y2);
  const double cz = 0.5 * (box.z1 + box.z2);
  return {(cx - anchor.x) / anchor.w, (cy - anchor.y) / anchor.h,
          (cz - anchor.z) / anchor.d, tw, th, td};
}

Box2 decode_box(const Offsets2& t, const Anchor2& anchor) {
  anchor.validate();
  const double cx = anchor.x + t[0] * anchor.w;
  const double cz = anchor.z + t[1] * anchor.h;
  const double w = anchor.w * std::exp(t[2]);
  const double h = anchor.h * std::exp(t[3]);
  Box2 b;
  b.x1 = cx - 0.5 * w;
  b.x2 = cx + 0.5 * w;
  b.z1 = cz - 0.5 * h;
  b.z2 = cz + 0.5 * h;
  return b;
}

Box3 decode_box(const Offsets3& t, const Anchor3& anchor) {
  anchor.validate();
  const double cx = anchor.x + t[0] * anchor.w;
  const double cy = anchor.y + t[1] * anchor.h;
  const double cz = anchor.z + t[2] * anchor.d;
  const double w = anchor.w * std::exp(t[3]);
  const double h = anchor.h * std::exp(t[4]);
  const double d = anchor.d * std::exp(t[5]);
  Box3 b;
  b.x1 = cx - 0.5 * w;
  b.x2 = cx + 0.5 * w;
  b.y1 = cy - 0.5 * h;
  b.y2 = cy + 0.5 * h;
  b.z1 = cz - 0.5 * d;
  b.z2 = cz + 0.5 * d;
  return b;
}

Point2 rotate2(Point2 p, double theta_deg, Point2 center) {
  const auto [c, s] = cos_sin_deg(theta_deg);
  if (c == 1.0 && s == 0.0) return p;
  const double dx = p.x - center.x, dy = p.y - center.y;
  return {c * dx + s * dy + center.x, -s * dx + c * dy + center.y};
}

Box2 project_box3(const Box3& box, double theta_deg, Point2 center) {
  const std::array<Point2, 4> corners{{{box.x1, box.y1},
                                       {box.x1, box.y2},
                                       {box.x2, box.y1},
                                       {box.x2, box.y2}}};
  double lo = rotate2(corners[0], theta_deg, center).x;
  double hi = lo;
  for (std::size_t i = 1; i < corners.size(); ++i) {
    const double x = rotate2(corners[i], theta_deg, center).x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  Box2 out;
  out.x1 = lo;
  out.x2 = hi;
  out.z1 = box.z1;
  out.z2 = box.z2;
  out.score = box.score;
  out.label = box.label;
  return out;
}

namespace {

double overlap(double a1, double a2, double b1, double b2) {
  return std::max(0.0, std::min(a2, b2) - std::max(a1, b1));
}

}  // namespace

double iou2(const Box2& a, const Box2& b) {
  const double inter = overlap(a.x1, a.x2, b.x1, b.x2) * overlap(a.z1, a.z2, b.z1, b.z2);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    // Both boxes degenerate: only coincident points count as a match.
    const bool point = a.x1 == a.x2 && a.z1 == a.z2;
    return (point && a.x1 == b.x1 && a.x2 == b.x2 && a.z1 == b.z1 && a.z2 == b.z2) ? 1.0
                                                                                 : 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou3(const Box3& a, const Box3& b) {
  const double inter = overlap(a.x1, a.x2, b.x1, b.x2) *
                       overlap(a.y1, a.y2, b.y1, b.y2) *
                       overlap(a.z1, a.z2, b.z1, b.z2);
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) {
    const bool point = a.x1 == a.x2 && a.y1 == a.y2 && a.z1 == a.z2;
    return (point && a.x1 == b.x1 && a.x2 == b.x2 && a.y1 == b.y1 && a.y2 == b.y2 &&
            a.z1 == b.z1 && a.z2 == b.z2)
               ? 1.0
               : 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace xdt::boxgeom
