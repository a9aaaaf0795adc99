#pragma once

#include <array>

#include "xdt/types.hpp"

namespace xdt::boxgeom {

using Offsets2 = std::array<double, 4>;  // t_x, t_z, t_w, t_h
using Offsets3 = std::array<double, 6>;  // t_x, t_y, t_z, t_w, t_h, t_d

/// Regression offsets of a box relative to an anchor: center deltas scaled
/// by anchor size, log size ratios. Throws EncodeError on zero extent.
Offsets2 encode_box(const Box2& box, const Anchor2& anchor);
Offsets3 encode_box(const Box3& box, const Anchor3& anchor);

Box2 decode_box(const Offsets2& t, const Anchor2& anchor);
Box3 decode_box(const Offsets3& t, const Anchor3& anchor);

struct Point2 {
  double x = 0, y = 0;
};

/// Rotates a point about `center` with the matrix [[c, s], [-s, c]], theta in
/// degrees. Positive theta turns clockwise in a right-handed x/y frame.
Point2 rotate2(Point2 p, double theta_deg, Point2 center);

/// Bounds of a 3D box seen by a parallel-beam detector at theta: the rotated
/// x-extent of its four in-plane corners crossed with its z-extent.
/// Score and label carry over.
Box2 project_box3(const Box3& box, double theta_deg, Point2 center);

double iou2(const Box2& a, const Box2& b);
double iou3(const Box3& a, const Box3& b);

// Overloads so generic code (AP evaluation) can stay agnostic.
inline double iou(const Box2& a, const Box2& b) { return iou2(a, b); }
inline double iou(const Box3& a, const Box3& b) { return iou3(a, b); }

/// cos/sin of an angle in degrees, exact at multiples of 90.
std::array<double, 2> cos_sin_deg(double theta_deg);

}  // namespace xdt::boxgeom
