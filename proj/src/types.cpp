#include "xdt/types.hpp"

#include <algorithm>
#include <cmath>

namespace xdt {

namespace {

bool all_finite(std::span<const float> values) {
  return std::all_of(values.begin(), values.end(),
                     [](float v) { return std::isfinite(v); });
}

void check_score(const std::optional<double>& score, const char* what) {
  if (score && !(*score >= 0.0 && *score <= 1.0))
    throw ValidationError(std::string(what) + ": score outside [0,1]");
}

}  // namespace

void VolumeGeometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) throw ValidationError("volume dims must be positive");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw ValidationError("volume spacing must be positive and finite");
    if (!std::isfinite(origin[a]))
      throw ValidationError("volume origin must be finite");
  }
  if (channels <= 0) throw ValidationError("volume channels must be positive");
}

VolumeGeometry VolumeGeometry::centered(std::array<int, 3> dims,
                                        std::array<double, 3> spacing,
                                        int channels) {
  VolumeGeometry g;
  g.dims = dims;
  g.spacing = spacing;
  g.channels = channels;
  for (int a = 0; a < 3; ++a) g.origin[a] = -0.5 * (dims[a] - 1) * spacing[a];
  return g;
}

Volume3::Volume3(VolumeGeometry geom, std::vector<float> data)
    : geom_(geom), data_(std::move(data)) {
  geom_.validate();
  if (data_.size() != geom_.size())
    throw FormatError("volume data length " + std::to_string(data_.size()) +
                      " does not match geometry (" +
                      std::to_string(geom_.size()) + ")");
  if (!all_finite(data_)) throw ValidationError("volume contains non-finite values");
}

Volume3::Volume3(VolumeGeometry geom) : geom_(geom) {
  geom_.validate();
  data_.assign(geom_.size(), 0.0f);
}

void ImageGeometry::validate() const {
  for (int a = 0; a < 2; ++a) {
    if (dims[a] <= 0) throw ValidationError("image dims must be positive");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw ValidationError("image spacing must be positive and finite");
    if (!std::isfinite(origin[a]))
      throw ValidationError("image origin must be finite");
  }
  if (channels <= 0) throw ValidationError("image channels must be positive");
}

Image2::Image2(ImageGeometry geom, std::vector<float> data)
    : geom_(geom), data_(std::move(data)) {
  geom_.validate();
  if (data_.size() != geom_.size())
    throw FormatError("image data length " + std::to_string(data_.size()) +
                      " does not match geometry (" +
                      std::to_string(geom_.size()) + ")");
  if (!all_finite(data_)) throw ValidationError("image contains non-finite values");
}

Image2::Image2(ImageGeometry geom) : geom_(geom) {
  geom_.validate();
  data_.assign(geom_.size(), 0.0f);
}

void ViewSet::validate() const {
  if (angles.empty()) throw GeometryError("view set needs at least one angle");
  for (double a : angles)
    if (!std::isfinite(a)) throw GeometryError("view angle must be finite");
  for (int a = 0; a < 2; ++a) {
    if (detector_dims[a] <= 0)
      throw GeometryError("detector dims must be positive");
    if (!(detector_spacing[a] > 0.0) || !std::isfinite(detector_spacing[a]))
      throw GeometryError("detector spacing must be positive and finite");
    if (!std::isfinite(rotation_center[a]))
      throw GeometryError("rotation center must be finite");
  }
  if (!std::isfinite(axial_center))
    throw GeometryError("axial center must be finite");
}

ImageGeometry ViewSet::image_geometry(int channels) const {
  ImageGeometry g;
  g.dims = detector_dims;
  g.spacing = detector_spacing;
  g.origin = {rotation_center[0] - 0.5 * (detector_dims[0] - 1) * detector_spacing[0],
              axial_center - 0.5 * (detector_dims[1] - 1) * detector_spacing[1]};
  g.channels = channels;
  return g;
}

void Box2::validate() const {
  for (double v : {x1, z1, x2, z2})
    if (!std::isfinite(v)) throw ValidationError("Box2: non-finite coordinate");
  if (x1 > x2 || z1 > z2) throw ValidationError("Box2: corners out of order");
  check_score(score, "Box2");
}

void Box3::validate() const {
  for (double v : {x1, y1, z1, x2, y2, z2})
    if (!std::isfinite(v)) throw ValidationError("Box3: non-finite coordinate");
  if (x1 > x2 || y1 > y2 || z1 > z2)
    throw ValidationError("Box3: corners out of order");
  check_score(score, "Box3");
}

void Anchor2::validate() const {
  if (!(w > 0.0) || !(h > 0.0)) throw ValidationError("Anchor2: sizes must be positive");
  if (!std::isfinite(x) || !std::isfinite(z) || !std::isfinite(w) || !std::isfinite(h))
    throw ValidationError("Anchor2: non-finite value");
}

void Anchor3::validate() const {
  if (!(w > 0.0) || !(h > 0.0) || !(d > 0.0))
    throw ValidationError("Anchor3: sizes must be positive");
  for (double v : {x, y, z, w, h, d})
    if (!std::isfinite(v)) throw ValidationError("Anchor3: non-finite value");
}

}  // namespace xdt
