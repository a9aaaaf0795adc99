#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xdt {

// Error hierarchy. Every failure surfaced by the library is one of these.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct EncodeError : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

/// Shape and placement of a 3D grid. Voxel (i, j, k) has its center at
/// origin + (i, j, k) * spacing in world millimeters.
struct VolumeGeometry {
  std::array<int, 3> dims{1, 1, 1};           // nx, ny, nz
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  int channels = 1;

  std::size_t voxels() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t size() const { return voxels() * channels; }
  void validate() const;

  /// Geometry whose voxel centers are symmetric about the world origin.
  static VolumeGeometry centered(std::array<int, 3> dims,
                                 std::array<double, 3> spacing,
                                 int channels = 1);

  bool operator==(const VolumeGeometry&) const = default;
};

/// Multi-channel 3D scalar grid. Index order is channel-major, then z, y, x
/// with x fastest. Immutable after construction; all values are finite.
class Volume3 {
 public:
  Volume3() = default;
  Volume3(VolumeGeometry geom, std::vector<float> data);
  /// Zero-filled volume.
  explicit Volume3(VolumeGeometry geom);

  const VolumeGeometry& geometry() const { return geom_; }
  const std::array<int, 3>& dims() const { return geom_.dims; }
  const std::array<double, 3>& spacing() const { return geom_.spacing; }
  const std::array<double, 3>& origin() const { return geom_.origin; }
  int channels() const { return geom_.channels; }
  std::span<const float> data() const { return data_; }
  std::span<const float> channel(int c) const {
    return std::span<const float>(data_).subspan(
        static_cast<std::size_t>(c) * geom_.voxels(), geom_.voxels());
  }

  std::size_t index(int c, int z, int y, int x) const {
    return ((static_cast<std::size_t>(c) * geom_.dims[2] + z) * geom_.dims[1] +
            y) * geom_.dims[0] + x;
  }
  float at(int c, int z, int y, int x) const { return data_[index(c, z, y, x)]; }

  /// World coordinate of a voxel center along one axis.
  double world(int axis, int i) const {
    return geom_.origin[axis] + i * geom_.spacing[axis];
  }

  bool operator==(const Volume3&) const = default;

 private:
  VolumeGeometry geom_;
  std::vector<float> data_;
};

/// Detector-plane grid. Pixel (iu, iv) has its center at
/// origin + (iu, iv) * spacing; u is the in-plane detector axis, v the axial.
struct ImageGeometry {
  std::array<int, 2> dims{1, 1};  // nu, nv
  std::array<double, 2> spacing{1.0, 1.0};
  std::array<double, 2> origin{0.0, 0.0};
  int channels = 1;

  std::size_t pixels() const {
    return static_cast<std::size_t>(dims[0]) * dims[1];
  }
  std::size_t size() const { return pixels() * channels; }
  void validate() const;

  bool operator==(const ImageGeometry&) const = default;
};

/// Multi-channel 2D image, channel-major then v, u with u fastest.
class Image2 {
 public:
  Image2() = default;
  Image2(ImageGeometry geom, std::vector<float> data);
  explicit Image2(ImageGeometry geom);

  const ImageGeometry& geometry() const { return geom_; }
  const std::array<int, 2>& dims() const { return geom_.dims; }
  const std::array<double, 2>& spacing() const { return geom_.spacing; }
  const std::array<double, 2>& origin() const { return geom_.origin; }
  int channels() const { return geom_.channels; }
  std::span<const float> data() const { return data_; }
  std::span<const float> channel(int c) const {
    return std::span<const float>(data_).subspan(
        static_cast<std::size_t>(c) * geom_.pixels(), geom_.pixels());
  }
  std::size_t index(int c, int v, int u) const {
    return (static_cast<std::size_t>(c) * geom_.dims[1] + v) * geom_.dims[0] + u;
  }
  float at(int c, int v, int u) const { return data_[index(c, v, u)]; }

  bool operator==(const Image2&) const = default;

 private:
  ImageGeometry geom_;
  std::vector<float> data_;
};

/// Shared imaging parameters: projection angles (degrees) about the world
/// z axis, detector shape, and the rotation center. The detector u axis is
/// centered on the rotation center; v maps rigidly to world z and is
/// centered on axial_center.
struct ViewSet {
  std::vector<double> angles;
  std::array<int, 2> detector_dims{256, 256};
  std::array<double, 2> detector_spacing{2.0, 2.0};
  std::array<double, 2> rotation_center{0.0, 0.0};
  double axial_center = 0.0;

  std::size_t size() const { return angles.size(); }
  void validate() const;
  /// Geometry of the image produced for any view.
  ImageGeometry image_geometry(int channels = 1) const;
};

struct Box2 {
  double x1 = 0, z1 = 0, x2 = 0, z2 = 0;
  std::optional<double> score;
  std::optional<std::string> label;

  double width() const { return x2 - x1; }
  double height() const { return z2 - z1; }
  double area() const { return width() * height(); }
  void validate() const;
  bool operator==(const Box2&) const = default;
};

struct Box3 {
  double x1 = 0, y1 = 0, z1 = 0, x2 = 0, y2 = 0, z2 = 0;
  std::optional<double> score;
  std::optional<std::string> label;

  double volume() const { return (x2 - x1) * (y2 - y1) * (z2 - z1); }
  void validate() const;
  bool operator==(const Box3&) const = default;
};

struct Anchor2 {
  double x = 0, z = 0;  // center
  double w = 1, h = 1;  // size, strictly positive
  void validate() const;
};

struct Anchor3 {
  double x = 0, y = 0, z = 0;
  double w = 1, h = 1, d = 1;
  void validate() const;
};

}  // namespace xdt
