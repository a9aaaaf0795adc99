#pragma once

#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "xdt/types.hpp"

namespace xdt::io {

// Grids are stored as `<base>.json` (header) next to `<base>.raw`
// (little-endian float32 payload in the grid's native index order).
inline constexpr int kFormatVersion = 1;

void write_volume(const Volume3& volume, const std::filesystem::path& base);
Volume3 read_volume(const std::filesystem::path& base);

void write_image(const Image2& image, const std::filesystem::path& base);
Image2 read_image(const std::filesystem::path& base);

/// One line of a boxes file.
struct BoxRecord {
  std::optional<int> view;
  std::variant<Box2, Box3> box;

  bool operator==(const BoxRecord&) const = default;
};

void write_boxes(const std::vector<BoxRecord>& records,
                 const std::filesystem::path& path);
std::vector<BoxRecord> read_boxes(const std::filesystem::path& path);
/// Parses JSON-lines text; errors carry the 1-based line number.
std::vector<BoxRecord> parse_boxes(const std::string& text);
std::string format_boxes(const std::vector<BoxRecord>& records);

// Convenience helpers for the per-view layout used by the pipeline.
std::vector<BoxRecord> to_records(const std::vector<std::vector<Box2>>& per_view);
std::vector<BoxRecord> to_records(const std::vector<Box3>& boxes);
/// Groups 2D records by view index; records without a view go to view 0.
std::vector<std::vector<Box2>> per_view_boxes(const std::vector<BoxRecord>& records,
                                              std::size_t num_views);
std::vector<Box3> boxes3(const std::vector<BoxRecord>& records);

std::filesystem::path with_suffix(const std::filesystem::path& base,
                                  const char* suffix);

}  // namespace xdt::io
