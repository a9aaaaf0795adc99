#include "xdt/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace xdt::io {

using nlohmann::json;

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
           (v >> 24);
  }
}

void write_payload(std::span<const float> values, const std::filesystem::path& path) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    words[i] = to_le(std::bit_cast<std::uint32_t>(values[i]));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<float> read_payload(const std::filesystem::path& path,
                                std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes % sizeof(float) != 0 || bytes / sizeof(float) != expected)
    throw FormatError(path.string() + ": payload holds " +
                      std::to_string(bytes / sizeof(float)) +
                      " floats, header requires " + std::to_string(expected));
  std::vector<std::uint32_t> words(expected);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  std::vector<float> values(expected);
  for (std::size_t i = 0; i < expected; ++i)
    values[i] = std::bit_cast<float>(to_le(words[i]));
  return values;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

json read_header(const std::filesystem::path& path, const char* kind) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json header;
  try {
    header = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (header.value("kind", "") != kind)
    throw FormatError(path.string() + ": expected kind '" + kind + "'");
  if (header.value("dtype", "") != "f32le")
    throw FormatError(path.string() + ": unsupported dtype");
  if (header.value("version", 0) != kFormatVersion)
    throw FormatError(path.string() + ": unsupported version");
  return header;
}

template <std::size_t N, typename T>
std::array<T, N> get_array(const json& j, const char* key) {
  try {
    auto v = j.at(key).get<std::vector<T>>();
    if (v.size() != N) throw FormatError(std::string("field '") + key + "' has wrong length");
    std::array<T, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

std::filesystem::path with_suffix(const std::filesystem::path& base,
                                  const char* suffix) {
  auto p = base;
  p += suffix;
  return p;
}

void write_volume(const Volume3& volume, const std::filesystem::path& base) {
  const auto& g = volume.geometry();
  json header = {{"kind", "volume"},
                 {"version", kFormatVersion},
                 {"dtype", "f32le"},
                 {"dims", g.dims},
                 {"spacing", g.spacing},
                 {"origin", g.origin},
                 {"channels", g.channels},
                 {"order", "channel,z,y,x"}};
  write_text(with_suffix(base, ".json"), header.dump(2) + "\n");
  write_payload(volume.data(), with_suffix(base, ".raw"));
}

Volume3 read_volume(const std::filesystem::path& base) {
  const json header = read_header(with_suffix(base, ".json"), "volume");
  VolumeGeometry g;
  g.dims = get_array<3, int>(header, "dims");
  g.spacing = get_array<3, double>(header, "spacing");
  g.origin = get_array<3, double>(header, "origin");
  g.channels = header.value("channels", 0);
  g.validate();
  return Volume3(g, read_payload(with_suffix(base, ".raw"), g.size()));
}

void write_image(const Image2& image, const std::filesystem::path& base) {
  const auto& g = image.geometry();
  json header = {{"kind", "image"},
                 {"version", kFormatVersion},
                 {"dtype", "f32le"},
                 {"dims", g.dims},
                 {"spacing", g.spacing},
                 {"origin", g.origin},
                 {"channels", g.channels},
                 {"order", "channel,v,u"}};
  write_text(with_suffix(base, ".json"), header.dump(2) + "\n");
  write_payload(image.data(), with_suffix(base, ".raw"));
}

Image2 read_image(const std::filesystem::path& base) {
  const json header = read_header(with_suffix(base, ".json"), "image");
  ImageGeometry g;
  g.dims = get_array<2, int>(header, "dims");
  g.spacing = get_array<2, double>(header, "spacing");
  g.origin = get_array<2, double>(header, "origin");
  g.channels = header.value("channels", 0);
  g.validate();
  return Image2(g, read_payload(with_suffix(base, ".raw"), g.size()));
}

namespace {

json record_to_json(const BoxRecord& r) {
  json j;
  if (r.view) j["view"] = *r.view;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box2>) {
          j["kind"] = "2d";
          j["coords"] = {b.x1, b.z1, b.x2, b.z2};
        } else {
          j["kind"] = "3d";
          j["coords"] = {b.x1, b.y1, b.z1, b.x2, b.y2, b.z2};
        }
        j["score"] = b.score ? json(*b.score) : json(nullptr);
        j["label"] = b.label ? json(*b.label) : json(nullptr);
      },
      r.box);
  return j;
}

BoxRecord record_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "record is not an object");
  BoxRecord r;
  if (j.contains("view") && !j["view"].is_null()) {
    if (!j["view"].is_number_integer()) throw ParseError(line, "view must be an integer");
    r.view = j["view"].get<int>();
  }
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ParseError(line, "missing kind");
  const auto kind = j["kind"].get<std::string>();
  if (!j.contains("coords") || !j["coords"].is_array())
    throw ParseError(line, "missing coords");
  std::vector<double> c;
  for (const auto& v : j["coords"]) {
    if (!v.is_number()) throw ParseError(line, "coords must be numbers");
    c.push_back(v.get<double>());
  }
  std::optional<double> score;
  if (j.contains("score") && !j["score"].is_null()) {
    if (!j["score"].is_number()) throw ParseError(line, "score must be a number");
    score = j["score"].get<double>();
  }
  std::optional<std::string> label;
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_string()) throw ParseError(line, "label must be a string");
    label = j["label"].get<std::string>();
  }
  try {
    if (kind == "2d") {
      if (c.size() != 4) throw ParseError(line, "2d record needs 4 coords, got " + std::to_string(c.size()));
      Box2 b{c[0], c[1], c[2], c[3], score, label};
      b.validate();
      r.box = b;
    } else if (kind == "3d") {
      if (c.size() != 6) throw ParseError(line, "3d record needs 6 coords, got " + std::to_string(c.size()));
      Box3 b{c[0], c[1], c[2], c[3], c[4], c[5], score, label};
      b.validate();
      r.box = b;
    } else {
      throw ParseError(line, "unknown kind '" + kind + "'");
    }
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  }
  return r;
}

}  // namespace

std::string format_boxes(const std::vector<BoxRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<BoxRecord> parse_boxes(const std::string& text) {
  std::vector<BoxRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    records.push_back(record_from_json(j, line_no));
  }
  return records;
}

void write_boxes(const std::vector<BoxRecord>& records,
                 const std::filesystem::path& path) {
  write_text(path, format_boxes(records));
}

std::vector<BoxRecord> read_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_boxes(ss.str());
}

std::vector<BoxRecord> to_records(const std::vector<std::vector<Box2>>& per_view) {
  std::vector<BoxRecord> out;
  for (std::size_t k = 0; k < per_view.size(); ++k)
    for (const auto& b : per_view[k]) out.push_back({static_cast<int>(k), b});
  return out;
}

std::vector<BoxRecord> to_records(const std::vector<Box3>& boxes) {
  std::vector<BoxRecord> out;
  for (const auto& b : boxes) out.push_back({std::nullopt, b});
  return out;
}

std::vector<std::vector<Box2>> per_view_boxes(const std::vector<BoxRecord>& records,
                                              std::size_t num_views) {
  std::vector<std::vector<Box2>> out(num_views);
  for (const auto& r : records) {
    const auto* b = std::get_if<Box2>(&r.box);
    if (!b) continue;
    const int k = r.view.value_or(0);
    if (k < 0 || static_cast<std::size_t>(k) >= num_views)
      throw GeometryError("box record references view " + std::to_string(k) +
                          " but only " + std::to_string(num_views) + " views exist");
    out[k].push_back(*b);
  }
  return out;
}

std::vector<Box3> boxes3(const std::vector<BoxRecord>& records) {
  std::vector<Box3> out;
  for (const auto& r : records)
    if (const auto* b = std::get_if<Box3>(&r.box)) out.push_back(*b);
  return out;
}

}  // namespace xdt::io
