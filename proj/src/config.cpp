#include <cmath>
#include <fstream>
#include <sstream>

#include "xdt/pipeline.hpp"

namespace xdt::pipeline {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

std::vector<double> read_per_view(const json& v) {
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

json per_view_json(const std::vector<double>& v) {
  return v.size() == 1 ? json(v[0]) : json(v);
}

}  // namespace

ViewSet RunConfig::default_views() {
  ViewSet v;
  v.angles = {-35.0, 0.0, 35.0};
  v.detector_dims = {256, 256};
  v.detector_spacing = {2.0, 2.0};
  return v;
}

detect::PerturbSpec RunConfig::default_perturb() {
  detect::PerturbSpec p;
  p.miss_prob = {0.3};
  p.false_pos_rate = {1.0};
  p.false_pos_rate_3d = 3.0;
  p.jitter_sigma = 1.0;
  p.score_noise_sigma = 0.1;
  return p;
}

std::vector<double> RunConfig::parse_angles(const std::string& text) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad angle '" + s + "' in '" + text + "'");
    }
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("angle range must be start:step:end");
    const double start = number(parts[0]), step = number(parts[1]), end = number(parts[2]);
    if (step == 0.0) throw ConfigError("angle step must be non-zero");
    if ((end - start) / step < 0) throw ConfigError("angle step points away from end");
    const auto count = static_cast<long>(std::floor((end - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  }
  if (out.empty()) throw ConfigError("no angles in '" + text + "'");
  return out;
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  phantom.seed = s;
  perturb.seed = s;
}

PhantomSpec phantom_spec_from_json(const json& j) {
  check_keys(j, {"dims", "spacing", "body", "lungs", "ribs", "nodules", "random_nodules", "seed"},
             "phantom");
  PhantomSpec s = PhantomSpec::defaults();
  read(j, "dims", s.dims);
  read(j, "spacing", s.spacing);
  read(j, "seed", s.seed);
  if (j.contains("body")) {
    const auto& b = j["body"];
    check_keys(b, {"half_axes", "attenuation"}, "phantom.body");
    read(b, "half_axes", s.body.half_axes);
    read(b, "attenuation", s.body.attenuation);
  }
  if (j.contains("lungs")) {
    s.lungs.clear();
    for (const auto& l : j["lungs"]) {
      check_keys(l, {"center", "half_axes", "attenuation"}, "phantom.lungs[]");
      Ellipsoid e;
      read(l, "center", e.center);
      read(l, "half_axes", e.half_axes);
      read(l, "attenuation", e.attenuation);
      s.lungs.push_back(e);
    }
  }
  if (j.contains("ribs")) {
    const auto& r = j["ribs"];
    check_keys(r, {"count", "thickness", "spacing", "attenuation", "radius_scale"}, "phantom.ribs");
    read(r, "count", s.ribs.count);
    read(r, "thickness", s.ribs.thickness);
    read(r, "spacing", s.ribs.spacing);
    read(r, "attenuation", s.ribs.attenuation);
    read(r, "radius_scale", s.ribs.radius_scale);
  }
  if (j.contains("nodules")) {
    s.nodules.clear();
    for (const auto& n : j["nodules"]) {
      check_keys(n, {"center", "diameter", "attenuation"}, "phantom.nodules[]");
      NoduleSpec ns;
      read(n, "center", ns.center);
      read(n, "diameter", ns.diameter);
      read(n, "attenuation", ns.attenuation);
      s.nodules.push_back(ns);
    }
  }
  if (j.contains("random_nodules")) {
    const auto& r = j["random_nodules"];
    check_keys(r, {"count", "diameter_min", "diameter_max", "attenuation", "min_gap"},
               "phantom.random_nodules");
    read(r, "count", s.random_nodules.count);
    read(r, "diameter_min", s.random_nodules.diameter_min);
    read(r, "diameter_max", s.random_nodules.diameter_max);
    read(r, "attenuation", s.random_nodules.attenuation);
    read(r, "min_gap", s.random_nodules.min_gap);
  }
  return s;
}

json to_json(const PhantomSpec& s) {
  json lungs = json::array();
  for (const auto& l : s.lungs)
    lungs.push_back({{"center", l.center}, {"half_axes", l.half_axes}, {"attenuation", l.attenuation}});
  json nodules = json::array();
  for (const auto& n : s.nodules)
    nodules.push_back({{"center", n.center}, {"diameter", n.diameter}, {"attenuation", n.attenuation}});
  return {{"dims", s.dims},
          {"spacing", s.spacing},
          {"body", {{"half_axes", s.body.half_axes}, {"attenuation", s.body.attenuation}}},
          {"lungs", lungs},
          {"ribs",
           {{"count", s.ribs.count},
            {"thickness", s.ribs.thickness},
            {"spacing", s.ribs.spacing},
            {"attenuation", s.ribs.attenuation},
            {"radius_scale", s.ribs.radius_scale}}},
          {"nodules", nodules},
          {"random_nodules",
           {{"count", s.random_nodules.count},
            {"diameter_min", s.random_nodules.diameter_min},
            {"diameter_max", s.random_nodules.diameter_max},
            {"attenuation", s.random_nodules.attenuation},
            {"min_gap", s.random_nodules.min_gap}}},
          {"seed", s.seed}};
}

detect::PerturbSpec perturb_spec_from_json(const json& j) {
  check_keys(j,
             {"miss_prob", "false_pos_rate", "miss_prob_3d", "false_pos_rate_3d", "jitter_sigma",
              "score_noise_sigma", "fp_score_max", "fp_size_min", "fp_size_max", "seed"},
             "perturb");
  detect::PerturbSpec p = RunConfig::default_perturb();
  try {
    if (j.contains("miss_prob")) p.miss_prob = read_per_view(j["miss_prob"]);
    if (j.contains("false_pos_rate")) p.false_pos_rate = read_per_view(j["false_pos_rate"]);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("perturb: ") + e.what());
  }
  read(j, "miss_prob_3d", p.miss_prob_3d);
  read(j, "false_pos_rate_3d", p.false_pos_rate_3d);
  read(j, "jitter_sigma", p.jitter_sigma);
  read(j, "score_noise_sigma", p.score_noise_sigma);
  read(j, "fp_score_max", p.fp_score_max);
  read(j, "fp_size_min", p.fp_size_min);
  read(j, "fp_size_max", p.fp_size_max);
  read(j, "seed", p.seed);
  p.validate();
  return p;
}

json to_json(const detect::PerturbSpec& p) {
  return {{"miss_prob", per_view_json(p.miss_prob)},
          {"false_pos_rate", per_view_json(p.false_pos_rate)},
          {"miss_prob_3d", p.miss_prob_3d},
          {"false_pos_rate_3d", p.false_pos_rate_3d},
          {"jitter_sigma", p.jitter_sigma},
          {"score_noise_sigma", p.score_noise_sigma},
          {"fp_score_max", p.fp_score_max},
          {"fp_size_min", p.fp_size_min},
          {"fp_size_max", p.fp_size_max},
          {"seed", p.seed}};
}

ViewSet views_from_json(const json& j) {
  check_keys(j, {"angles", "detector_dims", "detector_spacing", "rotation_center", "axial_center"},
             "views");
  ViewSet v = RunConfig::default_views();
  if (j.contains("angles") && j["angles"].is_string())
    v.angles = RunConfig::parse_angles(j["angles"].get<std::string>());
  else
    read(j, "angles", v.angles);
  read(j, "detector_dims", v.detector_dims);
  read(j, "detector_spacing", v.detector_spacing);
  read(j, "rotation_center", v.rotation_center);
  read(j, "axial_center", v.axial_center);
  v.validate();
  return v;
}

json to_json(const ViewSet& v) {
  return {{"angles", v.angles},
          {"detector_dims", v.detector_dims},
          {"detector_spacing", v.detector_spacing},
          {"rotation_center", v.rotation_center},
          {"axial_center", v.axial_center}};
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j,
             {"phantom", "angles", "detector", "projector", "detect", "match_threshold",
              "ap_threshold", "ap_interpolation", "sweep_angles", "out", "seed"},
             "config");
  RunConfig cfg;
  if (j.contains("seed")) cfg.apply_seed(j["seed"].get<std::uint64_t>());
  if (j.contains("phantom")) {
    const auto& p = j["phantom"];
    if (p.is_string()) {
      std::ifstream in(base_dir / p.get<std::string>());
      if (!in) throw ConfigError("cannot open phantom spec " + p.get<std::string>());
      cfg.phantom = phantom_spec_from_json(json::parse(in));
    } else {
      cfg.phantom = phantom_spec_from_json(p);
    }
    if (j.contains("seed") && !p.is_string() && !p.contains("seed"))
      cfg.phantom.seed = cfg.seed;
  }
  if (j.contains("angles")) {
    const auto& a = j["angles"];
    cfg.views.angles = a.is_string() ? RunConfig::parse_angles(a.get<std::string>())
                                     : a.get<std::vector<double>>();
  }
  if (j.contains("detector")) {
    const auto& d = j["detector"];
    check_keys(d, {"dims", "spacing", "rotation_center", "axial_center"}, "detector");
    read(d, "dims", cfg.views.detector_dims);
    read(d, "spacing", cfg.views.detector_spacing);
    read(d, "rotation_center", cfg.views.rotation_center);
    read(d, "axial_center", cfg.views.axial_center);
  }
  cfg.views.validate();
  if (j.contains("projector")) {
    const auto& p = j["projector"];
    check_keys(p, {"ray_step", "interpolation", "normalization"}, "projector");
    if (p.contains("ray_step") && !p["ray_step"].is_null())
      cfg.projector.ray_step = p["ray_step"].get<double>();
    if (p.contains("interpolation"))
      cfg.projector.interpolation = parse_interpolation(p["interpolation"].get<std::string>());
    if (p.contains("normalization"))
      cfg.projector.normalization = parse_normalization(p["normalization"].get<std::string>());
  }
  if (j.contains("detect")) {
    const auto& d = j["detect"];
    check_keys(d, {"mode", "perturb", "blob"}, "detect");
    if (d.contains("mode")) {
      const auto mode = d["mode"].get<std::string>();
      if (mode == "perturb") cfg.detect_mode = DetectMode::perturb;
      else if (mode == "blob") cfg.detect_mode = DetectMode::blob;
      else throw ConfigError("unknown detect mode '" + mode + "'");
    }
    if (d.contains("perturb")) {
      cfg.perturb = perturb_spec_from_json(d["perturb"]);
      if (j.contains("seed") && !d["perturb"].contains("seed")) cfg.perturb.seed = cfg.seed;
    }
    if (d.contains("blob")) {
      const auto& b = d["blob"];
      check_keys(b, {"threshold", "relative", "min_area"}, "detect.blob");
      read(b, "threshold", cfg.blob.threshold);
      read(b, "relative", cfg.blob.relative);
      read(b, "min_area", cfg.blob.min_area);
    }
  }
  read(j, "match_threshold", cfg.match_threshold);
  read(j, "ap_threshold", cfg.ap_threshold);
  if (j.contains("ap_interpolation")) {
    const auto s = j["ap_interpolation"].get<std::string>();
    if (s == "all-point") cfg.ap_interpolation = metrics::ApInterpolation::all_point;
    else if (s == "11-point") cfg.ap_interpolation = metrics::ApInterpolation::eleven_point;
    else throw ConfigError("unknown ap_interpolation '" + s + "'");
  }
  if (j.contains("sweep_angles")) {
    const auto& a = j["sweep_angles"];
    cfg.sweep_angles = a.is_string() ? RunConfig::parse_angles(a.get<std::string>())
                                     : a.get<std::vector<double>>();
  }
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  if (!(cfg.ap_threshold > 0.0 && cfg.ap_threshold <= 1.0))
    throw ConfigError("ap_threshold must lie in (0, 1]");
  if (cfg.match_threshold < 0.0 || cfg.match_threshold >= 1.0)
    throw ConfigError("match_threshold must lie in [0, 1)");
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json projector = {{"interpolation", to_string(cfg.projector.interpolation)},
                    {"normalization", to_string(cfg.projector.normalization)}};
  projector["ray_step"] = cfg.projector.ray_step ? json(*cfg.projector.ray_step) : json(nullptr);
  return {{"phantom", to_json(cfg.phantom)},
          {"angles", cfg.views.angles},
          {"detector",
           {{"dims", cfg.views.detector_dims},
            {"spacing", cfg.views.detector_spacing},
            {"rotation_center", cfg.views.rotation_center},
            {"axial_center", cfg.views.axial_center}}},
          {"projector", projector},
          {"detect",
           {{"mode", cfg.detect_mode == DetectMode::perturb ? "perturb" : "blob"},
            {"perturb", to_json(cfg.perturb)},
            {"blob",
             {{"threshold", cfg.blob.threshold},
              {"relative", cfg.blob.relative},
              {"min_area", cfg.blob.min_area}}}}},
          {"match_threshold", cfg.match_threshold},
          {"ap_threshold", cfg.ap_threshold},
          {"ap_interpolation",
           cfg.ap_interpolation == metrics::ApInterpolation::all_point ? "all-point" : "11-point"},
          {"sweep_angles", cfg.sweep_angles},
          {"out", cfg.out_dir.string()},
          {"seed", cfg.seed}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return run_config_from_json(j, path.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace xdt::pipeline
