#include "xdt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "xdt/io.hpp"

namespace xdt::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace files {

namespace {
std::string indexed(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02zu", stem, i);
  return buf;
}
}  // namespace

std::string nodule_mask(std::size_t i) { return indexed("nodule_mask", i); }
std::string projection(std::size_t view) { return indexed("projection_v", view); }
std::string lung_mask_projection(std::size_t view) { return indexed("lung_mask_projection_v", view); }
std::string dissected(std::size_t view) { return indexed("dissected_v", view); }

}  // namespace files

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing input " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void require(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing input " + path.string() + " (run the earlier stage first)");
}

/// Ground truth reassembled from the phantom stage's files.
GroundTruth load_truth(const RunConfig& cfg, bool with_masks) {
  const fs::path dir = cfg.out_dir;
  require(dir / files::kGt3d);
  GroundTruth gt;
  gt.boxes3 = io::boxes3(io::read_boxes(dir / files::kGt3d));
  require(io::with_suffix(dir / files::kLungMask, ".json"));
  gt.lung_mask = io::read_volume(dir / files::kLungMask);
  if (with_masks)
    for (std::size_t i = 0; i < gt.boxes3.size(); ++i)
      gt.nodule_masks.push_back(io::read_volume(dir / files::nodule_mask(i)));
  return gt;
}

std::vector<Image2> read_images(const fs::path& dir, std::size_t n,
                                std::string (*name)(std::size_t)) {
  std::vector<Image2> out;
  for (std::size_t k = 0; k < n; ++k) {
    require(io::with_suffix(dir / name(k), ".json"));
    out.push_back(io::read_image(dir / name(k)));
  }
  return out;
}

std::string format_angle(double a) {
  std::ostringstream ss;
  ss << a;
  return ss.str();
}

}  // namespace

ViewSet stage_views(const RunConfig& cfg) {
  const fs::path p = cfg.out_dir / files::kViews;
  if (fs::exists(p)) return views_from_json(read_json(p));
  return cfg.views;
}

void run_phantom(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const Phantom ph = generate_phantom(cfg.phantom);
  io::write_volume(ph.volume, cfg.out_dir / files::kVolume);
  io::write_volume(ph.truth.lung_mask, cfg.out_dir / files::kLungMask);
  io::write_volume(ph.rib_mask, cfg.out_dir / files::kRibMask);
  for (std::size_t i = 0; i < ph.truth.nodule_masks.size(); ++i)
    io::write_volume(ph.truth.nodule_masks[i], cfg.out_dir / files::nodule_mask(i));
  io::write_boxes(io::to_records(ph.truth.boxes3), cfg.out_dir / files::kGt3d);
  json spec = to_json(cfg.phantom);
  json resolved = json::array();
  for (const auto& n : ph.truth.nodules)
    resolved.push_back({{"center", n.center}, {"diameter", n.diameter}, {"attenuation", n.attenuation}});
  spec["resolved_nodules"] = resolved;
  write_json(cfg.out_dir / files::kPhantomSpec, spec);
}

void run_project(const RunConfig& cfg) {
  const fs::path dir = cfg.out_dir;
  require(io::with_suffix(dir / files::kVolume, ".json"));
  const Volume3 volume = io::read_volume(dir / files::kVolume);
  GroundTruth gt = load_truth(cfg, true);
  const ViewSet& views = cfg.views;
  views.validate();

  const auto projections = forward_project(volume, views, cfg.projector);
  const auto lung_proj = forward_project(gt.lung_mask, views, cfg.projector);
  for (std::size_t k = 0; k < views.size(); ++k) {
    io::write_image(projections[k], dir / files::projection(k));
    io::write_image(lung_proj[k], dir / files::lung_mask_projection(k));
  }
  gt = make_ground_truth_boxes(std::move(gt), views);
  io::write_boxes(io::to_records(gt.boxes2), dir / files::kGt2d);
  write_json(dir / files::kViews, to_json(views));
}

void run_dissect(const RunConfig& cfg) {
  const fs::path dir = cfg.out_dir;
  require(io::with_suffix(dir / files::kVolume, ".json"));
  const Volume3 volume = io::read_volume(dir / files::kVolume);
  const Volume3 mask = io::read_volume(dir / files::kLungMask);
  const ViewSet views = stage_views(cfg);
  const auto images = dissect_project(volume, mask, views, cfg.projector);
  for (std::size_t k = 0; k < views.size(); ++k) io::write_image(images[k], dir / files::dissected(k));
}

void run_detect(const RunConfig& cfg) {
  const fs::path dir = cfg.out_dir;
  const ViewSet views = stage_views(cfg);
  GroundTruth gt = load_truth(cfg, false);
  require(dir / files::kGt2d);
  gt.boxes2 = io::per_view_boxes(io::read_boxes(dir / files::kGt2d), views.size());

  detect::Detections dets = detect::perturb_detect(gt, views, cfg.perturb);
  if (cfg.detect_mode == DetectMode::blob) {
    // 2D boxes come from the dissected images; 3D candidates still come
    // from the perturbation model.
    const auto images = read_images(dir, views.size(), files::dissected);
    for (std::size_t k = 0; k < views.size(); ++k) {
      detect::BlobParams bp;
      bp.min_area = cfg.blob.min_area;
      const auto data = images[k].data();
      const float peak = data.empty() ? 0.0f : *std::max_element(data.begin(), data.end());
      bp.threshold = static_cast<float>(cfg.blob.relative ? cfg.blob.threshold * peak
                                                          : cfg.blob.threshold);
      dets.boxes2[k] = detect::blob_detect(images[k], bp);
    }
  }
  io::write_boxes(io::to_records(dets.boxes2), dir / files::kDet2d);
  io::write_boxes(io::to_records(dets.boxes3), dir / files::kDet3d);
}

json to_json(const matching::MatchOutcome& outcome, const ViewSet& views) {
  auto box2 = [](const Box2& b) {
    json j = {{"coords", {b.x1, b.z1, b.x2, b.z2}}};
    j["score"] = b.score ? json(*b.score) : json(nullptr);
    j["label"] = b.label ? json(*b.label) : json(nullptr);
    return j;
  };
  json groups = json::array();
  for (const auto& g : outcome.groups) {
    json per_view = json::array();
    for (std::size_t k = 0; k < g.views.size(); ++k) {
      const auto& va = g.views[k];
      json e = box2(va.box);
      e["view"] = k;
      e["status"] = va.source == matching::Source::detected ? "detected" : "recovered";
      e["index"] = va.index;
      per_view.push_back(e);
    }
    json b3 = {{"coords", {g.box3.x1, g.box3.y1, g.box3.z1, g.box3.x2, g.box3.y2, g.box3.z2}}};
    b3["score"] = g.box3.score ? json(*g.box3.score) : json(nullptr);
    b3["label"] = g.box3.label ? json(*g.box3.label) : json(nullptr);
    groups.push_back({{"index3d", g.index3},
                      {"box3d", b3},
                      {"views", per_view},
                      {"q", g.q},
                      {"mean_iou", g.mean_iou},
                      {"score", g.score}});
  }
  json leftovers = json::array();
  for (const auto& per_view : outcome.leftovers)
    for (const auto& l : per_view) {
      json e = box2(l.box);
      e["view"] = l.view;
      e["index"] = l.index;
      leftovers.push_back(e);
    }
  return {{"angles", views.angles}, {"groups", groups}, {"leftovers", leftovers}};
}

void run_match(const RunConfig& cfg) {
  const fs::path dir = cfg.out_dir;
  const ViewSet views = stage_views(cfg);
  require(dir / files::kDet2d);
  require(dir / files::kDet3d);
  const auto boxes2 = io::per_view_boxes(io::read_boxes(dir / files::kDet2d), views.size());
  const auto boxes3 = io::boxes3(io::read_boxes(dir / files::kDet3d));
  matching::MatchOptions opts;
  opts.threshold = cfg.match_threshold;
  const auto outcome = matching::collaborate(boxes3, boxes2, views, opts);
  write_json(dir / files::kMatch, to_json(outcome, views));
  io::write_boxes(io::to_records(matching::collaborative_detections(outcome, views.size())),
                  dir / files::kCollab2d);
}

json ap_report(const std::vector<std::vector<Box2>>& dets,
               const std::vector<std::vector<Box2>>& gts, const ViewSet& views,
               double iou_thresh, metrics::ApInterpolation interp) {
  const auto pooled = metrics::average_precision(dets, gts, iou_thresh, interp);
  json pr = json::array();
  for (const auto& p : pooled.points) pr.push_back({p.precision, p.recall, p.score});
  json per_view = json::array();
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto c = metrics::average_precision(dets[k], gts[k], iou_thresh, interp);
    per_view.push_back({{"view", k},
                        {"angle", views.angles[k]},
                        {"ap", c.ap},
                        {"num_gt", gts[k].size()},
                        {"num_dets", dets[k].size()}});
  }
  return {{"iou_threshold", iou_thresh},
          {"interpolation", interp == metrics::ApInterpolation::all_point ? "all-point" : "11-point"},
          {"ap", pooled.ap},
          {"per_view", per_view},
          {"pr_points", pr}};
}

json run_eval_ap(const RunConfig& cfg, fs::path dets, fs::path gts) {
  const fs::path dir = cfg.out_dir;
  const ViewSet views = stage_views(cfg);
  if (dets.empty()) dets = fs::exists(dir / files::kCollab2d) ? dir / files::kCollab2d : dir / files::kDet2d;
  if (gts.empty()) gts = dir / files::kGt2d;
  require(dets);
  require(gts);
  const auto d = io::per_view_boxes(io::read_boxes(dets), views.size());
  const auto g = io::per_view_boxes(io::read_boxes(gts), views.size());
  json report = ap_report(d, g, views, cfg.ap_threshold, cfg.ap_interpolation);
  report["detections"] = dets.filename().string();
  report["ground_truth"] = gts.filename().string();
  fs::create_directories(dir);
  write_json(dir / files::kEvalAp, report);
  return report;
}

json run_eval_image(const RunConfig& cfg, const fs::path& pred, const fs::path& ref) {
  const Image2 p = io::read_image(pred);
  const Image2 r = io::read_image(ref);
  const double ps = metrics::psnr(p, r);
  json report = {{"prediction", pred.filename().string()}, {"reference", ref.filename().string()}};
  report["psnr"] = std::isinf(ps) ? json("inf") : json(ps);
  report["ssim"] = metrics::ssim(p, r);
  report["mae"] = metrics::mae_loss({p}, {r});
  fs::create_directories(cfg.out_dir);
  write_json(cfg.out_dir / files::kEvalImage, report);
  return report;
}

CollabResult compare_separate_collaborative(const GroundTruth& truth, const ViewSet& views,
                                            const detect::PerturbSpec& perturb,
                                            double match_threshold, double ap_threshold) {
  const auto dets = detect::perturb_detect(truth, views, perturb);
  matching::MatchOptions opts;
  opts.threshold = match_threshold;
  const auto outcome = matching::collaborate(dets.boxes3, dets.boxes2, views, opts);
  const auto collab = matching::collaborative_detections(outcome, views.size());
  CollabResult r;
  r.separate_ap = metrics::average_precision(dets.boxes2, truth.boxes2, ap_threshold).ap;
  r.collaborative_ap = metrics::average_precision(collab, truth.boxes2, ap_threshold).ap;
  for (std::size_t k = 0; k < views.size(); ++k) {
    r.separate_per_view.push_back(
        metrics::average_precision(dets.boxes2[k], truth.boxes2[k], ap_threshold).ap);
    r.collaborative_per_view.push_back(
        metrics::average_precision(collab[k], truth.boxes2[k], ap_threshold).ap);
  }
  return r;
}

json run_sweep(const RunConfig& cfg) {
  ViewSet views = cfg.views;
  views.angles = cfg.sweep_angles;
  views.validate();
  const Phantom ph = generate_phantom(cfg.phantom);
  GroundTruth gt = make_ground_truth_boxes(ph.truth, views);

  std::vector<std::vector<Box2>> dets;
  if (cfg.detect_mode == DetectMode::blob) {
    const auto images = dissect_project(ph.volume, gt.lung_mask, views, cfg.projector);
    for (const auto& img : images) {
      detect::BlobParams bp;
      bp.min_area = cfg.blob.min_area;
      const auto data = img.data();
      const float peak = *std::max_element(data.begin(), data.end());
      bp.threshold = static_cast<float>(cfg.blob.relative ? cfg.blob.threshold * peak : cfg.blob.threshold);
      dets.push_back(detect::blob_detect(img, bp));
    }
  } else {
    dets = detect::perturb_detect(gt, views, cfg.perturb).boxes2;
  }

  json rows = json::array();
  std::ostringstream tsv;
  tsv << "angle\tnum_gt\tnum_dets\tap\n";
  for (std::size_t k = 0; k < views.size(); ++k) {
    const double ap =
        metrics::average_precision(dets[k], gt.boxes2[k], cfg.ap_threshold, cfg.ap_interpolation).ap;
    rows.push_back({{"angle", views.angles[k]},
                    {"num_gt", gt.boxes2[k].size()},
                    {"num_dets", dets[k].size()},
                    {"ap", ap}});
    tsv << format_angle(views.angles[k]) << '\t' << gt.boxes2[k].size() << '\t' << dets[k].size()
        << '\t' << std::fixed << std::setprecision(6) << ap << std::defaultfloat << '\n';
  }
  const double all =
      metrics::average_precision(dets, gt.boxes2, cfg.ap_threshold, cfg.ap_interpolation).ap;
  tsv << "ALL\t\t\t" << std::fixed << std::setprecision(6) << all << '\n';
  json report = {{"iou_threshold", cfg.ap_threshold},
                 {"detect_mode", cfg.detect_mode == DetectMode::perturb ? "perturb" : "blob"},
                 {"rows", rows},
                 {"ap_all", all}};
  fs::create_directories(cfg.out_dir);
  write_json(cfg.out_dir / files::kSweepJson, report);
  std::ofstream(cfg.out_dir / files::kSweepTsv, std::ios::trunc) << tsv.str();
  return report;
}

}  // namespace xdt::pipeline
