#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "xdt/detect_sim.hpp"
#include "xdt/matching.hpp"
#include "xdt/metrics.hpp"
#include "xdt/phantom.hpp"
#include "xdt/projector.hpp"

namespace xdt::pipeline {

enum class DetectMode { perturb, blob };

struct BlobConfig {
  double threshold = 0.5;  // fraction of each image's peak when `relative`
  bool relative = true;
  int min_area = 4;
};

struct RunConfig {
  PhantomSpec phantom = PhantomSpec::defaults();
  ViewSet views = default_views();
  ProjectorConfig projector;
  DetectMode detect_mode = DetectMode::perturb;
  detect::PerturbSpec perturb = default_perturb();
  BlobConfig blob;
  double match_threshold = 0.0;
  double ap_threshold = metrics::kDefaultApIou;
  metrics::ApInterpolation ap_interpolation = metrics::ApInterpolation::all_point;
  std::vector<double> sweep_angles = parse_angles("-90:10:80");
  std::filesystem::path out_dir = "xdt_out";
  std::uint64_t seed = 0;

  /// Three views at -35, 0 and 35 degrees on a 256 x 256 detector, 2 mm bins.
  static ViewSet default_views();
  static detect::PerturbSpec default_perturb();
  /// `start:step:end` (end included when reached exactly) or a comma list.
  static std::vector<double> parse_angles(const std::string& text);

  /// Applies the run seed to the phantom and detector seeds.
  void apply_seed(std::uint64_t s);
};

// JSON conversion for every configuration type. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& cfg);
PhantomSpec phantom_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PhantomSpec& spec);
detect::PerturbSpec perturb_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const detect::PerturbSpec& spec);
ViewSet views_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ViewSet& views);
nlohmann::json to_json(const matching::MatchOutcome& outcome, const ViewSet& views);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical artifact names inside the output directory.
namespace files {
inline constexpr const char* kVolume = "volume";
inline constexpr const char* kLungMask = "lung_mask";
inline constexpr const char* kRibMask = "rib_mask";
inline constexpr const char* kPhantomSpec = "phantom.json";
inline constexpr const char* kGt3d = "gt_boxes3d.jsonl";
inline constexpr const char* kGt2d = "gt_boxes2d.jsonl";
inline constexpr const char* kViews = "views.json";
inline constexpr const char* kDet2d = "det2d.jsonl";
inline constexpr const char* kDet3d = "det3d.jsonl";
inline constexpr const char* kMatch = "match.json";
inline constexpr const char* kCollab2d = "collab2d.jsonl";
inline constexpr const char* kEvalAp = "eval_ap.json";
inline constexpr const char* kEvalImage = "eval_image.json";
inline constexpr const char* kSweepJson = "sweep.json";
inline constexpr const char* kSweepTsv = "sweep.tsv";
std::string nodule_mask(std::size_t i);
std::string projection(std::size_t view);
std::string lung_mask_projection(std::size_t view);
std::string dissected(std::size_t view);
}  // namespace files

// Pipeline stages. Each reads its inputs from and writes its outputs to
// cfg.out_dir, so stages only communicate through files.
void run_phantom(const RunConfig& cfg);
void run_project(const RunConfig& cfg);
void run_dissect(const RunConfig& cfg);
void run_detect(const RunConfig& cfg);
void run_match(const RunConfig& cfg);
/// Evaluates a per-view 2D detection file against ground truth. Empty paths
/// pick the defaults (collab2d.jsonl when present, else det2d.jsonl).
nlohmann::json run_eval_ap(const RunConfig& cfg, std::filesystem::path dets = {},
                           std::filesystem::path gts = {});
nlohmann::json run_eval_image(const RunConfig& cfg, const std::filesystem::path& pred,
                              const std::filesystem::path& ref);
/// AP-versus-angle table over cfg.sweep_angles; runs entirely in memory and
/// writes sweep.json / sweep.tsv.
nlohmann::json run_sweep(const RunConfig& cfg);

/// Views used by downstream stages: views.json from the output directory
/// when present, else the configured views.
ViewSet stage_views(const RunConfig& cfg);

/// Per-view AP report with pooled "ALL" value.
nlohmann::json ap_report(const std::vector<std::vector<Box2>>& dets,
                         const std::vector<std::vector<Box2>>& gts, const ViewSet& views,
                         double iou_thresh, metrics::ApInterpolation interp);

/// In-memory experiment used by the acceptance suite and `sweep`: one
/// phantom, one view set, one detector draw; separate versus collaborative
/// pooled AP.
struct CollabResult {
  double separate_ap = 0;
  double collaborative_ap = 0;
  std::vector<double> separate_per_view;
  std::vector<double> collaborative_per_view;
};
CollabResult compare_separate_collaborative(const GroundTruth& truth, const ViewSet& views,
                                            const detect::PerturbSpec& perturb,
                                            double match_threshold, double ap_threshold);

}  // namespace xdt::pipeline
