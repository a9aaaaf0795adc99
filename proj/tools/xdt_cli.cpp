// xdt: command-line driver for the multi-view nodule detection pipeline.
//
//   xdt phantom  | project | dissect | detect | match   stage by stage
//   xdt eval-ap [--dets F] [--gts F]                   AP report
//   xdt eval-image --pred BASE --ref BASE              PSNR / SSIM / MAE
//   xdt sweep                                          AP versus view angle
//   xdt selfcheck                                      built-in property checks
//
// Exit codes: 0 ok, 1 usage, 2 runtime failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "xdt/pipeline.hpp"
#include "xdt/selfcheck.hpp"

namespace {

using namespace xdt;
using pipeline::RunConfig;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string angles;
  std::string detector;
  std::string mode;
};

std::array<int, 2> parse_detector(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("detector must look like NUxNV, got '" + text + "'");
  try {
    std::size_t a = 0, b = 0;
    const int nu = std::stoi(text.substr(0, x), &a);
    const int nv = std::stoi(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1 || nu <= 0 || nv <= 0) throw std::invalid_argument(text);
    return {nu, nv};
  } catch (const std::logic_error&) {
    throw ConfigError("detector must look like NUxNV, got '" + text + "'");
  }
}

RunConfig build_config(const GlobalOptions& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : pipeline::load_run_config(g.config);
  if (g.seed) cfg.apply_seed(*g.seed);
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (!g.angles.empty()) {
    cfg.views.angles = RunConfig::parse_angles(g.angles);
    cfg.sweep_angles = cfg.views.angles;
  }
  if (!g.detector.empty()) cfg.views.detector_dims = parse_detector(g.detector);
  if (g.mode == "blob") cfg.detect_mode = pipeline::DetectMode::blob;
  else if (g.mode == "perturb") cfg.detect_mode = pipeline::DetectMode::perturb;
  cfg.views.validate();
  return cfg;
}

void print_ap(const nlohmann::json& report) {
  for (const auto& v : report["per_view"])
    std::printf("view %zu  angle %7.2f  gt %3zu  dets %3zu  AP %.4f\n", v["view"].get<std::size_t>(),
                v["angle"].get<double>(), v["num_gt"].get<std::size_t>(),
                v["num_dets"].get<std::size_t>(), v["ap"].get<double>());
  std::printf("ALL  AP@%.2f %.4f\n", report["iou_threshold"].get<double>(), report["ap"].get<double>());
}

int run_selfcheck() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (const auto& r : selfcheck::run_all()) {
    std::printf("%-22s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    ok = ok && r.pass;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("selfcheck %s in %.1f s\n", ok ? "passed" : "FAILED", secs);
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view dissected-radiograph nodule detection pipeline"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for phantom and detector simulation");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--angles", g.angles, "View angles in degrees: start:step:end or a,b,c");
  app.add_option("--detector", g.detector, "Detector size NUxNV, e.g. 512x736");

  auto* phantom = app.add_subcommand("phantom", "Generate the phantom volume, masks and 3D boxes");
  auto* project = app.add_subcommand("project", "Project volume and lung mask; 2D ground truth");
  auto* dissect = app.add_subcommand("dissect", "Lung-only projections");
  auto* detect = app.add_subcommand("detect", "Simulated 2D and 3D detections");
  detect->add_option("--mode", g.mode, "perturb or blob")->check(CLI::IsMember({"perturb", "blob"}));
  auto* match = app.add_subcommand("match", "Collaborative 2D-3D matching");
  auto* eval_ap = app.add_subcommand("eval-ap", "Average precision of 2D detections");
  std::string dets, gts;
  eval_ap->add_option("--dets", dets, "Detections file (default collab2d.jsonl or det2d.jsonl)");
  eval_ap->add_option("--gts", gts, "Ground truth file (default gt_boxes2d.jsonl)");
  auto* eval_image = app.add_subcommand("eval-image", "PSNR, SSIM and MAE of two images");
  std::string pred, ref;
  eval_image->add_option("--pred", pred, "Predicted image base path")->required();
  eval_image->add_option("--ref", ref, "Reference image base path")->required();
  auto* sweep = app.add_subcommand("sweep", "AP versus projection angle");
  sweep->add_option("--mode", g.mode, "perturb or blob")->check(CLI::IsMember({"perturb", "blob"}));
  auto* check = app.add_subcommand("selfcheck", "Run built-in property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (check->parsed()) return run_selfcheck();
    const RunConfig cfg = build_config(g);
    if (phantom->parsed()) pipeline::run_phantom(cfg);
    else if (project->parsed()) pipeline::run_project(cfg);
    else if (dissect->parsed()) pipeline::run_dissect(cfg);
    else if (detect->parsed()) pipeline::run_detect(cfg);
    else if (match->parsed()) pipeline::run_match(cfg);
    else if (eval_ap->parsed()) print_ap(pipeline::run_eval_ap(cfg, dets, gts));
    else if (eval_image->parsed()) std::cout << pipeline::run_eval_image(cfg, pred, ref).dump(2) << '\n';
    else if (sweep->parsed()) {
      const auto report = pipeline::run_sweep(cfg);
      std::ifstream tsv(cfg.out_dir / pipeline::files::kSweepTsv);
      std::cout << tsv.rdbuf();
    }
  } catch (const xdt::ConfigError& e) {
    std::cerr << "xdt: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "xdt: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
