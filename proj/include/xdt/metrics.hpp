#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "xdt/types.hpp"

namespace xdt::metrics {

/// Mean absolute error over every pixel of every (sample, view) image pair.
double mae_loss(const std::vector<Image2>& pred, const std::vector<Image2>& target);

inline constexpr double kBceEpsilon = 1e-7;

/// Binary cross entropy with p clamped to [eps, 1 - eps].
double bce(double p, int p_star);

/// 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
double smooth_l1(double x);
/// Sum of smooth_l1 over t - t_star.
double smooth_l1(std::span<const double> t, std::span<const double> t_star);

/// PSNR of identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10 log10(peak^2 / MSE). peak defaults to the maximum of `ref`.
double psnr(const Image2& pred, const Image2& ref, std::optional<double> peak = std::nullopt);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  std::optional<double> dynamic_range;  // defaults to max |ref|
};

/// Mean SSIM over all window positions fully inside the image (Gaussian
/// weighted), averaged over channels.
double ssim(const Image2& pred, const Image2& ref, const SsimParams& params = {});

enum class ApInterpolation { all_point, eleven_point };

struct PrPoint {
  double precision = 0, recall = 0, score = 0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per detection, by descending score
  double ap = 0;
};

/// AP over a set of views. Detections only match ground truth from the same
/// view. Detections are ranked by descending score (input order breaks
/// ties); each takes the highest-IoU still-unmatched ground-truth box and is
/// a true positive when that IoU >= iou_thresh.
PrCurve average_precision(const std::vector<std::vector<Box2>>& dets,
                          const std::vector<std::vector<Box2>>& gts, double iou_thresh,
                          ApInterpolation interp = ApInterpolation::all_point);
PrCurve average_precision(const std::vector<Box2>& dets, const std::vector<Box2>& gts,
                          double iou_thresh,
                          ApInterpolation interp = ApInterpolation::all_point);
PrCurve average_precision(const std::vector<Box3>& dets, const std::vector<Box3>& gts,
                          double iou_thresh,
                          ApInterpolation interp = ApInterpolation::all_point);

inline constexpr double kDefaultApIou = 0.1;

}  // namespace xdt::metrics
