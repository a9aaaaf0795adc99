#include "xdt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xdt/boxgeom.hpp"

namespace xdt::metrics {

namespace {

void check_same_shape(const Image2& a, const Image2& b) {
  if (a.dims() != b.dims() || a.channels() != b.channels())
    throw ValidationError("image shapes differ");
}

}  // namespace

double mae_loss(const std::vector<Image2>& pred, const std::vector<Image2>& target) {
  if (pred.size() != target.size()) throw ValidationError("image stack sizes differ");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    check_same_shape(pred[i], target[i]);
    const auto p = pred[i].data(), t = target[i].data();
    for (std::size_t j = 0; j < p.size(); ++j)
      sum += std::abs(static_cast<double>(p[j]) - static_cast<double>(t[j]));
    count += p.size();
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double bce(double p, int p_star) {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return -(p_star * std::log(q) + (1 - p_star) * std::log(1.0 - q));
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1(std::span<const double> t, std::span<const double> t_star) {
  if (t.size() != t_star.size()) throw ValidationError("offset vectors differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) sum += smooth_l1(t[i] - t_star[i]);
  return sum;
}

double psnr(const Image2& pred, const Image2& ref, std::optional<double> peak) {
  check_same_shape(pred, ref);
  const auto p = pred.data(), r = ref.data();
  double se = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(r[i]);
    se += d * d;
  }
  if (se == 0.0) return kPsnrIdentical;
  const double mse = se / static_cast<double>(p.size());
  const double pk = peak.value_or(*std::max_element(r.begin(), r.end()));
  return 10.0 * std::log10(pk * pk / mse);
}

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> g(size);
  const double c = 0.5 * (size - 1);
  for (int i = 0; i < size; ++i) g[i] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
  const double s = std::accumulate(g.begin(), g.end(), 0.0);
  for (auto& v : g) v /= s;
  return g;
}

// "Valid" separable filtering: output is (nu - w + 1) x (nv - w + 1).
std::vector<double> filter_valid(const std::vector<double>& src, int nu, int nv,
                                 const std::vector<double>& g) {
  const int w = static_cast<int>(g.size());
  const int ou = nu - w + 1, ov = nv - w + 1;
  std::vector<double> tmp(static_cast<std::size_t>(nv) * ou);
  for (int v = 0; v < nv; ++v)
    for (int u = 0; u < ou; ++u) {
      double s = 0.0;
      for (int i = 0; i < w; ++i) s += g[i] * src[static_cast<std::size_t>(v) * nu + u + i];
      tmp[static_cast<std::size_t>(v) * ou + u] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ov) * ou);
  for (int v = 0; v < ov; ++v)
    for (int u = 0; u < ou; ++u) {
      double s = 0.0;
      for (int i = 0; i < w; ++i) s += g[i] * tmp[static_cast<std::size_t>(v + i) * ou + u];
      out[static_cast<std::size_t>(v) * ou + u] = s;
    }
  return out;
}

}  // namespace

double ssim(const Image2& pred, const Image2& ref, const SsimParams& params) {
  check_same_shape(pred, ref);
  const int nu = ref.dims()[0], nv = ref.dims()[1];
  if (params.window <= 0 || nu < params.window || nv < params.window)
    throw ValidationError("image smaller than the SSIM window");
  double range = 0.0;
  if (params.dynamic_range) {
    range = *params.dynamic_range;
  } else {
    for (float v : ref.data()) range = std::max(range, std::abs(static_cast<double>(v)));
  }
  if (!(range > 0.0)) range = 1.0;
  const double c1 = (params.k1 * range) * (params.k1 * range);
  const double c2 = (params.k2 * range) * (params.k2 * range);
  const auto g = gaussian_window(params.window, params.sigma);

  double total = 0.0;
  for (int c = 0; c < ref.channels(); ++c) {
    const auto px = pred.channel(c), py = ref.channel(c);
    std::vector<double> x(px.begin(), px.end()), y(py.begin(), py.end());
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, nu, nv, g), my = filter_valid(y, nu, nv, g);
    const auto sxx = filter_valid(xx, nu, nv, g), syy = filter_valid(yy, nu, nv, g);
    const auto sxy = filter_valid(xy, nu, nv, g);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      sum += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / ref.channels();
}

namespace {

template <typename Box>
PrCurve ap_impl(const std::vector<std::vector<Box>>& dets,
                const std::vector<std::vector<Box>>& gts, double iou_thresh,
                ApInterpolation interp) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0))
    throw ValidationError("iou_thresh must lie in (0, 1]");
  if (dets.size() != gts.size()) throw ValidationError("detection and truth view counts differ");

  struct Ranked {
    std::size_t view, index;
    double score;
  };
  std::vector<Ranked> ranked;
  std::size_t positives = 0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    positives += gts[k].size();
    for (std::size_t i = 0; i < dets[k].size(); ++i)
      ranked.push_back({k, i, dets[k][i].score.value_or(0.0)});
  }
  PrCurve curve;
  if (positives == 0) {
    curve.ap = ranked.empty() ? 1.0 : 0.0;
    return curve;
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  std::vector<std::vector<bool>> taken(gts.size());
  for (std::size_t k = 0; k < gts.size(); ++k) taken[k].assign(gts[k].size(), false);
  std::size_t tp = 0;
  for (std::size_t n = 0; n < ranked.size(); ++n) {
    const auto& r = ranked[n];
    const Box& d = dets[r.view][r.index];
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < gts[r.view].size(); ++j) {
      if (taken[r.view][j]) continue;
      const double v = boxgeom::iou(d, gts[r.view][j]);
      if (v > best) {
        best = v;
        arg = j;
      }
    }
    if (best >= iou_thresh) {
      taken[r.view][arg] = true;
      ++tp;
    }
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(n + 1),
                            static_cast<double>(tp) / static_cast<double>(positives), r.score});
  }

  const auto& pts = curve.points;
  if (interp == ApInterpolation::all_point) {
    std::vector<double> envelope(pts.size());
    double running = 0.0;
    for (std::size_t i = pts.size(); i-- > 0;) {
      running = std::max(running, pts[i].precision);
      envelope[i] = running;
    }
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].recall > prev_recall) {
        ap += (pts[i].recall - prev_recall) * envelope[i];
        prev_recall = pts[i].recall;
      }
    }
    curve.ap = ap;
  } else {
    double ap = 0.0;
    for (int t = 0; t <= 10; ++t) {
      const double level = t / 10.0;
      double best = 0.0;
      for (const auto& p : pts)
        if (p.recall >= level - 1e-12) best = std::max(best, p.precision);
      ap += best / 11.0;
    }
    curve.ap = ap;
  }
  return curve;
}

}  // namespace

PrCurve average_precision(const std::vector<std::vector<Box2>>& dets,
                          const std::vector<std::vector<Box2>>& gts, double iou_thresh,
                          ApInterpolation interp) {
  return ap_impl(dets, gts, iou_thresh, interp);
}

PrCurve average_precision(const std::vector<Box2>& dets, const std::vector<Box2>& gts,
                          double iou_thresh, ApInterpolation interp) {
  return ap_impl<Box2>({dets}, {gts}, iou_thresh, interp);
}

PrCurve average_precision(const std::vector<Box3>& dets, const std::vector<Box3>& gts,
                          double iou_thresh, ApInterpolation interp) {
  return ap_impl<Box3>({dets}, {gts}, iou_thresh, interp);
}

}  // namespace xdt::metrics
