#include <cmath>

#include "doctest.h"
#include "xdt/metrics.hpp"
#include "xdt/random.hpp"

using namespace xdt;
using namespace xdt::metrics;

namespace {

Image2 image(int nu, int nv, std::vector<float> d) {
  ImageGeometry g;
  g.dims = {nu, nv};
  return Image2(g, std::move(d));
}

Image2 random_image(Rng& rng, int nu, int nv, double scale = 1.0) {
  std::vector<float> d(static_cast<std::size_t>(nu) * nv);
  for (auto& v : d) v = static_cast<float>(scale * rng.uniform());
  return image(nu, nv, std::move(d));
}

/// Direct 2D-window SSIM with no separability or shared sums.
double naive_ssim(const Image2& x, const Image2& y, double range) {
  const int w = 11, nu = x.dims()[0], nv = x.dims()[1];
  std::vector<double> win(w * w);
  double total = 0;
  for (int a = 0; a < w; ++a)
    for (int b = 0; b < w; ++b) {
      const double da = a - 5, db = b - 5;
      win[a * w + b] = std::exp(-(da * da + db * db) / (2 * 1.5 * 1.5));
      total += win[a * w + b];
    }
  for (auto& v : win) v /= total;
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  double sum = 0;
  int count = 0;
  for (int v0 = 0; v0 + w <= nv; ++v0)
    for (int u0 = 0; u0 + w <= nu; ++u0) {
      double mx = 0, my = 0;
      for (int a = 0; a < w; ++a)
        for (int b = 0; b < w; ++b) {
          mx += win[a * w + b] * x.at(0, v0 + a, u0 + b);
          my += win[a * w + b] * y.at(0, v0 + a, u0 + b);
        }
      double sxx = 0, syy = 0, sxy = 0;
      for (int a = 0; a < w; ++a)
        for (int b = 0; b < w; ++b) {
          const double dx = x.at(0, v0 + a, u0 + b) - mx, dy = y.at(0, v0 + a, u0 + b) - my;
          sxx += win[a * w + b] * dx * dx;
          syy += win[a * w + b] * dy * dy;
          sxy += win[a * w + b] * dx * dy;
        }
      sum += ((2 * mx * my + c1) * (2 * sxy + c2)) /
             ((mx * mx + my * my + c1) * (sxx + syy + c2));
      ++count;
    }
  return sum / count;
}

Box2 box(double x1, double z1, double x2, double z2, std::optional<double> s = {}) {
  return Box2{x1, z1, x2, z2, s, {}};
}

}  // namespace

TEST_CASE("mae") {
  Rng rng(1);
  const Image2 a = random_image(rng, 9, 7), b = random_image(rng, 9, 7);
  CHECK(mae_loss({a, b}, {a, b}) == 0.0);
  std::vector<float> shifted(a.data().begin(), a.data().end());
  for (auto& v : shifted) v += 1.0f;
  CHECK(mae_loss({a}, {image(9, 7, shifted)}) == doctest::Approx(1.0).epsilon(1e-6));
  double brute = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) brute += std::abs(double(a.data()[i]) - b.data()[i]);
  for (std::size_t i = 0; i < a.data().size(); ++i) brute += std::abs(double(b.data()[i]) - a.data()[i]);
  CHECK(std::abs(mae_loss({a, b}, {b, a}) - brute / (2 * 63)) <= 1e-9);
  CHECK_THROWS_AS(mae_loss({a}, {random_image(rng, 7, 9)}), ValidationError);
  CHECK_THROWS_AS(mae_loss({a}, {a, a}), ValidationError);
}

TEST_CASE("binary cross entropy") {
  CHECK(bce(1 - kBceEpsilon, 1) == doctest::Approx(0.0).epsilon(1e-6).scale(1));
  CHECK(std::abs(bce(0.5, 1) - std::log(2.0)) <= 1e-9);
  CHECK(std::abs(bce(0.5, 0) - std::log(2.0)) <= 1e-9);
  CHECK(std::isfinite(bce(0.0, 1)));
  CHECK(bce(0.0, 1) == doctest::Approx(-std::log(kBceEpsilon)));
}

TEST_CASE("smooth l1") {
  CHECK(smooth_l1(0.0) == 0.0);
  CHECK(smooth_l1(0.5) == 0.125);
  CHECK(smooth_l1(2.0) == 1.5);
  CHECK(smooth_l1(-2.0) == 1.5);
  CHECK(std::abs(smooth_l1(std::nextafter(1.0, 0.0)) - smooth_l1(1.0)) <= 1e-12);
  CHECK(std::abs(smooth_l1(std::nextafter(-1.0, 0.0)) - smooth_l1(-1.0)) <= 1e-12);
  const std::vector<double> t{0.5, 0, 0, std::log(2.0)}, ts{0, 0, 0, 0};
  CHECK(smooth_l1(t, ts) == doctest::Approx(0.125 + 0.5 * std::log(2.0) * std::log(2.0)));
}

TEST_CASE("psnr") {
  Rng rng(2);
  const Image2 a = random_image(rng, 16, 16, 200);
  CHECK(psnr(a, a) == kPsnrIdentical);
  std::vector<float> off(a.data().begin(), a.data().end());
  for (auto& v : off) v += 1.0f;
  CHECK(std::abs(psnr(image(16, 16, off), a, 255.0) - 48.1308) <= 1e-3);

  const Image2 b = random_image(rng, 16, 16, 200);
  std::vector<float> a3(a.data().begin(), a.data().end()), b3(b.data().begin(), b.data().end());
  for (auto& v : a3) v *= 3.0f;
  for (auto& v : b3) v *= 3.0f;
  CHECK(psnr(image(16, 16, a3), image(16, 16, b3)) == doctest::Approx(psnr(a, b)).epsilon(1e-5));
  CHECK_THROWS_AS(psnr(a, random_image(rng, 8, 8)), ValidationError);
}

TEST_CASE("ssim") {
  Rng rng(3);
  const Image2 a = random_image(rng, 24, 20, 10);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  // Negation flips the structure term. A checkerboard keeps every local mean
  // near zero, so the luminance term stays positive and the index goes negative.
  std::vector<float> board(24 * 20), flipped(24 * 20);
  for (int v = 0; v < 20; ++v)
    for (int u = 0; u < 24; ++u) {
      board[v * 24 + u] = (u + v) % 2 ? 5.0f : -5.0f;
      flipped[v * 24 + u] = -board[v * 24 + u];
    }
  const Image2 cb = image(24, 20, board), ncb = image(24, 20, flipped);
  CHECK(ssim(ncb, cb) < 0.0);
  CHECK(std::abs(ssim(ncb, cb) - naive_ssim(ncb, cb, 5.0)) <= 1e-6);

  std::vector<float> shift(a.data().begin(), a.data().end());
  for (auto& v : shift) v += 0.7f;
  const Image2 s = image(24, 20, shift);
  double range = 0;
  for (float v : a.data()) range = std::max(range, std::abs(double(v)));
  CHECK(std::abs(ssim(s, a) - naive_ssim(s, a, range)) <= 1e-6);

  const Image2 b = random_image(rng, 24, 20, 10);
  CHECK(std::abs(ssim(b, a) - naive_ssim(b, a, range)) <= 1e-6);
  SsimParams p;
  p.dynamic_range = 255.0;
  CHECK(std::abs(ssim(b, a, p) - naive_ssim(b, a, 255.0)) <= 1e-6);

  CHECK_THROWS_AS(ssim(random_image(rng, 10, 30), random_image(rng, 10, 30)), ValidationError);
}

TEST_CASE("average precision hand cases") {
  CHECK(average_precision({box(0, 0, 1, 1, 0.9)}, {box(0, 0, 1, 1)}, 0.5).ap == 1.0);

  // TP(0.9), FP(0.8), TP(0.7) against two ground-truth boxes.
  const std::vector<Box2> gts{box(0, 0, 10, 10), box(20, 20, 30, 30)};
  const std::vector<Box2> dets{box(0, 0, 10, 10, 0.9), box(50, 50, 60, 60, 0.8),
                               box(20, 20, 30, 30, 0.7)};
  const PrCurve c = average_precision(dets, gts, 0.1);
  CHECK(std::abs(c.ap - 0.8333333333) <= 1e-6);
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[1].precision == doctest::Approx(0.5));
  CHECK(c.points[2].recall == doctest::Approx(1.0));

  const PrCurve e = average_precision(dets, gts, 0.1, ApInterpolation::eleven_point);
  CHECK(e.ap == doctest::Approx((6 * 1.0 + 5 * (2.0 / 3.0)) / 11.0));

  CHECK(average_precision(std::vector<Box2>{}, std::vector<Box2>{}, 0.1).ap == 1.0);
  CHECK(average_precision({box(0, 0, 1, 1, 0.5)}, {}, 0.1).ap == 0.0);
  CHECK(average_precision({}, {box(0, 0, 1, 1)}, 0.1).ap == 0.0);
  CHECK_THROWS_AS(average_precision(dets, gts, 0.0), ValidationError);
  CHECK(kDefaultApIou == 0.1);
}

TEST_CASE("each ground truth matches once and only in its own view") {
  const std::vector<Box2> gts{box(0, 0, 10, 10)};
  const std::vector<Box2> dup{box(0, 0, 10, 10, 0.9), box(0, 0, 10, 10, 0.8)};
  CHECK(average_precision(dup, gts, 0.5).ap == 1.0);
  CHECK(average_precision(dup, gts, 0.5).points[1].precision == 0.5);

  const std::vector<std::vector<Box2>> pv_gts{{box(0, 0, 10, 10)}, {}};
  const std::vector<std::vector<Box2>> pv_dets{{}, {box(0, 0, 10, 10, 0.9)}};
  CHECK(average_precision(pv_dets, pv_gts, 0.5).ap == 0.0);
}

TEST_CASE("3D average precision") {
  const std::vector<Box3> gts{Box3{0, 0, 0, 10, 10, 10, {}, {}}};
  const std::vector<Box3> dets{Box3{1, 1, 1, 11, 11, 11, 0.4, {}}};
  CHECK(average_precision(dets, gts, 0.5).ap == 1.0);
  CHECK(average_precision(dets, gts, 0.9).ap == 0.0);
}

TEST_CASE("average precision properties on random inputs") {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    std::vector<Box2> gts, dets;
    const int ng = 1 + static_cast<int>(rng.uniform() * 5), nd = static_cast<int>(rng.uniform() * 8);
    for (int i = 0; i < ng; ++i) {
      const double x = rng.uniform(0, 50), z = rng.uniform(0, 50);
      gts.push_back(box(x, z, x + rng.uniform(5, 15), z + rng.uniform(5, 15)));
    }
    for (int i = 0; i < nd; ++i) {
      const double x = rng.uniform(0, 50), z = rng.uniform(0, 50);
      dets.push_back(box(x, z, x + rng.uniform(5, 15), z + rng.uniform(5, 15), rng.uniform()));
    }
    const PrCurve c = average_precision(dets, gts, 0.1);
    REQUIRE(c.ap >= 0.0);
    REQUIRE(c.ap <= 1.0);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      REQUIRE(c.points[i].precision >= 0.0);
      REQUIRE(c.points[i].precision <= 1.0);
      if (i) REQUIRE(c.points[i].recall >= c.points[i - 1].recall);
    }
    auto squashed = dets;
    for (auto& d : squashed) d.score = std::exp(3 * *d.score) - 7;
    REQUIRE(average_precision(squashed, gts, 0.1).ap == c.ap);
  }
}
