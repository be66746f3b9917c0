#include <doctest.h>

#include <cmath>
#include <numbers>

#include "irlv/np_oracle.hpp"
#include "oracles.hpp"

using namespace irlv;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
const CircularScenario kCircle = CircularScenario::with_nearest_corner(40, 25, 25, 4);
const SectorGeometry kGeometry(kCircle);
const ChannelParams kParams;

double integrate(double lo, double hi, std::size_t n, auto f) {
  const double h = (hi - lo) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += f(lo + (static_cast<double>(i) + 0.5) * h);
  return s * h;
}

}  // namespace

TEST_CASE("radius from attenuation inverts the LOS path loss") {
  CHECK(radius_from_linear_attenuation(4 * std::numbers::pi * kParams.carrier_hz / kParams.speed_of_light,
                                       kParams) == doctest::Approx(1.0).epsilon(1e-12));
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double d = uniform(rng, 1, 40);
    const double r = radius_from_attenuation(path_loss_los_db(d, kParams), kParams);
    CHECK(std::abs(r - d) <= 1e-9 * d);
  }
  CHECK_THROWS_AS(radius_from_linear_attenuation(0.5, kParams), std::domain_error);
  CHECK_THROWS_AS(radius_from_attenuation(-1.0, kParams), std::domain_error);
}

TEST_CASE("alpha agrees with exact circle crossings") {
  const double r_far = kGeometry.r_far();
  CHECK(kGeometry.alpha(3.9) == 0.0);
  CHECK(kGeometry.alpha(r_far + 0.01) == 0.0);
  for (double r = 0.5; r < 40; r += 0.173) {
    const double a = kGeometry.alpha(r);
    CHECK(a >= 0.0);
    CHECK(a <= kTwoPi);
    // Each crossing can shift the scan by at most one step.
    CHECK(std::abs(a - oracle::circle_rect_angle(r, kCircle.roi())) <= 4 * kGeometry.resolution());
  }
}

TEST_CASE("alpha for other rectangle placements") {
  // Other quadrants and a rectangle straddling the x axis.
  for (const Rectangle roi : {Rectangle({-28, 2}, {-5, 25}), Rectangle({-10, -25}, {10, -6}),
                              Rectangle({3, -3}, {20, 3})}) {
    const CircularScenario c(40, roi);
    const SectorGeometry g(c);
    for (double r = 1; r < 40; r += 0.37)
      CHECK(std::abs(g.alpha(r) - oracle::circle_rect_angle(r, roi)) <= 4 * g.resolution());
  }
}

TEST_CASE("area identity") {
  const double area =
      integrate(0.0, kGeometry.r_far(), 20000, [](double r) { return r * kGeometry.alpha(r); });
  CHECK(std::abs(area - 625.0) <= 0.005 * 625.0);
  // Monte-Carlo estimate of the ROI area from uniform disc samples.
  Rng rng(12);
  std::size_t inside = 0;
  const std::size_t n = 400000;
  for (std::size_t i = 0; i < n; ++i) {
    const Position p = sample_uniform(kCircle, Region::Whole, rng);
    inside += kCircle.roi().contains(p);
  }
  const double mc = kCircle.area() * static_cast<double>(inside) / static_cast<double>(n);
  CHECK(std::abs(mc - area) <= 0.03 * 625.0);
}

TEST_CASE("radial densities integrate to one") {
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    const double total = integrate(0.0, 40.0, 40000, [h](double r) { return pdf_r(r, h, kGeometry); });
    CHECK(std::abs(total - 1.0) <= 1e-3);
  }
  CHECK(pdf_r(0.0, Hypothesis::H1, kGeometry) == 0.0);
  CHECK(pdf_r(41.0, Hypothesis::H1, kGeometry) == 0.0);
}

TEST_CASE("radius histogram of ROI samples follows the H0 density") {
  Rng rng(31);
  const std::size_t n = 1'000'000;
  const double lo = 4.0;
  const double hi = kGeometry.r_far();
  const std::size_t bins = 30;
  const double width = (hi - lo) / bins;
  std::vector<std::size_t> counts(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Position p = sample_uniform(kCircle, Region::A0, rng);
    const auto b = static_cast<std::size_t>((std::hypot(p.x, p.y) - lo) / width);
    ++counts[std::min(b, bins - 1)];
  }
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + width * static_cast<double>(b);
    const double prob = integrate(a, a + width, 200, [](double r) { return pdf_r(r, Hypothesis::H0, kGeometry); });
    const double expected = prob * static_cast<double>(n);
    const double sd = std::sqrt(expected * (1 - prob));
    CHECK(std::abs(static_cast<double>(counts[b]) - expected) <= 3 * sd + 1);
  }
}

TEST_CASE("llr sentinels and the ratio-one point") {
  // Beyond the ROI the circle never meets it.
  const double far_db = path_loss_los_db(39.5, kParams);
  CHECK(llr(far_db, kGeometry, kParams) == -kLlrSaturation);
  CHECK(np_decide(far_db, 1.0, kGeometry, kParams) == 1);
  CHECK(llr_at_radius(2.0, kGeometry) == -kLlrSaturation);

  // theta = 0 accepts even the saturated lower value.
  CHECK(np_decide(far_db, 0.0, kGeometry, kParams) == 0);

  // Find r where |A1| alpha = |A0| (2 pi - alpha): the llr vanishes there.
  const double target = kTwoPi * kGeometry.roi_area() / (kGeometry.roi_area() + kGeometry.outside_area());
  double best_r = 0.0;
  double best_gap = 1e9;
  for (double r = 4.0; r < kGeometry.r_far(); r += 0.001) {
    const double gap = std::abs(kGeometry.alpha(r) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_r = r;
    }
  }
  CHECK(std::abs(llr_at_radius(best_r, kGeometry)) < 0.01);
}

TEST_CASE("llr matches a Monte-Carlo density ratio") {
  Rng rng(77);
  const double r0 = 20.0;
  const double half = 0.25;
  double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
  for (int i = 0; i < 4'000'000; ++i) {
    const double x = uniform(rng, -40, 40);
    const double y = uniform(rng, -40, 40);
    const double r = std::hypot(x, y);
    if (r > 40) continue;
    const bool in = kCircle.roi().contains({x, y});
    (in ? n0 : n1) += 1;
    if (std::abs(r - r0) <= half) (in ? s0 : s1) += 1;
  }
  const double mc = std::log2((s0 / n0) / (s1 / n1));
  CHECK(std::abs(llr_at_radius(r0, kGeometry) - mc) <= 0.1);
}

TEST_CASE("llr does not depend on the attenuation scale") {
  for (double d = 4.5; d < 38; d += 1.7) {
    const double a_db = path_loss_los_db(d, kParams);
    CHECK(llr(a_db, kGeometry, kParams) ==
          doctest::Approx(llr_linear(std::pow(10.0, a_db / 20.0), kGeometry, kParams)).epsilon(1e-9));
  }
}

TEST_CASE("posterior via Bayes") {
  const double a = path_loss_los_db(15.0, kParams);
  const double l = llr(a, kGeometry, kParams);
  const double expected = 1.0 / (1.0 + std::exp2(l));
  CHECK(posterior_h1(a, 0.5, kGeometry, kParams) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("NP ROC") {
  const auto thetas = default_theta_grid();
  CHECK(thetas.front() == 0.0);
  CHECK(std::isinf(thetas.back()));
  const NpRoc roc = np_roc(kGeometry, kParams, 20000, thetas, 5);
  CHECK(roc.sweep.front().p_fa == 0.0);
  CHECK(roc.sweep.front().p_md == 1.0);
  CHECK(roc.sweep.back().p_fa == 1.0);
  CHECK(roc.sweep.back().p_md == 0.0);
  for (std::size_t i = 1; i < roc.sweep.size(); ++i) {
    CHECK(roc.sweep[i].p_fa >= roc.sweep[i - 1].p_fa);
    CHECK(roc.sweep[i].p_md <= roc.sweep[i - 1].p_md);
  }
  const auto pts = roc.curve.points();
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].p_md <= pts[i - 1].p_md);
  CHECK_THROWS_AS(np_roc(kGeometry, kParams, 9999, thetas, 5), std::invalid_argument);
}

TEST_CASE("NP test beats a distance heuristic on the same samples") {
  Rng rng(8);
  std::vector<double> np_scores;
  std::vector<double> heuristic;
  std::vector<int> labels;
  const double rc = std::hypot(kCircle.roi().centroid().x, kCircle.roi().centroid().y);
  for (int i = 0; i < 40000; ++i) {
    const Region region = i % 2 ? Region::A1 : Region::A0;
    const Position p = sample_uniform(kCircle, region, rng);
    const double d = std::max(std::hypot(p.x, p.y), kMinLinkDistance);
    np_scores.push_back(-llr(path_loss_los_db(d, kParams), kGeometry, kParams));
    heuristic.push_back(std::abs(d - rc));
    labels.push_back(i % 2);
  }
  const RocCurve np = empirical_roc(np_scores, labels);
  const RocCurve h = empirical_roc(heuristic, labels);
  CHECK(auc(np) <= auc(h) + 1e-3);
  for (double fa = 0.0; fa <= 1.0; fa += 0.01) CHECK(np.p_md_at(fa) <= h.p_md_at(fa) + 0.01);
}

TEST_CASE("sector geometry validation") {
  CHECK_THROWS_AS(SectorGeometry(kCircle, 2e-3), std::invalid_argument);
  CHECK_THROWS_AS(np_decide(60.0, -1.0, kGeometry, kParams), std::invalid_argument);
}
