#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "fracstab/criteria.hpp"
#include "fracstab/error.hpp"
#include "fracstab/moments.hpp"

using namespace fracstab;

namespace {

// Ensemble with every path equal to f(t) (weighted and unweighted alike).
PathEnsemble constructed(int n_paths, int N, double T, double (*f)(double)) {
  PathEnsemble e;
  e.grid = {T, N};
  e.n_paths = n_paths;
  e.dim = 1;
  e.values.assign(std::size_t(n_paths) * (N + 1), std::nan(""));
  e.weighted.assign(e.values.size(), 0.0);
  e.status.assign(n_paths, PathStatus::ok);
  e.diagnostics.assign(n_paths, {});
  for (int i = 0; i < n_paths; ++i)
    for (int j = 0; j <= N; ++j) {
      e.weighted[e.offset(i, j)] = f(e.grid.t(j));
      if (j > 0) e.values[e.offset(i, j)] = f(e.grid.t(j));
    }
  return e;
}

MomentCurve power_curve(double exponent, int n) {
  MomentCurve c;
  c.n_paths = 100;
  for (int j = 1; j <= n; ++j) {
    c.t.push_back(j * 0.5);
    c.m.push_back(std::pow(j * 0.5, exponent));
    c.half_width.push_back(0.0);
  }
  return c;
}

SystemSpec scalar(double a, double rho, CoefficientSet coeffs) {
  return SystemSpec{Matrix::Constant(1, 1, a), Vector::Constant(1, rho), std::move(coeffs), {0.75, 2}};
}

}  // namespace

TEST_CASE("pairwise summation") {
  std::vector<double> x(1000);
  std::iota(x.begin(), x.end(), 1.0);
  CHECK(pairwise_sum(x) == 500500.0);
  CHECK(pairwise_sum({}) == 0.0);
  // robust to cancellation where naive summation loses the small terms
  std::vector<double> y(1 << 20, 1e-16);
  y[0] = 1.0;
  CHECK(pairwise_sum(y) == doctest::Approx(1.0 + (y.size() - 1) * 1e-16).epsilon(1e-15));
}

TEST_CASE("moment curves of constructed ensembles") {
  const auto zero = constructed(40, 10, 1.0, [](double) { return 0.0; });
  for (bool w : {false, true}) {
    const auto c = pth_moment_curve(zero, 2, w);
    for (double m : c.m) CHECK(m == 0.0);
  }
  CHECK(h_norm(zero, 2) == 0.0);

  const auto det = constructed(40, 10, 2.0, [](double t) { return 1.0 + t; });
  const auto c = pth_moment_curve(det, 3, false);
  REQUIRE(c.t.size() == 10);  // node 0 is omitted in the unweighted curve
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    CHECK(c.m[k] == doctest::Approx(std::pow(1.0 + c.t[k], 3)).epsilon(1e-14));
    CHECK(c.half_width[k] == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(pth_moment_curve(det, 2, true).t.size() == 11);
  CHECK(h_norm(det, 2) == doctest::Approx(9.0));
  CHECK_THROWS_AS(pth_moment_curve(det, 2, false, 0), Error);

  // too few paths for a normal interval
  const auto few = constructed(5, 4, 1.0, [](double t) { return t; });
  CHECK(std::isnan(pth_moment_curve(few, 2, false).half_width[0]));

  auto failed = det;
  failed.status[3] = PathStatus::overflow;
  CHECK_THROWS_AS(pth_moment_curve(failed, 2, false), Error);

  CHECK(c.to_csv().rfind("t,m,ci_half_width\n", 0) == 0);
}

TEST_CASE("moments are monotone in p on either side of norm 1") {
  const auto big = constructed(30, 8, 1.0, [](double t) { return 1.0 + 3 * t; });
  const auto small = constructed(30, 8, 1.0, [](double t) { return 0.9 - 0.5 * t; });
  for (int p = 2; p < 6; ++p) {
    const auto b1 = pth_moment_curve(big, p, false), b2 = pth_moment_curve(big, p + 1, false);
    const auto s1 = pth_moment_curve(small, p, false), s2 = pth_moment_curve(small, p + 1, false);
    for (std::size_t k = 0; k < b1.m.size(); ++k) {
      CHECK(b2.m[k] >= b1.m[k]);
      CHECK(s2.m[k] <= s1.m[k]);
    }
  }
}

TEST_CASE("decay fit on exact power laws") {
  auto v = decay_fit(power_curve(-2.0, 40), 0.5);
  CHECK(v.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(v.slope_ci.second - v.slope_ci.first == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(v.window.second == doctest::Approx(20.0));

  v = decay_fit(power_curve(0.0, 40), 0.5);
  CHECK(v.slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(decay_fit(power_curve(-1.0, 5), 0.5), Error);
  CHECK_THROWS_AS(decay_fit(power_curve(-1.0, 40), 1.5), Error);
}

TEST_CASE("additive noise second and fourth moments") {
  const double s = 0.3;
  const auto sys = scalar(0.0, 0.0, make_additive_noise(1, s));
  const TimeGrid grid{1.0, 64};
  const int n = 4000;
  const auto x = simulate_mild(sys, grid, brownian_increments(grid, n, 123));
  const auto m2 = pth_moment_curve(x, 2, false);
  const auto m4 = pth_moment_curve(x, 4, false);
  const double g2 = fixtures::kGamma0_75 * fixtures::kGamma0_75;
  int outside = 0;
  for (std::size_t k = 0; k < m2.t.size(); ++k) {
    // Ito isometry: equality at p = 2
    const double var = s * s * std::sqrt(m2.t[k]) / (0.5 * g2);
    if (std::abs(m2.m[k] - var) > 3 * m2.half_width[k] / 1.96) ++outside;
    // moment inequality with C_4 = 36: E X^4 <= 36 (int kappa^2)^2
    CHECK(m4.m[k] <= 36.0 * var * var + 3 * m4.half_width[k] / 1.96);
    // Gaussian fourth moment 3 var^2 sits far inside that bound
    CHECK(std::abs(m4.m[k] - 3 * var * var) <= 4 * m4.half_width[k] / 1.96);
  }
  // nodes share one ensemble, so allow a couple of three-sigma excursions
  CHECK(outside <= 2);
}

TEST_CASE("stability verdicts") {
  const double T = 20.0;
  const TimeGrid grid{T, 512};
  const auto noise = brownian_increments(grid, 40, 9);

  // zero coefficients in the sector, rho at delta
  CriterionInputs in;
  in.order = {0.75, 2};
  in.T = T;
  in.A_norm = 1.0;
  in.M = 1.0 / fixtures::kGamma0_75;
  const double delta = delta_for_epsilon(in, 1.0);
  auto sys = scalar(-1.0, delta, make_zero(1));
  const auto x = simulate_mild(sys, grid, noise);
  TaggedCurves curves{pth_moment_curve(x, 2, false), pth_moment_curve(x, 2, true), delta};
  auto v = stability_verdict(std::span<const TaggedCurves>(&curves, 1), 1.0, delta, 1.0);
  CHECK(v.stable_p);
  // the supremum is the closed-form one, found by a grid scan
  double scan = 0.0;
  for (int j = 0; j <= grid.N; ++j) {
    const double t = grid.t(j);
    scan = std::max(scan, std::pow(delta * ml_real(0.75, 0.75, -std::pow(t, 0.75)), 2));
  }
  CHECK(v.sup_moment == doctest::Approx(scan).epsilon(1e-8));
  CHECK(v.asymptotically_stable_p);
  CHECK(v.slope < 0);

  // a larger initial datum breaks the delta condition
  TaggedCurves too_big = curves;
  too_big.rho_norm = 2 * delta;
  CHECK_FALSE(stability_verdict(std::span<const TaggedCurves>(&too_big, 1), 1.0, delta, 1.0).stable_p);

  // out of the sector the curve grows
  const auto y = simulate_mild(scalar(1.0, 1e-6, make_zero(1)), TimeGrid{5.0, 256}, brownian_increments(TimeGrid{5.0, 256}, 40, 9));
  TaggedCurves growing{pth_moment_curve(y, 2, false), pth_moment_curve(y, 2, true), 1e-6};
  v = stability_verdict(std::span<const TaggedCurves>(&growing, 1), 1.0, 1.0, 1e-3);
  CHECK_FALSE(v.asymptotically_stable_p);
  CHECK(v.slope > 0);

  // rho = 0 stays at zero
  const Matrix L = Matrix::Constant(1, 1, 0.05);
  const auto z = simulate_mild(scalar(-1.0, 0.0, make_linear(L, L, L)), grid, noise);
  TaggedCurves zero{pth_moment_curve(z, 2, false), pth_moment_curve(z, 2, true), 0.0};
  v = stability_verdict(std::span<const TaggedCurves>(&zero, 1), 1.0, delta, 1e-12);
  CHECK(v.stable_p);
  CHECK(v.asymptotically_stable_p);

  // asymptotic stability implies stability
  TaggedCurves both[2] = {curves, too_big};
  v = stability_verdict(both, 1.0, delta, 1.0);
  CHECK_FALSE(v.stable_p);
  CHECK_FALSE(v.asymptotically_stable_p);
  CHECK(v.to_text().find("stable_p = false") != std::string::npos);
}

TEST_CASE("homogeneous benchmark decays on the tail") {
  const TimeGrid grid{50.0, 2048};
  // the closed-form curve is the oracle; the simulator must match its fit
  const auto cf = closed_form_homogeneous(Matrix::Constant(1, 1, -1.0), Vector::Constant(1, 1.0), 0.75, grid);
  const auto exact = decay_fit(pth_moment_curve(cf, 2, false), 0.5);
  CHECK(exact.slope <= -1.0);
  const auto x = simulate_mild(scalar(-1.0, 1.0, make_zero(1)), grid, brownian_increments(grid, 4, 3));
  const auto fitted = decay_fit(pth_moment_curve(x, 2, false), 0.5);
  CHECK(fitted.slope <= -1.0);
  CHECK(fitted.slope == doctest::Approx(exact.slope).epsilon(1e-6));
}
