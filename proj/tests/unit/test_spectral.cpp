#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fixtures.hpp"
#include "fracstab/error.hpp"
#include "fracstab/spectral.hpp"

using namespace fracstab;
using std::numbers::pi;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int k = 0;
    for (double v : r) m(i, k++) = v;
    ++i;
  }
  return m;
}

bool contains(const Spectrum& s, Complex z, double tol = 1e-10) {
  return std::any_of(s.eigenvalues.begin(), s.eigenvalues.end(),
                     [&](Complex l) { return std::abs(l - z) <= tol; });
}

Spectrum single(Complex z) {
  Spectrum s;
  s.eigenvalues = {z};
  return s;
}

}  // namespace

TEST_CASE("eigenvalues of small examples") {
  auto s = eigenvalues(mat({{-1.0}}));
  REQUIRE(s.eigenvalues.size() == 1);
  CHECK(contains(s, -1.0));

  s = eigenvalues(mat({{0, 1}, {-1, 0}}));
  CHECK(contains(s, Complex(0, 1)));
  CHECK(contains(s, Complex(0, -1)));

  s = eigenvalues(mat({{-2, 1}, {0, -3}}));
  CHECK(contains(s, -2.0));
  CHECK(contains(s, -3.0));
  CHECK(s.residual <= 1e-12);
}

TEST_CASE("eigenvalues of a random matrix have small residual and match trace and determinant") {
  Matrix a(5, 5);
  std::uint64_t state = 12345;
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 5; ++k) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      a(i, k) = double(state >> 11) / double(1ULL << 53) - 0.5;
    }
  const auto s = eigenvalues(a);
  REQUIRE(s.eigenvalues.size() == 5);
  CHECK(s.residual <= 1e-10);
  Complex sum = 0.0, prod = 1.0;
  for (auto l : s.eigenvalues) {
    sum += l;
    prod *= l;
  }
  CHECK(std::abs(sum - a.trace()) <= 1e-10);
  CHECK(std::abs(prod - a.determinant()) <= 1e-10);
}

TEST_CASE("eigenvalues are invariant under similarity") {
  const Matrix a = mat({{-1, 2, 0}, {0, -3, 1}, {0.5, 0, -2}});
  const Matrix p = mat({{1, 2, 0}, {0, 1, 3}, {1, 0, 1}});
  const auto s1 = eigenvalues(a);
  const auto s2 = eigenvalues(p * a * p.inverse());
  for (auto l : s1.eigenvalues) CHECK(contains(s2, l, 1e-9));
}

TEST_CASE("eigenvalues reject non-square input") {
  CHECK_THROWS_AS(eigenvalues(Matrix(2, 3)), Error);
}

TEST_CASE("sector check examples") {
  auto v = sector_check(single(-1.0), 0.75);
  CHECK(v.in_sector);
  CHECK(v.margin == doctest::Approx(0.625 * pi).epsilon(1e-14));

  Spectrum rot;
  rot.eigenvalues = {Complex(0, 1), Complex(0, -1)};
  v = sector_check(rot, 0.8);
  CHECK(v.in_sector);
  CHECK(v.margin == doctest::Approx(0.1 * pi).epsilon(1e-12));

  v = sector_check(single(std::polar(1.0, pi / 4)), 0.6);
  CHECK_FALSE(v.in_sector);
  CHECK(v.margin == doctest::Approx(pi / 4 - 0.3 * pi).epsilon(1e-12));
  REQUIRE(v.offending_eigenvalue.has_value());
  CHECK(std::abs(*v.offending_eigenvalue - std::polar(1.0, pi / 4)) < 1e-15);

  // zero eigenvalue has no argument and lies outside every sector
  CHECK_FALSE(sector_check(single(0.0), 0.75).in_sector);
  CHECK_FALSE(sector_check(single(1.0), 0.75).in_sector);
}

TEST_CASE("sector verdict is invariant under positive scaling and monotone in alpha") {
  const Matrix a = mat({{-0.3, 2.0}, {-2.0, -0.3}});
  const auto base = sector_check(eigenvalues(a), 0.8);
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    const auto scaled = sector_check(eigenvalues(c * a), 0.8);
    CHECK(scaled.in_sector == base.in_sector);
    CHECK(scaled.margin == doctest::Approx(base.margin).epsilon(1e-10));
  }
  // the sector shrinks as alpha grows, so the margin decreases
  double previous = 1e9;
  for (double alpha : {0.55, 0.65, 0.75, 0.85, 0.95, 1.0}) {
    const double m = sector_check(eigenvalues(a), alpha).margin;
    CHECK(m < previous);
    previous = m;
  }
}

TEST_CASE("ml_norm_sup examples") {
  for (double alpha : {0.6, 0.75, 1.0})
    CHECK(ml_norm_sup(Matrix::Zero(2, 2), alpha, 3.0, 65) ==
          doctest::Approx(1.0 / std::tgamma(alpha)).epsilon(1e-13));

  CHECK(ml_norm_sup(mat({{-1.0}}), 0.75, 1.0, 1025) ==
        doctest::Approx(1.0 / fixtures::kGamma0_75).epsilon(1e-13));

  // increasing scalar case: supremum at the right end
  const double at_T = std::abs(ml_real(0.75, 0.75, 1.0));
  CHECK(ml_norm_sup(mat({{1.0}}), 0.75, 1.0, 257) == doctest::Approx(at_T).epsilon(1e-13));

  // grid scan with the scalar function agrees for a diagonal matrix
  const Matrix d = mat({{-1, 0}, {0, 0.2}});
  double scan = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = 2.0 * i / 100;
    const double ta = std::pow(t, 0.8);
    scan = std::max(scan, std::max(std::abs(ml_real(0.8, 0.8, -ta)), std::abs(ml_real(0.8, 0.8, 0.2 * ta))));
  }
  CHECK(ml_norm_sup(d, 0.8, 2.0, 101) == doctest::Approx(scan).epsilon(1e-12));
}

TEST_CASE("lemma21 profile for a stable scalar") {
  const auto r = lemma21_profile(mat({{-1.0}}), 0.75, 100.0, 2001);
  CHECK_FALSE(r.diverged);
  CHECK(std::isfinite(r.m_tilde));
  CHECK(std::isfinite(r.conv_sup));
  CHECK(r.m_sup == doctest::Approx(1.0 / fixtures::kGamma0_75).epsilon(1e-12));
  CHECK(r.conv_growth_last_half < 0.01);
  CHECK(r.decay_growth_last_half < 0.01);
  CHECK(r.t0 < 100.0);

  // the convolution at a few nodes against adaptive quadrature
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double h = r.grid_used.step();
  for (int i : {20, 200, 1000, 2000}) {
    const double t = h * i;
    const auto f = [&](double s) {
      return std::pow(t - s, -0.25) * std::abs(ml_real(0.75, 0.75, -std::pow(t - s, 0.75))) * std::pow(s, -0.25);
    };
    const double ref = std::pow(t, 0.25) * integrator.integrate(f, 0.0, t);
    CHECK(r.convolution_profile[i] == doctest::Approx(ref).epsilon(0.02));
  }
}

TEST_CASE("lemma21 profile reports divergence out of the sector") {
  const auto r = lemma21_profile(mat({{1.0}}), 0.75, 20.0, 401);
  CHECK(r.diverged);
  CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("lemma21 profile for a stable diagonal system") {
  const auto r = lemma21_profile(mat({{-1, 0}, {0, -2}}), 0.8, 100.0, 2001);
  CHECK_FALSE(r.diverged);
  CHECK(std::isfinite(r.m_tilde));
  CHECK(std::isfinite(r.conv_sup));
  const auto fine = lemma21_profile(mat({{-1, 0}, {0, -2}}), 0.8, 100.0, 20001);
  CHECK(r.conv_sup == doctest::Approx(fine.conv_sup).epsilon(0.02));
  CHECK(r.m_tilde == doctest::Approx(fine.m_tilde).epsilon(0.02));
}

TEST_CASE("lemma21 profile input validation") {
  CHECK_THROWS_AS(lemma21_profile(mat({{-1.0}}), 0.75, 5.0, 101), Error);
  CHECK_THROWS_AS(lemma21_profile(mat({{-1.0}}), 0.4, 50.0, 101), Error);
  CHECK_THROWS_AS(lemma21_profile(Matrix(2, 3), 0.75, 50.0, 101), Error);
}
