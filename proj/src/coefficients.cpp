#include <algorithm>
#include <cmath>
#include <random>

#include "fracstab/coefficients.hpp"
#include "fracstab/error.hpp"
#include "fracstab/format.hpp"

namespace fracstab {

const char* to_string(CoefficientFamily family) noexcept {
  switch (family) {
    case CoefficientFamily::zero: return "zero";
    case CoefficientFamily::linear: return "linear";
    case CoefficientFamily::bounded_smooth: return "bounded_smooth";
    case CoefficientFamily::additive_noise: return "additive_noise";
    case CoefficientFamily::custom: return "custom";
  }
  return "unknown";
}

void CoefficientSet::validate() const {
  if (dim < 1) throw Error(ErrorKind::shape, "coefficients: dimension must be >= 1", "coeffs.dim");
  if (!g || !b || !sigma) throw Error(ErrorKind::config, "coefficients: g, b and sigma must be set", "coeffs");
  const auto check = [](double L, const char* field) {
    if (!(L >= 0.0) || !std::isfinite(L))
      throw Error(ErrorKind::domain, "coefficients: Lipschitz constants must be finite and >= 0", field);
  };
  check(L_g, "coeffs.L_g");
  check(L_b, "coeffs.L_b");
  check(L_sigma, "coeffs.L_sigma");
}

namespace {

RecessionFn zero_rec(int dim) {
  return [dim](const Vector&) { return Vector::Zero(dim).eval(); };
}

std::string matrix_text(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.size(); ++i) out += format_double(m.data()[i]) + ',';
  return out;
}

double lipschitz_bound(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const double spectral = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  return std::max(row_sum_norm(m), spectral);
}

}  // namespace

CoefficientSet make_zero(int dim) {
  if (dim < 1) throw Error(ErrorKind::shape, "make_zero: dimension must be >= 1", "dim");
  CoefficientSet c;
  c.dim = dim;
  c.family = CoefficientFamily::zero;
  c.g = c.b = c.sigma = [dim](double, const Vector&) { return Vector::Zero(dim).eval(); };
  c.g_rec = c.b_rec = c.sigma_rec = zero_rec(dim);
  return c;
}

CoefficientSet make_linear(const Matrix& G, const Matrix& B, const Matrix& S) {
  const auto n = G.rows();
  for (const Matrix* m : {&G, &B, &S}) {
    if (m->rows() != n || m->cols() != n || n == 0)
      throw Error(ErrorKind::shape, "make_linear: G, B, S must be square of equal size", "coeffs");
    if (!m->allFinite()) throw Error(ErrorKind::domain, "make_linear: entries must be finite", "coeffs");
  }
  CoefficientSet c;
  c.dim = static_cast<int>(n);
  c.family = CoefficientFamily::linear;
  c.g = [G](double, const Vector& x) { return (G * x).eval(); };
  c.b = [B](double, const Vector& x) { return (B * x).eval(); };
  c.sigma = [S](double, const Vector& x) { return (S * x).eval(); };
  c.g_rec = [G](const Vector& y) { return (G * y).eval(); };
  c.b_rec = [B](const Vector& y) { return (B * y).eval(); };
  c.sigma_rec = [S](const Vector& y) { return (S * y).eval(); };
  c.params = "G=" + matrix_text(G) + ";B=" + matrix_text(B) + ";S=" + matrix_text(S);
  c.L_g = lipschitz_bound(G);
  c.L_b = lipschitz_bound(B);
  c.L_sigma = lipschitz_bound(S);
  return c;
}

CoefficientSet make_bounded_smooth(int dim, double c_g, double c_b, double c_s) {
  if (dim < 1) throw Error(ErrorKind::shape, "make_bounded_smooth: dimension must be >= 1", "dim");
  if (!std::isfinite(c_g) || !std::isfinite(c_b) || !std::isfinite(c_s))
    throw Error(ErrorKind::domain, "make_bounded_smooth: scale factors must be finite", "coeffs");
  const auto sine = [](double c) {
    return [c](double, const Vector& x) { return (c * x.array().sin()).matrix().eval(); };
  };
  CoefficientSet c;
  c.dim = dim;
  c.family = CoefficientFamily::bounded_smooth;
  c.g = sine(c_g);
  c.b = sine(c_b);
  c.sigma = sine(c_s);
  // bounded maps: t^{1-a} times a bounded value vanishes
  c.g_rec = c.b_rec = c.sigma_rec = zero_rec(dim);
  c.params = "c=" + format_double(c_g) + ',' + format_double(c_b) + ',' + format_double(c_s);
  c.L_g = std::abs(c_g);
  c.L_b = std::abs(c_b);
  c.L_sigma = std::abs(c_s);
  return c;
}

CoefficientSet make_additive_noise(int dim, double s) {
  CoefficientSet c = make_zero(dim);
  c.family = CoefficientFamily::additive_noise;
  c.sigma = [dim, s](double, const Vector&) { return Vector::Constant(dim, s).eval(); };
  c.allow_nonvanishing = true;
  c.params = "s=" + format_double(s);
  return c;
}

CoefficientSet make_custom(int dim, CoeffFn g, CoeffFn b, CoeffFn sigma, double L_g, double L_b,
                           double L_sigma) {
  CoefficientSet c;
  c.dim = dim;
  c.family = CoefficientFamily::custom;
  c.g = std::move(g);
  c.b = std::move(b);
  c.sigma = std::move(sigma);
  c.L_g = L_g;
  c.L_b = L_b;
  c.L_sigma = L_sigma;
  c.assumptions_verified = false;
  c.validate();
  return c;
}

Vector recession(const CoeffFn& f, const RecessionFn& rec, const Vector& y) {
  if (rec) return rec(y);
  constexpr double scale = 1e8;
  return f(0.0, scale * y) / scale;
}

LipschitzReport verify_lipschitz(const CoeffFn& f, double L_declared, int n, int n_trials,
                                 std::uint64_t seed, double T) {
  if (n_trials < 100) throw Error(ErrorKind::domain, "verify_lipschitz: n_trials must be >= 100", "n_trials");
  if (n < 1) throw Error(ErrorKind::shape, "verify_lipschitz: dimension must be >= 1", "n");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> time(0.0, T);
  const auto in_ball = [&] {
    Vector v(n);
    do {
      for (int i = 0; i < n; ++i) v(i) = unit(rng);
    } while (v.norm() > 1.0);
    return (10.0 * v).eval();
  };

  LipschitzReport report;
  for (int trial = 0; trial < n_trials; ++trial) {
    const double t = time(rng);
    const Vector x = in_ball();
    // alternate between far pairs and close pairs, which probe local slopes
    Vector y = in_ball();
    if (trial % 2 == 1) y = x + 1e-3 * (y - x);
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    const double ratio = (f(t, x) - f(t, y)).norm() / dist;
    if (ratio > report.max_ratio || report.witness_x.size() == 0) {
      report.max_ratio = ratio;
      report.witness_t = t;
      report.witness_x = x;
      report.witness_y = y;
    }
  }
  report.pass = report.max_ratio <= L_declared * (1.0 + 1e-9);
  return report;
}

bool verify_vanishing(const CoeffFn& f, int n, double T, int n_nodes) {
  const Vector zero = Vector::Zero(n);
  const int nodes = std::max(n_nodes, 1);
  for (int i = 0; i < nodes; ++i) {
    const double t = nodes == 1 ? 0.0 : T * i / (nodes - 1);
    if (!(f(t, zero).norm() <= 1e-14)) return false;
  }
  return true;
}

bool verify_assumptions(CoefficientSet& coeffs, double T, std::uint64_t seed) {
  coeffs.validate();
  bool ok = true;
  const std::pair<const CoeffFn*, double> maps[] = {
      {&coeffs.g, coeffs.L_g}, {&coeffs.b, coeffs.L_b}, {&coeffs.sigma, coeffs.L_sigma}};
  for (const auto& [f, L] : maps) {
    ok = ok && verify_lipschitz(*f, L, coeffs.dim, 400, seed++, T).pass;
    ok = ok && verify_vanishing(*f, coeffs.dim, T, 64);
  }
  coeffs.assumptions_verified = ok;
  return ok;
}

}  // namespace fracstab
