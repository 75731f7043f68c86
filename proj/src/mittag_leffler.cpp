#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fracstab/error.hpp"
#include "fracstab/fraccalc.hpp"

namespace fracstab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Target accuracy of the contour quadrature, log(1e-15).
const double kLogTarget = std::log(1e-15);
const double kLogEps = std::log(DBL_EPSILON);

// 1 / Gamma(x), zero at the poles.
double rgamma(double x) {
  if (x <= 0.0 && std::abs(x - std::nearbyint(x)) <= 1e-12) return 0.0;
  if (x > 171.0) return std::exp(-std::lgamma(x));
  return 1.0 / gamma_fn(x);
}

// ---------------------------------------------------------------------------
// Inversion of the Laplace transform s^{alpha-beta} / (s^alpha - z) along an
// optimal parabolic contour s(u) = mu (1 + i u)^2, trapezoidal rule with step h
// and 2N+1 nodes, plus residues of the poles left outside the contour.
// Parameter selection follows Garrappa, SIAM J. Numer. Anal. 53 (2015).

struct ContourParams {
  double mu = 0.0;
  double h = 0.0;
  double nodes = kInf;  // N, +inf when the region is not admissible
};

// Region bounded by two singularities.
ContourParams params_bounded(double phi_j, double phi_j1, double pj, double qj,
                             double log_eps) {
  constexpr double fac = 1.01;
  const double f_max = std::exp(log_eps - kLogEps);
  const double sq_phi_j = std::sqrt(phi_j);
  const double threshold = 2.0 * std::sqrt((log_eps - kLogEps));
  const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

  double sq_bar_j = 0.0;
  double sq_bar_j1 = 0.0;
  double f_bar = 1.0;
  bool admissible = false;

  if (pj < 1e-14 && qj < 1e-14) {
    sq_bar_j = sq_phi_j;
    sq_bar_j1 = sq_phi_j1;
    admissible = true;
  } else if (pj < 1e-14) {
    sq_bar_j = sq_phi_j;
    const double f_min =
        sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), qj) : fac;
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fq = std::pow(f_bar, -1.0 / qj);
      sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
      admissible = true;
    }
  } else if (qj < 1e-14) {
    sq_bar_j1 = sq_phi_j1;
    const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), pj);
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
      admissible = true;
    }
  } else {
    double f_min =
        fac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(pj, qj));
    if (f_min < f_max) {
      f_min = std::max(f_min, 1.5);
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      const double fq = std::pow(f_bar, -1.0 / qj);
      const double w = -phi_j1 / log_eps;
      const double den = 2.0 + w - (1.0 + w) * fp + fq;
      sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
      sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
      admissible = true;
    }
  }
  if (!admissible) return {};

  const double log_eps_adj = log_eps - std::log(f_bar);
  const double w = -sq_bar_j1 * sq_bar_j1 / log_eps_adj;
  const double mu_root = ((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w);
  ContourParams out;
  out.mu = mu_root * mu_root;
  out.h = -2.0 * kPi / log_eps_adj * (sq_bar_j1 - sq_bar_j) /
          ((1.0 + w) * sq_bar_j + sq_bar_j1);
  out.nodes = std::ceil(std::sqrt(1.0 - log_eps_adj / out.mu) / out.h);
  if (!(out.mu > 0.0) || !(out.h > 0.0) || !std::isfinite(out.nodes)) return {};
  return out;
}

// Region to the right of the last singularity.
ContourParams params_unbounded(double phi_j, double pj, double log_eps) {
  const double sq_phi_j = std::sqrt(phi_j);
  double phi_bar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
  double sq_phi_bar = std::sqrt(phi_bar);
  constexpr double f_min = 1.0, f_max = 10.0, f_tar = 5.0;

  double nodes = 0.0, a = 0.0, sq_mu = 0.0;
  for (int guard = 0; guard < 100; ++guard) {
    const double phi_t = phi_bar;
    const double log_eps_phi_t = log_eps / phi_t;
    nodes = std::ceil(phi_t / kPi *
                      (1.0 - 1.5 * log_eps_phi_t + std::sqrt(1.0 - 2.0 * log_eps_phi_t)));
    a = kPi * nodes / phi_t;
    sq_mu = sq_phi_bar * std::abs(4.0 - a) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * a));
    const double f_bar = std::pow((sq_phi_bar - sq_phi_j) / sq_mu, -pj);
    if (pj < 1e-14 || (f_min < f_bar && f_bar < f_max)) break;
    sq_phi_bar = std::pow(f_tar, -1.0 / pj) * sq_mu + sq_phi_j;
    phi_bar = sq_phi_bar * sq_phi_bar;
  }
  ContourParams out;
  out.mu = sq_mu * sq_mu;
  out.h = (-3.0 * a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a)) / (4.0 - a) / nodes;
  out.nodes = nodes;

  // keep round-off under control
  const double threshold = log_eps - kLogEps;
  if (out.mu > threshold) {
    const double q = std::abs(pj) < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / pj) * std::sqrt(out.mu);
    phi_bar = (q + sq_phi_j) * (q + sq_phi_j);
    if (phi_bar < threshold) {
      const double w = std::sqrt(kLogEps / (kLogEps - log_eps));
      const double u = std::sqrt(-phi_bar / kLogEps);
      out.mu = threshold;
      out.nodes = std::ceil(w * log_eps / 2.0 / kPi / (u * w - 1.0));
      out.h = std::sqrt(kLogEps / (kLogEps - log_eps)) / out.nodes;
    } else {
      return {};
    }
  }
  if (!(out.mu > 0.0) || !(out.h > 0.0) || !(out.nodes > 0.0)) return {};
  return out;
}

struct Singularity {
  std::complex<double> s;
  double phi;
};

// Poles s with s^alpha = z on the principal sheet, sorted by phi(s).
std::vector<Singularity> laplace_poles(double alpha, std::complex<double> z) {
  std::vector<Singularity> poles;
  const double theta = std::arg(z);
  const double kmin = std::ceil(-alpha / 2.0 - theta / (2.0 * kPi));
  const double kmax = std::floor(alpha / 2.0 - theta / (2.0 * kPi));
  const double radius = std::pow(std::abs(z), 1.0 / alpha);
  for (double k = kmin; k <= kmax; k += 1.0) {
    const std::complex<double> s = std::polar(radius, (theta + 2.0 * k * kPi) / alpha);
    const double phi = 0.5 * (s.real() + std::abs(s));
    if (phi > 1e-15) poles.push_back({s, phi});
  }
  return poles;
}

struct ContourChoice {
  ContourParams params;
  std::size_t region = 0;  // singularities with index > region get residues
};

// singular: origin followed by sorted poles. Returns region with fewest nodes.
ContourChoice choose_contour(const std::vector<Singularity>& singular, double alpha,
                             double beta) {
  const std::size_t count = singular.size();
  std::vector<double> p(count, 1.0), q(count, 1.0);
  p[0] = std::max(0.0, -2.0 * (alpha - beta + 1.0));
  q[count - 1] = kInf;

  double log_eps = kLogTarget;
  for (int relax = 0; relax < 15; ++relax) {
    ContourChoice best;
    best.params.nodes = kInf;
    for (std::size_t j = 0; j < count; ++j) {
      const double next_phi = j + 1 < count ? singular[j + 1].phi : kInf;
      if (!(singular[j].phi < log_eps - kLogEps) || !(singular[j].phi < next_phi)) continue;
      const ContourParams cand =
          j + 1 < count ? params_bounded(singular[j].phi, next_phi, p[j], q[j], log_eps)
                        : params_unbounded(singular[j].phi, p[j], log_eps);
      if (cand.nodes < best.params.nodes) {
        best.params = cand;
        best.region = j;
      }
    }
    if (best.params.nodes <= 200.0) return best;
    log_eps += std::log(10.0);
  }
  throw Error(ErrorKind::non_convergence, "ml_scalar: no admissible integration contour");
}

MLValue ml_contour(double alpha, double beta, std::complex<double> z) {
  std::vector<Singularity> singular{{0.0, 0.0}};
  auto poles = laplace_poles(alpha, z);
  std::sort(poles.begin(), poles.end(),
            [](const Singularity& a, const Singularity& b) { return a.phi < b.phi; });
  singular.insert(singular.end(), poles.begin(), poles.end());

  const ContourChoice choice = choose_contour(singular, alpha, beta);
  const double mu = choice.params.mu;
  const double h = choice.params.h;
  const int nodes = static_cast<int>(choice.params.nodes);

  const std::complex<double> I(0.0, 1.0);
  std::complex<double> sum = 0.0;
  for (int k = -nodes; k <= nodes; ++k) {
    const double u = h * k;
    const std::complex<double> s = mu * (I * u + 1.0) * (I * u + 1.0);
    const std::complex<double> ds = -2.0 * mu * u + 2.0 * mu * I;
    sum += std::exp(s) * std::pow(s, alpha - beta) / (std::pow(s, alpha) - z) * ds;
  }
  std::complex<double> value = h * sum / (2.0 * kPi * I);
  for (std::size_t j = choice.region + 1; j < singular.size(); ++j) {
    const auto s = singular[j].s;
    value += std::pow(s, 1.0 - beta) * std::exp(s) / alpha;
  }
  if (z.imag() == 0.0) value = value.real();
  MLValue out;
  out.value = value;
  out.branch = MLBranch::contour;
  out.terms = 2 * nodes + 1;
  return out;
}

MLValue ml_series(double alpha, double beta, std::complex<double> z,
                  const MLEvalPolicy& policy) {
  std::complex<double> sum = rgamma(beta);
  std::complex<double> power = 1.0;
  int small_run = 0;
  for (int k = 1; k < policy.series_max_terms; ++k) {
    power *= z;
    const std::complex<double> term = power * rgamma(alpha * k + beta);
    sum += term;
    if (std::abs(term) <= policy.series_tol * std::abs(sum)) {
      if (++small_run == 2) {
        return {sum, MLBranch::series, MLStatus::ok, k + 1};
      }
    } else {
      small_run = 0;
    }
  }
  throw Error(ErrorKind::non_convergence,
              "ml_scalar: series did not reach tolerance within series_max_terms");
}

// E(z) ~ -sum_{k=1}^{K} z^{-k} / Gamma(beta - alpha k) for real z -> -inf,
// alpha < 1. Returns false if the first neglected term is not negligible.
bool ml_asymptotic(double alpha, double beta, double z, int terms, MLValue& out) {
  double sum = 0.0;
  double power = 1.0;
  for (int k = 1; k <= terms; ++k) {
    power /= z;
    sum -= power * rgamma(beta - alpha * k);
  }
  // the first neglected term can vanish at a pole of Gamma, so look at two
  const double next = std::abs(power / z * rgamma(beta - alpha * (terms + 1))) +
                      std::abs(power / (z * z) * rgamma(beta - alpha * (terms + 2)));
  if (next > 1e-13 * std::max(std::abs(sum), 1e-300)) return false;
  out.value = sum;
  out.branch = MLBranch::asymptotic;
  out.status = MLStatus::ok;
  out.terms = terms;
  return true;
}

}  // namespace

const char* to_string(MLBranch branch) noexcept {
  switch (branch) {
    case MLBranch::series: return "series";
    case MLBranch::asymptotic: return "asymptotic";
    case MLBranch::contour: return "contour";
    case MLBranch::diagonalized: return "diagonalized";
    case MLBranch::zero: return "zero";
    case MLBranch::closed_form: return "closed_form";
  }
  return "unknown";
}

const char* to_string(MLStatus status) noexcept {
  switch (status) {
    case MLStatus::ok: return "ok";
    case MLStatus::accuracy_warning: return "accuracy_warning";
    case MLStatus::conditioning_warning: return "conditioning_warning";
  }
  return "unknown";
}

void MLEvalPolicy::validate() const {
  if (!(series_tol > 0.0)) throw Error(ErrorKind::domain, "series_tol must be positive", "series_tol");
  if (series_max_terms < 50)
    throw Error(ErrorKind::domain, "series_max_terms must be at least 50", "series_max_terms");
  if (!(asymptotic_switch_radius > 0.0))
    throw Error(ErrorKind::domain, "asymptotic_switch_radius must be positive",
                "asymptotic_switch_radius");
  if (asymptotic_terms < 2)
    throw Error(ErrorKind::domain, "asymptotic_terms must be at least 2", "asymptotic_terms");
  if (!(series_radius > 0.0))
    throw Error(ErrorKind::domain, "series_radius must be positive", "series_radius");
}

MLValue ml_scalar(double alpha, double beta, std::complex<double> z,
                  const MLEvalPolicy& policy) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::domain, "ml_scalar: alpha must be positive", "alpha");
  if (!std::isfinite(beta)) throw Error(ErrorKind::domain, "ml_scalar: beta must be finite", "beta");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw Error(ErrorKind::domain, "ml_scalar: z must be finite", "z");
  policy.validate();

  const double radius = std::abs(z);
  if (radius == 0.0) return {rgamma(beta), MLBranch::zero, MLStatus::ok, 1};
  if (alpha == 1.0 && beta == 1.0) return {std::exp(z), MLBranch::closed_form, MLStatus::ok, 1};
  if (radius <= policy.series_radius) return ml_series(alpha, beta, z, policy);

  if (z.imag() == 0.0 && z.real() <= -policy.asymptotic_switch_radius && alpha < 1.0) {
    MLValue out;
    if (ml_asymptotic(alpha, beta, z.real(), policy.asymptotic_terms, out)) return out;
  }
  MLValue out = ml_contour(alpha, beta, z);
  if (radius >= policy.asymptotic_switch_radius &&
      std::abs(std::arg(z)) <= alpha * kPi / 2.0) {
    out.status = MLStatus::accuracy_warning;
  }
  return out;
}

double ml_real(double alpha, double beta, double z, const MLEvalPolicy& policy) {
  return ml_scalar(alpha, beta, z, policy).value.real();
}

// ---------------------------------------------------------------------------
// matrix argument

namespace {

MLMatrixValue ml_matrix_series(double alpha, double beta, const Matrix& m,
                               const MLEvalPolicy& policy) {
  const auto n = m.rows();
  Matrix sum = Matrix::Identity(n, n) * rgamma(beta);
  Matrix power = Matrix::Identity(n, n);
  int small_run = 0;
  for (int k = 1; k < policy.series_max_terms; ++k) {
    power = power * m;
    const Matrix term = power * rgamma(alpha * k + beta);
    sum += term;
    if (!sum.allFinite()) break;
    if (row_sum_norm(term) <= policy.series_tol * row_sum_norm(sum)) {
      if (++small_run == 2) return {sum, MLBranch::series, MLStatus::ok, k + 1};
    } else {
      small_run = 0;
    }
  }
  throw Error(ErrorKind::non_convergence,
              "ml_matrix: series did not reach tolerance within series_max_terms");
}

MLMatrixValue ml_matrix_diagonal(double alpha, double beta, const EigenDecomposition& dec,
                                 const MLEvalPolicy& policy) {
  const auto n = dec.eigenvalues.size();
  CVector values(n);
  MLStatus status = MLStatus::ok;
  for (Eigen::Index i = 0; i < n; ++i) {
    const MLValue v = ml_scalar(alpha, beta, dec.eigenvalues(i), policy);
    values(i) = v.value;
    if (v.status != MLStatus::ok) status = v.status;
  }
  const CMatrix product = dec.vectors * values.asDiagonal() * dec.inverse_vectors;
  return {product.real(), MLBranch::diagonalized, status, static_cast<int>(n)};
}

EigenDecomposition decompose(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, true);
  EigenDecomposition dec;
  dec.eigenvalues = solver.eigenvalues();
  dec.vectors = solver.eigenvectors();
  Eigen::PartialPivLU<CMatrix> lu(dec.vectors);
  dec.inverse_vectors = lu.inverse();
  dec.condition = row_sum_norm(dec.vectors) * row_sum_norm(dec.inverse_vectors);
  if (!std::isfinite(dec.condition)) dec.condition = kInf;
  return dec;
}

// Contour to the right of every singularity of the resolvent: no residues.
bool ml_matrix_contour(double alpha, double beta, const Matrix& m, MLMatrixValue& out) {
  const auto n = m.rows();
  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) return false;
  double phi_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = solver.eigenvalues()(i);
    if (std::abs(lambda) == 0.0) continue;
    for (const auto& pole : laplace_poles(alpha, lambda)) phi_max = std::max(phi_max, pole.phi);
  }
  const double strength = phi_max > 0.0 ? 1.0 : std::max(0.0, -2.0 * (alpha - beta + 1.0));
  if (!(phi_max < kLogTarget - kLogEps)) return false;
  const ContourParams params = params_unbounded(phi_max, strength, kLogTarget);
  if (!std::isfinite(params.nodes) || params.nodes > 400.0) return false;

  const int nodes = static_cast<int>(params.nodes);
  const std::complex<double> I(0.0, 1.0);
  const CMatrix mc = m.cast<std::complex<double>>();
  const CMatrix identity = CMatrix::Identity(n, n);
  CMatrix sum = CMatrix::Zero(n, n);
  for (int k = 0; k <= nodes; ++k) {
    const double u = params.h * k;
    const std::complex<double> s = params.mu * (I * u + 1.0) * (I * u + 1.0);
    const std::complex<double> ds = -2.0 * params.mu * u + 2.0 * params.mu * I;
    const std::complex<double> weight = std::exp(s) * std::pow(s, alpha - beta) * ds;
    const CMatrix resolvent = (std::pow(s, alpha) * identity - mc).partialPivLu().solve(identity);
    // the k < 0 nodes are complex conjugates for a real matrix
    sum += (k == 0 ? 1.0 : 2.0) * weight * resolvent;
  }
  const CMatrix value = params.h * sum / (2.0 * kPi * I);
  out.value = value.real();
  out.branch = MLBranch::contour;
  out.status = MLStatus::ok;
  out.terms = 2 * nodes + 1;
  return out.value.allFinite();
}

}  // namespace

MLMatrixValue ml_matrix(double alpha, double beta, const Matrix& m, const MLEvalPolicy& policy,
                        const EigenDecomposition* decomposition) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::domain, "ml_matrix: alpha must be positive", "alpha");
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorKind::shape, "ml_matrix: argument must be a nonempty square matrix", "M");
  if (!m.allFinite()) throw Error(ErrorKind::domain, "ml_matrix: argument must be finite", "M");
  policy.validate();

  const auto n = m.rows();
  MLStatus warning = MLStatus::ok;
  if (decomposition != nullptr) {
    if (decomposition->eigenvalues.size() != n)
      throw Error(ErrorKind::shape, "ml_matrix: decomposition does not match the matrix",
                  "decomposition");
    if (decomposition->condition <= 1e8) {
      return ml_matrix_diagonal(alpha, beta, *decomposition, policy);
    }
    warning = MLStatus::conditioning_warning;
  }

  const double norm = row_sum_norm(m);
  if (norm == 0.0) {
    return {Matrix::Identity(n, n) * rgamma(beta), MLBranch::zero, warning, 1};
  }
  if (n == 1) {
    const MLValue v = ml_scalar(alpha, beta, m(0, 0), policy);
    Matrix out(1, 1);
    out(0, 0) = v.value.real();
    return {out, v.branch, warning == MLStatus::ok ? v.status : warning, v.terms};
  }
  if (norm <= policy.series_radius) {
    auto out = ml_matrix_series(alpha, beta, m, policy);
    out.status = warning;
    return out;
  }
  MLMatrixValue out;
  if (ml_matrix_contour(alpha, beta, m, out)) {
    out.status = warning;
    return out;
  }
  const EigenDecomposition own = decompose(m);
  if (own.condition <= 1e8) {
    out = ml_matrix_diagonal(alpha, beta, own, policy);
    if (warning != MLStatus::ok) out.status = warning;
    return out;
  }
  out = ml_matrix_series(alpha, beta, m, policy);
  out.status = MLStatus::accuracy_warning;
  return out;
}

}  // namespace fracstab
