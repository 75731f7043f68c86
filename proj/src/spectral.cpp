#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracstab/error.hpp"
#include "fracstab/spectral.hpp"

namespace fracstab {

Spectrum eigenvalues(const Matrix& a) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw Error(ErrorKind::shape, "eigenvalues: matrix must be square and nonempty", "A");
  if (!a.allFinite()) throw Error(ErrorKind::domain, "eigenvalues: entries must be finite", "A");

  const auto n = a.rows();
  Eigen::EigenSolver<Matrix> solver;
  solver.setMaxIterations(100 * n);
  solver.compute(a, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::non_convergence,
                "eigenvalues: QR iteration did not converge within 100 n sweeps", "A");
  }
  Spectrum out;
  const CVector values = solver.eigenvalues();
  const CMatrix vectors = solver.eigenvectors();
  const CMatrix ac = a.cast<Complex>();
  out.eigenvalues.assign(values.data(), values.data() + n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CVector v = vectors.col(i);
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    out.residual = std::max(out.residual, (ac * v - values(i) * v).norm() / vnorm);
  }
  return out;
}

EigenDecomposition eigen_decomposition(const Matrix& a) {
  const Spectrum spectrum = eigenvalues(a);  // validates and checks convergence
  Eigen::EigenSolver<Matrix> solver;
  solver.setMaxIterations(100 * a.rows());
  solver.compute(a, true);
  EigenDecomposition dec;
  dec.eigenvalues = solver.eigenvalues();
  dec.vectors = solver.eigenvectors();
  Eigen::FullPivLU<CMatrix> lu(dec.vectors);
  if (!lu.isInvertible()) {
    dec.inverse_vectors = CMatrix::Zero(a.rows(), a.cols());
    dec.condition = std::numeric_limits<double>::infinity();
    return dec;
  }
  dec.inverse_vectors = lu.inverse();
  dec.condition = row_sum_norm(dec.vectors) * row_sum_norm(dec.inverse_vectors);
  return dec;
}

SectorVerdict sector_check(const Spectrum& spectrum, double alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw Error(ErrorKind::domain, "sector_check: alpha must lie in (1/2, 1]", "alpha");
  if (spectrum.eigenvalues.empty())
    throw Error(ErrorKind::shape, "sector_check: empty spectrum", "spectrum");

  const double half_angle = alpha * std::numbers::pi / 2.0;
  SectorVerdict out;
  out.margin = std::numeric_limits<double>::infinity();
  Complex worst;
  bool has_zero = false;
  for (const Complex& lambda : spectrum.eigenvalues) {
    if (std::abs(lambda) == 0.0) {
      has_zero = true;
      worst = 0.0;
      out.margin = std::min(out.margin, -half_angle);
      continue;
    }
    const double m = std::abs(std::arg(lambda)) - half_angle;
    if (m < out.margin) {
      out.margin = m;
      if (!has_zero) worst = lambda;
    }
  }
  out.in_sector = out.margin > 0.0 && !has_zero;
  if (!out.in_sector) out.offending_eigenvalue = worst;
  return out;
}

namespace {

std::vector<double> ml_norm_profile(const Matrix& a, double alpha, double step, int n_nodes,
                                    const MLEvalPolicy& policy) {
  std::vector<double> norms(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const double t = step * i;
    const Matrix arg = std::pow(t, alpha) * a;
    norms[i] = row_sum_norm(ml_matrix(alpha, alpha, arg, policy).value);
  }
  return norms;
}

double relative_growth(const std::vector<double>& running_sup, std::size_t from) {
  const double start = running_sup[from];
  const double end = running_sup.back();
  if (start == 0.0) return end == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (end - start) / std::abs(start);
}

std::vector<double> running_max(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    m = std::max(m, v[i]);
    out[i] = m;
  }
  return out;
}

}  // namespace

double ml_norm_sup(const Matrix& a, double alpha, double horizon, int n_nodes,
                   const MLEvalPolicy& policy) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw Error(ErrorKind::shape, "ml_norm_sup: matrix must be square", "A");
  if (!(horizon > 0.0)) throw Error(ErrorKind::domain, "ml_norm_sup: T must be positive", "T");
  if (n_nodes < 16) throw Error(ErrorKind::domain, "ml_norm_sup: n_nodes must be >= 16", "n_nodes");
  const auto norms = ml_norm_profile(a, alpha, horizon / (n_nodes - 1), n_nodes, policy);
  return *std::max_element(norms.begin(), norms.end());
}

Lemma21Report lemma21_profile(const Matrix& a, double alpha, double t_max, int n_nodes,
                              const MLEvalPolicy& policy) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw Error(ErrorKind::shape, "lemma21_profile: matrix must be square", "A");
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw Error(ErrorKind::domain, "lemma21_profile: alpha must lie in (1/2, 1]", "alpha");
  if (!(t_max >= 10.0)) throw Error(ErrorKind::domain, "lemma21_profile: t_max must be >= 10", "t_max");
  if (n_nodes < 16) throw Error(ErrorKind::domain, "lemma21_profile: n_nodes must be >= 16", "n_nodes");

  Lemma21Report report;
  report.grid_used = {t_max, n_nodes};
  const double h = report.grid_used.step();
  const std::vector<double> phi = ml_norm_profile(a, alpha, h, n_nodes, policy);
  report.m_sup = *std::max_element(phi.begin(), phi.end());

  // decay profile t^{2 alpha} ||E||
  report.decay_profile.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    report.decay_profile[i] = std::pow(h * i, 2.0 * alpha) * phi[i];
  }
  const auto& q = report.decay_profile;
  int start = n_nodes - 1;
  while (start > 0 && q[start - 1] >= q[start]) --start;
  report.t0 = h * start;
  report.m_tilde = *std::max_element(q.begin() + start, q.end());

  // weighted convolution profile, product integration exact against the
  // endpoint power factors on the first and last cells
  const double pa = std::pow(h, alpha);
  const double w_near = 1.0 / alpha - 1.0 / (alpha + 1.0);  // weight of the singular end
  const double w_far = 1.0 / (alpha + 1.0);
  std::vector<double> pow_node(n_nodes, 0.0);  // (k h)^{alpha - 1}
  for (int k = 1; k < n_nodes; ++k) pow_node[k] = std::pow(h * k, alpha - 1.0);

  auto& c = report.convolution_profile;
  c.assign(n_nodes, 0.0);
  for (int i = 1; i < n_nodes; ++i) {
    double integral = 0.0;
    if (i == 1) {
      integral = std::pow(h, 2.0 * alpha - 1.0) * beta_fn(alpha, alpha) * 0.5 * (phi[0] + phi[1]);
    } else {
      // first cell: tau^{alpha-1} singular, smooth part (t - tau)^{alpha-1} phi(t - tau)
      const double s0 = pow_node[i] * phi[i];
      const double s1 = pow_node[i - 1] * phi[i - 1];
      integral += pa * (s0 * w_near + s1 * w_far);
      // last cell: (t - tau)^{alpha-1} singular, smooth part phi(t - tau) tau^{alpha-1}
      const double r0 = phi[0] * pow_node[i];
      const double r1 = phi[1] * pow_node[i - 1];
      integral += pa * (r0 * w_near + r1 * w_far);
      // interior cells by the trapezoidal rule
      double interior = 0.0;
      for (int j = 1; j <= i - 1; ++j) {
        const double f = pow_node[i - j] * phi[i - j] * pow_node[j];
        interior += (j == 1 || j == i - 1) ? 0.5 * f : f;
      }
      if (i > 2) integral += h * interior;
    }
    c[i] = std::pow(h * i, 1.0 - alpha) * integral;
  }
  report.conv_sup = *std::max_element(c.begin(), c.end());

  const auto conv_run = running_max(c);
  const auto decay_run = running_max(q);
  const auto index_at = [&](double t) {
    return static_cast<std::size_t>(std::clamp(std::ceil(t / h), 0.0, double(n_nodes - 1)));
  };
  report.conv_growth_last_decade = relative_growth(conv_run, index_at(t_max / 10.0));
  report.conv_growth_last_half = relative_growth(conv_run, index_at(t_max / 2.0));
  report.decay_growth_last_decade = relative_growth(decay_run, index_at(t_max / 10.0));
  report.decay_growth_last_half = relative_growth(decay_run, index_at(t_max / 2.0));

  const bool finite = std::all_of(phi.begin(), phi.end(), [](double v) { return std::isfinite(v); });
  if (!finite || report.decay_growth_last_half >= 0.01 || report.conv_growth_last_half >= 0.01) {
    report.diverged = true;
    report.diagnostic =
        "profiled quantity still grows at the end of the grid: A is outside the stability "
        "sector or t_max is too small";
  }
  return report;
}

}  // namespace fracstab
