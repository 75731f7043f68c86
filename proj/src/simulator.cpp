#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "fracstab/error.hpp"
#include "fracstab/format.hpp"
#include "fracstab/simulator.hpp"

namespace fracstab {

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::domain, "grid: T must be positive", "grid.T");
  if (N < 2) throw Error(ErrorKind::domain, "grid: N must be >= 2", "grid.N");
}

const char* to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::mild: return "mild";
    case Scheme::integral_form: return "integral_form";
    case Scheme::picard: return "picard";
    case Scheme::closed_form: return "closed_form";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "mild") return Scheme::mild;
  if (name == "integral_form") return Scheme::integral_form;
  if (name == "picard") return Scheme::picard;
  throw Error(ErrorKind::config, "unknown scheme '" + name + "' (mild, integral_form, picard)", "scheme");
}

const char* to_string(PathStatus status) noexcept {
  switch (status) {
    case PathStatus::ok: return "ok";
    case PathStatus::non_convergence: return "non_convergence";
    case PathStatus::overflow: return "overflow";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// random streams

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// std::normal_distribution is implementation-defined, so the transform is ours.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (double((rng_() >> 11) + 1)) * 0x1.0p-53;  // (0, 1]
    const double u2 = double(rng_() >> 11) * 0x1.0p-53;          // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phase = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phase);
    has_spare_ = true;
    return r * std::cos(phase);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

BrownianEnsemble brownian_increments(const TimeGrid& grid, int n_paths, std::uint64_t master_seed) {
  grid.validate();
  if (n_paths < 1) throw Error(ErrorKind::domain, "brownian_increments: n_paths must be >= 1", "n_paths");
  BrownianEnsemble out;
  out.grid = grid;
  out.n_paths = n_paths;
  out.master_seed = master_seed;
  out.increments.resize(std::size_t(n_paths) * grid.N);
  const double scale = std::sqrt(grid.step());
  parallel_for(n_paths, default_workers(), [&](int i) {
    NormalStream normals(splitmix64(master_seed ^ splitmix64(std::uint64_t(i))));
    double* row = out.increments.data() + std::size_t(i) * grid.N;
    for (int j = 0; j < grid.N; ++j) row[j] = scale * normals.next();
  });
  return out;
}

BrownianEnsemble BrownianEnsemble::coarsen(int factor) const {
  if (factor < 1 || grid.N % factor != 0 || grid.N / factor < 2)
    throw Error(ErrorKind::domain, "coarsen: factor must divide N and leave at least 2 steps", "factor");
  BrownianEnsemble out;
  out.grid = {grid.T, grid.N / factor};
  out.n_paths = n_paths;
  out.master_seed = master_seed;
  out.increments.assign(std::size_t(n_paths) * out.grid.N, 0.0);
  for (int i = 0; i < n_paths; ++i) {
    const double* src = path(i);
    double* dst = out.increments.data() + std::size_t(i) * out.grid.N;
    for (int j = 0; j < out.grid.N; ++j) {
      double s = 0.0;
      for (int k = 0; k < factor; ++k) s += src[j * factor + k];
      dst[j] = s;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// workers

int default_workers() {
  if (const char* env = std::getenv("FRACSTAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  if (n <= 0) return;
  workers = std::clamp(workers < 1 ? default_workers() : workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = int(std::int64_t(n) * w / workers);
    const int end = int(std::int64_t(n) * (w + 1) / workers);
    threads.emplace_back([&, w, begin, end] {
      try {
        for (int i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// PathEnsemble

int PathEnsemble::first_failure() const {
  for (int i = 0; i < n_paths; ++i)
    if (status[i] != PathStatus::ok) return i;
  return -1;
}

std::string PathEnsemble::to_csv() const {
  std::string out = "path,node,t";
  for (int c = 0; c < dim; ++c) out += ",weighted_" + std::to_string(c);
  for (int c = 0; c < dim; ++c) out += ",value_" + std::to_string(c);
  out += '\n';
  for (int i = 0; i < n_paths; ++i) {
    for (int j = 0; j <= grid.N; ++j) {
      out += std::to_string(i) + ',' + std::to_string(j) + ',' + format_double(grid.t(j));
      const double* w = weighted_value(i, j);
      const double* v = value(i, j);
      for (int c = 0; c < dim; ++c) out += ',' + format_double(w[c]);
      for (int c = 0; c < dim; ++c) {
        out += ',';
        if (j > 0) out += format_double(v[c]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string PathEnsemble::metadata() const {
  std::ostringstream s;
  s << "scheme = " << to_string(scheme) << '\n'
    << "as_printed = " << (as_printed ? "true" : "false") << '\n'
    << "master_seed = " << master_seed << '\n'
    << "n_paths = " << n_paths << '\n'
    << "T = " << format_double(grid.T) << '\n'
    << "N = " << grid.N << '\n'
    << "step = " << format_double(grid.step()) << '\n'
    << "dim = " << dim << '\n'
    << "system_digest = " << system_digest << '\n';
  return s.str();
}

// ---------------------------------------------------------------------------
// discretization shared by the marching schemes and the Picard map

namespace {

PathEnsemble empty_ensemble(const TimeGrid& grid, int n_paths, int dim, Scheme scheme) {
  PathEnsemble e;
  e.grid = grid;
  e.n_paths = n_paths;
  e.dim = dim;
  e.scheme = scheme;
  const std::size_t size = std::size_t(n_paths) * (grid.N + 1) * dim;
  e.values.assign(size, std::numeric_limits<double>::quiet_NaN());
  e.weighted.assign(size, std::numeric_limits<double>::quiet_NaN());
  e.status.assign(n_paths, PathStatus::ok);
  e.diagnostics.assign(n_paths, {});
  return e;
}

struct PathFailure {
  PathStatus status;
  std::string message;
};

// Product integration of sum_j int_{t_j}^{t_{j+1}} (t_n - s)^{a-1} K(t_n - t_j)
// [f ds + sigma dW]. Cell 0 splits each integrand into s^{a-1} rec(Y0), with
// the s^{a-1} factor integrated exactly, plus a remainder at s = step.
class Discretization {
 public:
  Discretization(const SystemSpec& system, const TimeGrid& grid, Scheme scheme, bool as_printed,
                 double inner_tol, int inner_max_iter)
      : sys_(system), grid_(grid), scheme_(scheme), as_printed_(as_printed), n_(system.dim()),
        tol_(inner_tol), max_iter_(inner_max_iter) {
    system.validate();
    grid.validate();
    const auto& c = system.coeffs;
    if (c.allow_nonvanishing == false) {
      // built-in families vanish by construction; custom ones are checked cheaply here
      if (c.family == CoefficientFamily::custom &&
          !(verify_vanishing(c.g, n_, grid.T, 8) && verify_vanishing(c.b, n_, grid.T, 8) &&
            verify_vanishing(c.sigma, n_, grid.T, 8)))
        throw Error(ErrorKind::precondition,
                    "coefficients do not vanish at x = 0; set allow_nonvanishing for test-only maps",
                    "system.coefficients");
    }
    if (c.L_g >= 1.0)
      throw Error(ErrorKind::precondition, "neutral fixed point needs L_g < 1", "system.coefficients.L_g");

    const double a = system.order.alpha;
    const double h = grid.step();
    const int N = grid.N;
    gamma_a_ = gamma_fn(a);
    w_.assign(N + 1, 0.0);
    kap_.assign(N + 1, 0.0);
    w2_.assign(N + 1, 0.0);
    kap2_.assign(N + 1, 0.0);
    const double ha = std::pow(h, a);
    const double e = 2.0 * a - 1.0;
    for (int k = 1; k <= N; ++k) {
      w_[k] = ha * (std::pow(double(k), a) - std::pow(double(k - 1), a)) / a;
      kap_[k] = std::sqrt(std::pow(h, e - 1.0) * (std::pow(double(k), e) - std::pow(double(k - 1), e)) / e);
      w2_[k] = std::pow(h, e) * detail::first_cell_moment(k, a, a);
      kap2_[k] = std::sqrt(std::pow(h, 2.0 * e - 2.0) * detail::first_cell_moment(k, e, e));
    }

    // kernel matrices and the homogeneous first term
    kernel_.resize(N + 1);
    first_term_.resize(N + 1);
    if (scheme == Scheme::integral_form) {
      const Matrix k = Matrix::Identity(n_, n_) / gamma_a_;
      for (int j = 1; j <= N; ++j) {
        kernel_[j] = k;
        first_term_[j] = std::pow(grid.t(j), a - 1.0) * system.rho / gamma_a_;
      }
    } else {
      for (int j = 1; j <= N; ++j) {
        const double t = grid.t(j);
        kernel_[j] = ml_matrix(a, a, std::pow(t, a) * system.A).value;
        first_term_[j] = std::pow(t, a - 1.0) * kernel_[j] * system.rho;
      }
    }
    scalar_ = n_ == 1;
    if (scalar_) {
      kw_.assign(N + 1, 0.0);
      kk_.assign(N + 1, 0.0);
      for (int k = 1; k <= N; ++k) {
        kw_[k] = w_[k] * kernel_[k](0, 0);
        kk_[k] = kap_[k] * kernel_[k](0, 0);
      }
    }
  }

  int dim() const { return n_; }
  const TimeGrid& grid() const { return grid_; }

  // drift integrand: b - A g (mild) or A X + b, A g + b (integral form)
  Vector drift(double t, const Vector& x) const {
    const auto& c = sys_.coeffs;
    if (scheme_ == Scheme::integral_form)
      return (as_printed_ ? Vector(sys_.A * c.g(t, x)) : Vector(sys_.A * x)) + c.b(t, x);
    return c.b(t, x) - sys_.A * c.g(t, x);
  }
  Vector drift_rec(const Vector& y) const {
    const auto& c = sys_.coeffs;
    const Vector rb = recession(c.b, c.b_rec, y);
    if (scheme_ == Scheme::integral_form)
      return (as_printed_ ? Vector(sys_.A * recession(c.g, c.g_rec, y)) : Vector(sys_.A * y)) + rb;
    return rb - sys_.A * recession(c.g, c.g_rec, y);
  }
  Vector noise(double t, const Vector& x) const { return sys_.coeffs.sigma(t, x); }
  Vector noise_rec(const Vector& y) const { return recession(sys_.coeffs.sigma, sys_.coeffs.sigma_rec, y); }
  Vector neutral(double t, const Vector& x) const { return sys_.coeffs.g(t, x); }

  // Y0 + rec_g(Y0) = rho / Gamma(a)
  Vector initial_weighted() const {
    const auto& c = sys_.coeffs;
    const Vector target = sys_.rho / gamma_a_;
    Vector y = target;
    for (int it = 0; it < max_iter_; ++it) {
      const Vector next = target - recession(c.g, c.g_rec, y);
      const double change = (next - y).norm();
      y = next;
      if (change <= tol_ * std::max(1.0, y.norm())) return y;
    }
    throw PathFailure{PathStatus::non_convergence, "weighted initial value did not converge"};
  }

  // Y0 update used by the Picard map
  Vector initial_weighted_step(const Vector& y) const {
    return sys_.rho / gamma_a_ - recession(sys_.coeffs.g, sys_.coeffs.g_rec, y);
  }

  struct FirstCell {
    Vector rec_f, rem_f, rec_s, rem_s;
  };

  FirstCell first_cell(const Vector& y0) const {
    const double h = grid_.step();
    const double a = sys_.order.alpha;
    const double sing = std::pow(h, a - 1.0);
    const Vector x1 = sing * y0;
    FirstCell fc;
    fc.rec_f = drift_rec(y0);
    fc.rec_s = noise_rec(y0);
    fc.rem_f = drift(h, x1) - sing * fc.rec_f;
    fc.rem_s = noise(h, x1) - sing * fc.rec_s;
    return fc;
  }

  // Known part of X_n: first term, first cell and cells 1..n-1.
  // f, s hold drift and sigma*dW at nodes 1..n-1 (column j).
  Vector known_part(int n, const FirstCell& fc, double dw0, const Matrix& f, const Matrix& s) const {
    const Matrix& K = kernel_[n];
    Vector acc = first_term_[n] + K * (w2_[n] * fc.rec_f + w_[n] * fc.rem_f +
                                       (kap2_[n] * fc.rec_s + kap_[n] * fc.rem_s) * dw0);
    if (scalar_) {
      double sum = 0.0;
      const double* fp = f.data();
      const double* sp = s.data();
      for (int j = 1; j < n; ++j) sum += kw_[n - j] * fp[j] + kk_[n - j] * sp[j];
      acc(0) += sum;
    } else {
      for (int j = 1; j < n; ++j)
        acc.noalias() += kernel_[n - j] * (w_[n - j] * f.col(j) + kap_[n - j] * s.col(j));
    }
    return acc;
  }

  // x = r - g(t, x) by fixed-point iteration
  Vector solve_neutral(double t, const Vector& r, const Vector& guess) const {
    Vector x = guess;
    for (int it = 0; it < max_iter_; ++it) {
      const Vector next = r - neutral(t, x);
      const double change = (next - x).norm();
      x = next;
      if (!x.allFinite()) throw PathFailure{PathStatus::overflow, "non-finite state at t = " + format_double(t)};
      if (change <= tol_ * std::max(1.0, x.norm())) return x;
    }
    throw PathFailure{PathStatus::non_convergence, "neutral fixed point did not converge at t = " + format_double(t)};
  }

  // Time-marching solve of one path; writes nodes 0..N into the given rows.
  void march(const double* dw, double* values, double* weighted) const {
    const int N = grid_.N;
    const double a = sys_.order.alpha;
    const Vector y0 = initial_weighted();
    std::copy(y0.data(), y0.data() + n_, weighted);
    const FirstCell fc = first_cell(y0);
    Matrix f = Matrix::Zero(n_, N + 1), s = Matrix::Zero(n_, N + 1);
    Vector x = std::pow(grid_.step(), a - 1.0) * y0;
    for (int k = 1; k <= N; ++k) {
      const double t = grid_.t(k);
      const Vector r = known_part(k, fc, dw[0], f, s);
      x = solve_neutral(t, r, r - neutral(t, x));
      if (!x.allFinite()) throw PathFailure{PathStatus::overflow, "non-finite state at t = " + format_double(t)};
      f.col(k) = drift(t, x);
      s.col(k) = noise(t, x) * (k < N ? dw[k] : 0.0);
      const double wt = std::pow(t, 1.0 - a);
      for (int c = 0; c < n_; ++c) {
        values[k * n_ + c] = x(c);
        weighted[k * n_ + c] = wt * x(c);
      }
    }
  }

  // One application of the discrete mild map to a whole path.
  void apply(const double* dw, const Vector& y0, const std::vector<Vector>& x_in, Vector& y0_out,
             std::vector<Vector>& x_out) const {
    const int N = grid_.N;
    y0_out = initial_weighted_step(y0);
    const FirstCell fc = first_cell(y0);
    Matrix f = Matrix::Zero(n_, N + 1), s = Matrix::Zero(n_, N + 1);
    for (int k = 1; k < N; ++k) {
      f.col(k) = drift(grid_.t(k), x_in[k]);
      s.col(k) = noise(grid_.t(k), x_in[k]) * dw[k];
    }
    for (int k = 1; k <= N; ++k) {
      const double t = grid_.t(k);
      x_out[k] = known_part(k, fc, dw[0], f, s) - neutral(t, x_in[k]);
    }
  }

 private:
  const SystemSpec& sys_;
  TimeGrid grid_;
  Scheme scheme_;
  bool as_printed_;
  int n_;
  double tol_;
  int max_iter_;
  double gamma_a_ = 1.0;
  bool scalar_ = false;
  std::vector<double> w_, kap_, w2_, kap2_, kw_, kk_;
  std::vector<Matrix> kernel_;
  std::vector<Vector> first_term_;
};

PathEnsemble run_marching(const SystemSpec& system, const TimeGrid& grid, const BrownianEnsemble& ensemble,
                          const SimulationOptions& options, Scheme scheme) {
  if (ensemble.grid.N != grid.N || ensemble.grid.T != grid.T)
    throw Error(ErrorKind::shape, "simulate: Brownian ensemble grid does not match", "ensemble.grid");
  const Discretization disc(system, grid, scheme, options.as_printed, options.inner_tol,
                            options.inner_max_iter);
  PathEnsemble out = empty_ensemble(grid, ensemble.n_paths, system.dim(), scheme);
  out.as_printed = scheme == Scheme::integral_form && options.as_printed;
  out.master_seed = ensemble.master_seed;
  out.system_digest = system.digest();
  const int workers = options.workers > 0 ? options.workers : default_workers();
  parallel_for(ensemble.n_paths, workers, [&](int i) {
    try {
      disc.march(ensemble.path(i), out.values.data() + out.offset(i, 0),
                 out.weighted.data() + out.offset(i, 0));
    } catch (const PathFailure& failure) {
      out.status[i] = failure.status;
      out.diagnostics[i] = failure.message;
    } catch (const std::exception& ex) {
      out.status[i] = PathStatus::overflow;
      out.diagnostics[i] = ex.what();
    }
  });
  return out;
}

}  // namespace

PathEnsemble simulate_mild(const SystemSpec& system, const TimeGrid& grid, const BrownianEnsemble& ensemble,
                           const SimulationOptions& options) {
  return run_marching(system, grid, ensemble, options, Scheme::mild);
}

PathEnsemble simulate_integral_form(const SystemSpec& system, const TimeGrid& grid,
                                    const BrownianEnsemble& ensemble, const SimulationOptions& options) {
  return run_marching(system, grid, ensemble, options, Scheme::integral_form);
}

PicardResult picard_path_solve(const SystemSpec& system, const TimeGrid& grid, const double* path_increments,
                               int max_iter, double tol) {
  if (max_iter < 1) throw Error(ErrorKind::domain, "picard_path_solve: max_iter must be >= 1", "max_iter");
  if (!(tol > 0.0)) throw Error(ErrorKind::domain, "picard_path_solve: tol must be positive", "tol");
  const Discretization disc(system, grid, Scheme::mild, false, 1e-12, 100);
  const int n = system.dim();
  const int N = grid.N;
  const double a = system.order.alpha;

  std::vector<double> wt(N + 1, 0.0);
  for (int k = 1; k <= N; ++k) wt[k] = std::pow(grid.t(k), 1.0 - a);

  Vector y0 = Vector::Zero(n), y0_next;
  std::vector<Vector> x(N + 1, Vector::Zero(n)), x_next(N + 1, Vector::Zero(n));
  PicardResult result;
  double previous_change = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    try {
      disc.apply(path_increments, y0, x, y0_next, x_next);
    } catch (const PathFailure& failure) {
      throw Error(ErrorKind::numeric, "picard_path_solve: " + failure.message, "path");
    }
    double change = (y0_next - y0).norm();
    for (int k = 1; k <= N; ++k) change = std::max(change, wt[k] * (x_next[k] - x[k]).norm());
    if (!std::isfinite(change)) throw Error(ErrorKind::numeric, "picard_path_solve: iterate overflowed", "path");
    if (it > 1 && previous_change > 0.0) result.contraction_ratio = change / previous_change;
    previous_change = change;
    std::swap(y0, y0_next);
    std::swap(x, x_next);
    result.applications = it;
    result.last_change = change;
    if (change <= tol) {
      // the final application only confirms the fixed point
      result.iterations = std::max(1, it - 1);
      break;
    }
    if (it == max_iter)
      throw Error(ErrorKind::non_convergence,
                  "picard_path_solve: no convergence after " + std::to_string(max_iter) +
                      " iterations, last contraction ratio " + format_double(result.contraction_ratio),
                  "max_iter");
  }

  PathEnsemble& path = result.path;
  path = empty_ensemble(grid, 1, n, Scheme::picard);
  path.system_digest = system.digest();
  for (int c = 0; c < n; ++c) path.weighted[c] = y0(c);
  for (int k = 1; k <= N; ++k)
    for (int c = 0; c < n; ++c) {
      path.values[path.offset(0, k) + c] = x[k](c);
      path.weighted[path.offset(0, k) + c] = wt[k] * x[k](c);
    }
  return result;
}

PathEnsemble closed_form_homogeneous(const Matrix& A, const Vector& rho, double alpha, const TimeGrid& grid) {
  grid.validate();
  if (A.rows() == 0 || A.rows() != A.cols() || rho.size() != A.rows())
    throw Error(ErrorKind::shape, "closed_form_homogeneous: A must be square and match rho", "A");
  FractionalOrder{alpha, 2}.validate();
  const int n = static_cast<int>(A.rows());
  PathEnsemble path = empty_ensemble(grid, 1, n, Scheme::closed_form);
  const Vector y0 = rho / gamma_fn(alpha);
  for (int c = 0; c < n; ++c) path.weighted[c] = y0(c);
  for (int k = 1; k <= grid.N; ++k) {
    const double t = grid.t(k);
    const Vector y = ml_matrix(alpha, alpha, std::pow(t, alpha) * A).value * rho;
    const double sing = std::pow(t, alpha - 1.0);
    for (int c = 0; c < n; ++c) {
      path.values[path.offset(0, k) + c] = sing * y(c);
      path.weighted[path.offset(0, k) + c] = y(c);
    }
  }
  return path;
}

}  // namespace fracstab
