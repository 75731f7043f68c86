#include <cmath>

#include "fracstab/error.hpp"
#include "fracstab/fraccalc.hpp"

namespace fracstab {

void FractionalOrder::validate() const {
  if (!(alpha > 0.5 && alpha <= 1.0)) {
    throw Error(ErrorKind::domain, "alpha must lie in (1/2, 1]", "alpha");
  }
  if (p < 2) throw Error(ErrorKind::domain, "moment order p must be an integer >= 2", "p");
}

std::vector<Vector> rl_integral_grid(std::span<const Vector> samples, double step,
                                     double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorKind::domain, "rl_integral_grid: alpha must lie in (0, 1]", "alpha");
  if (!(step > 0.0)) throw Error(ErrorKind::domain, "rl_integral_grid: step must be positive", "step");
  const std::size_t count = samples.size();
  std::vector<Vector> out;
  if (count == 0) return out;
  const auto dim = samples[0].size();
  for (const auto& s : samples) {
    if (s.size() != dim) throw Error(ErrorKind::shape, "rl_integral_grid: ragged samples", "samples");
  }

  // weight of the cell [t_j, t_{j+1}] seen from t_n depends on n - j only
  std::vector<double> weight(count, 0.0);
  const double scale = std::pow(step, alpha) / (alpha * gamma_fn(alpha));
  for (std::size_t k = 1; k < count; ++k) {
    weight[k] = scale * (std::pow(static_cast<double>(k), alpha) -
                         std::pow(static_cast<double>(k - 1), alpha));
  }
  out.assign(count, Vector::Zero(dim));
  for (std::size_t n = 1; n < count; ++n) {
    for (std::size_t j = 0; j < n; ++j) out[n] += weight[n - j] * samples[j];
  }
  return out;
}

std::vector<Vector> rl_derivative_grid(std::span<const Vector> samples, double step,
                                       double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorKind::domain, "rl_derivative_grid: alpha must lie in (0, 1)", "alpha");
  if (samples.size() < 3)
    throw Error(ErrorKind::shape, "rl_derivative_grid: at least 3 nodes required", "samples");
  const auto smoothed = rl_integral_grid(samples, step, 1.0 - alpha);
  std::vector<Vector> out(samples.size());
  for (std::size_t n = 1; n < samples.size(); ++n) {
    out[n] = (smoothed[n] - smoothed[n - 1]) / step;
  }
  out[0] = out[1];
  return out;
}

}  // namespace fracstab
