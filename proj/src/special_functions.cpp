#include <array>
#include <cmath>
#include <numbers>

#include "fracstab/error.hpp"
#include "fracstab/fraccalc.hpp"

namespace fracstab {

namespace {

constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczosCoef = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4,
    0.15808870322491248884e-3,  -0.21026444172410488319e-3,
    0.21743961811521264320e-3,  -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
};

double lanczos_gamma(double x) {
  // valid for x >= 0.5
  const double xm1 = x - 1.0;
  double a = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) {
    a += kLanczosCoef[i] / (xm1 + static_cast<double>(i));
  }
  const double t = xm1 + kLanczosG + 0.5;
  // split the power so that Gamma(171) does not overflow in the intermediate
  const double half_power = std::pow(t, 0.5 * (xm1 + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half_power * (half_power * std::exp(-t)) * a;
}

// sin(pi x) with exact argument reduction.
double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0.0) r += 2.0;
  if (r > 1.0) return -std::sin(std::numbers::pi * (r - 1.0));
  return std::sin(std::numbers::pi * r);
}

}  // namespace

double gamma_fn(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::domain, "gamma_fn: argument is not finite", "x");
  }
  if (x <= 0.0 && std::abs(x - std::nearbyint(x)) <= 1e-12) {
    throw Error(ErrorKind::pole, "gamma_fn: pole at nonpositive integer", "x");
  }
  if (x < 0.5) {
    return std::numbers::pi / (sin_pi(x) * lanczos_gamma(1.0 - x));
  }
  return lanczos_gamma(x);
}

double beta_fn(double a, double b) {
  if (!(a > 0.0)) throw Error(ErrorKind::domain, "beta_fn: a must be positive", "a");
  if (!(b > 0.0)) throw Error(ErrorKind::domain, "beta_fn: b must be positive", "b");
  if (a + b < 150.0) {
    return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b);
  }
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

namespace detail {

double first_cell_moment(double n, double a, double b) {
  if (n == 1.0) return beta_fn(a, b);
  // (n - s)^{b-1} = n^{b-1} sum_k (1-b)_k / k! (s/n)^k, integrated term by term
  double coef = 1.0;  // (1-b)_k / k!
  double sum = 1.0 / a;
  const double inv_n = 1.0 / n;
  double power = 1.0;
  for (int k = 1; k < 2000; ++k) {
    coef *= (static_cast<double>(k) - b) / static_cast<double>(k);
    power *= inv_n;
    const double term = coef * power / (a + k);
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return std::pow(n, b - 1.0) * sum;
}

}  // namespace detail

}  // namespace fracstab
